#include "minsurf/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "minsurf/errors.hpp"

namespace minsurf {
namespace {

using nlohmann::json;

double real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  return NAN;
}

std::string g3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string g3(const json& j) { return g3(real(j)); }

const char* verdict_word(bool pass) { return pass ? "pass" : "FAIL"; }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot write " + p.string());
  return f;
}

}  // namespace

std::optional<Format> parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "text") return Format::Text;
  if (s == "csv-bundle") return Format::CsvBundle;
  return std::nullopt;
}

std::string render_json(const Report& r, bool normalize) {
  json doc = r.doc;
  if (!normalize && r.config.output.timings) {
    json t = json::object();
    for (const auto& s : r.stages) t[s.name] = s.seconds;
    doc["timings"] = t;
  }
  return doc.dump(2) + "\n";
}

std::string render_text(const Report& r) {
  const json& d = r.doc;
  std::ostringstream os;
  os << "minsurf " << to_string(r.verb) << " (" << to_string(r.config.mode) << ")\n\n";

  os << "stages\n";
  for (const auto& s : r.stages) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "  %-10s ", s.name.c_str());
    os << buf;
    if (s.status == "ok")
      os << "ok";
    else if (s.status == "skipped")
      os << "SKIPPED (" << s.reason << ")";
    else
      os << "FAILED (" << s.error_kind << ": " << s.reason << ")";
    os << "\n";
  }

  if (d.contains("geometry")) {
    const json& g = d["geometry"];
    os << "\ngeometry\n";
    if (g.contains("boundary")) {
      const json& b = g["boundary"];
      os << "  kappa_min ≈ " << g3(b["kappa_min"]) << "\n";
      os << "  max|kappa| ≈ " << g3(b["kappa_max_abs"]) << "\n";
      os << "  negative arcs: " << b["negative_arcs"].size() << "\n";
    }
    if (g.contains("exterior")) os << "  exterior radius r ≈ " << g3(g["exterior"]["r"]) << "\n";
    if (g.contains("summary")) {
      const json& s = g["summary"];
      os << "  lambda_r ≈ " << g3(s["lambda_r"]) << "  mu_r ≈ " << g3(s["mu_r"]) << "  R = " << g3(s["R"])
         << "  n = " << s["n"].get<int>() << "\n";
    }
  }

  if (d.contains("data")) {
    os << "\ndata\n";
    os << "  tau ≈ " << g3(d["data"]["tau"]) << "\n";
    os << "  omega ≈ " << g3(d["data"]["omega"]) << "\n";
  }

  if (d.contains("constants")) {
    const json& k = d["constants"];
    os << "\nconstants\n";
    os << "  rho ≈ " << g3(k["rho"]) << "  a ≈ " << g3(k["a"]) << "  b ≈ " << g3(k["b"]) << "  c ≈ " << g3(k["c"])
       << "\n";
    os << "  theta ≈ " << g3(k["theta"]) << "\n";
    os << "  sigma ≈ " << g3(k["sigma"]) << "\n";
    os << "  delta_max ≈ " << g3(k["delta_max"]) << "\n";
  }

  if (d.contains("verdict")) {
    const json& v = d["verdict"];
    os << "\nconditions\n";
    for (const auto& c : v["checks"]) {
      const std::string name = c["name"].get<std::string>();
      std::string label;
      if (name == "mo")
        label = "bound(mo, δ=" + g3(v["chosen_delta"]) + ")";
      else if (name == "mo_opt")
        label = "bound(mo, δ_opt=" + g3(v["delta_opt"]) + ")";
      else if (name == "jenkins_serrin")
        label = "B_JS";
      else
        label = "bound(" + name + ")";
      os << "  " << label << " ≈ " << g3(c["bound"]) << "  margin " << g3(c["margin"]) << "  "
         << verdict_word(c["pass"].get<bool>()) << "\n";
    }
    if (v.contains("corollary")) {
      const json& c = v["corollary"];
      os << "  SH lhs ≈ " << g3(c["sh_lhs"]) << "  " << verdict_word(c["sh_pass"].get<bool>()) << "\n";
      if (c.contains("she_value"))
        os << "  SHE ≈ " << g3(c["she_value"]) << "  " << verdict_word(c["she_pass"].get<bool>()) << "\n";
    }
    if (v.contains("jenkins_serrin")) {
      const json& js = v["jenkins_serrin"];
      os << "  Jenkins-Serrin: A ≈ " << g3(js["A"]) << "  C ≈ " << g3(js["C"]) << "  H ≈ " << g3(js["H"])
         << "  graph radius " << (js["graph_radius_ok"].get<bool>() ? "ok" : "not verified") << "\n";
    }
    os << "\nverdict: " << v["branch"].get<std::string>() << (v["solvable"].get<bool>() ? " (solvable)" : "")
       << "\n";
  }

  if (d.contains("barrier")) {
    const json& b = d["barrier"];
    os << "\nbarrier (δ = " << g3(b["delta"]) << ")\n";
    for (const auto& c : b["psi_properties"]["checks"])
      os << "  " << c["name"].get<std::string>() << "  margin " << g3(c["margin"]) << "  "
         << verdict_word(c["pass"].get<bool>()) << "\n";
    for (const auto& c : b["certificates"]) {
      os << "  arc " << c["arc"].get<int>() << " " << c["role"].get<std::string>() << ": max M(w) ≈ "
         << g3(c["upper"]["max_M"]) << ", min M(xi) ≈ " << g3(c["lower"]["min_M"]) << ", "
         << c["upper"]["n_points"].get<std::size_t>() << " points  "
         << verdict_word(c["upper"]["pass"].get<bool>() && c["lower"]["pass"].get<bool>()) << "\n";
    }
    os << "  certified: " << (b["pass"].get<bool>() ? "yes" : "no") << "\n";
  }

  if (d.contains("solve")) {
    const json& s = d["solve"];
    os << "\nsolver\n";
    for (const auto& l : s["levels"]) {
      os << "  " << l["n_radial"].get<int>() << "x" << l["n_angular"].get<int>() << ": "
         << (l["converged"].get<bool>() ? "converged" : "NOT converged") << " in " << l["iterations"].get<int>()
         << " iterations, osc(u) ≈ " << g3(l["osc_u"]);
      if (l.contains("check")) {
        const json& c = l["check"];
        os << ", max principle " << verdict_word(c["mp_pass"].get<bool>()) << ", barrier bracket "
           << verdict_word(c["bracket_pass"].get<bool>());
      }
      os << "\n";
    }
    if (s.contains("richardson")) os << "  Richardson ratio ≈ " << g3(s["richardson"]["ratio"]) << "\n";
  }
  return os.str();
}

void write_csv_bundle(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  char buf[160];
  if (r.classification) {
    auto f = open_out(dir / "boundary.csv");
    f << "t,x,y,kappa\n";
    for (const auto& s : r.classification->samples) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.point.x, s.point.y, s.kappa);
      f << buf;
    }
  }
  if (r.profile) {
    auto f = open_out(dir / "psi.csv");
    barrier::write_psi_csv(f, *r.profile, r.config.output.psi_grid);
  }
  if (r.mesh) {
    auto f = open_out(dir / "solution.csv");
    fem::write_solution_csv(f, *r.mesh, r.u);
    auto g = open_out(dir / "triangles.csv");
    fem::write_triangles_csv(g, *r.mesh);
  }
}

void export_report(const Report& r, Format f, const std::filesystem::path& out, bool normalize) {
  if (f == Format::CsvBundle) {
    if (out.empty()) throw IoError("csv-bundle needs an output directory");
    write_csv_bundle(r, out);
    return;
  }
  const std::string body = f == Format::Json ? render_json(r, normalize) : render_text(r);
  if (out.empty()) {
    std::cout << body;
    return;
  }
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  auto file = open_out(out);
  file << body;
  if (!file) throw IoError("write failed for " + out.string());
}

}  // namespace minsurf
