#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "minsurf/config.hpp"
#include "minsurf/errors.hpp"
#include "minsurf/pipeline.hpp"
#include "minsurf/report.hpp"

using namespace minsurf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MINSURF_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("minsurf_test_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path p = scratch(name);
  std::ofstream(p) << body;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MINSURF_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream f(p);
  std::size_t n = 0;
  for (std::string line; std::getline(f, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("bundled configs load and validate") {
  for (const char* name : {"worked_example.json", "unit_disk.json", "abstract.json"}) {
    const Config c = load_config(kConfigs / name);
    CHECK_NOTHROW(validate(c));
  }
  const Config example = load_config(kConfigs / "worked_example.json");
  CHECK(example.mode == Mode::Euclidean2D);
  CHECK(example.delta == 1.0);
  CHECK(example.js_l == 0.25);
  REQUIRE(example.domain);
  CHECK(example.domain->radial);
  const Config abs = load_config(kConfigs / "abstract.json");
  CHECK(abs.mode == Mode::Abstract);
  CHECK(abs.abstract->R == INFINITY);
}

TEST_CASE("validation errors") {
  auto check_rejects = [](const json& j, const std::string& field) {
    try {
      validate(config_from_json(j));
      FAIL("accepted: ", j.dump());
    } catch (const ValidationError& e) {
      CHECK(e.field().find(field) != std::string::npos);
    }
  };
  const json both = {{"domain", {{"radial", "1"}, {"x", "cos(t)"}, {"y", "sin(t)"}}}, {"phi", "x"}};
  check_rejects(both, "domain");
  check_rejects({{"domain", {{"x", "cos(t)"}}}, {"phi", "x"}}, "domain");
  check_rejects({{"domain", {{"radial", "1"}}}, {"phi", "x + "}}, "phi");
  check_rejects({{"domain", {{"radial", "1 + q"}}}, {"phi", "x"}}, "domain");
  check_rejects({{"domain", {{"radial", "1"}, {"period", "-1"}}}, {"phi", "x"}}, "period");
  check_rejects({{"domain", {{"radial", "1"}}}, {"phi", "x"}, {"delta", -1.0}}, "delta");
  check_rejects({{"domain", {{"radial", "1"}}}, {"phi", "x"}, {"output", {{"format", "xml"}}}}, "format");
  check_rejects({{"mode", "abstract"},
                 {"abstract", {{"n", 3}, {"lambda_r", -0.2}, {"mu_r", 0.2}, {"R", "inf"}, {"r", 5.0}, {"tau", 0.1},
                               {"omega", 0.05}}},
                 {"solver", json::object()}},
                "solver");
  CHECK_THROWS_AS(config_from_json({{"domain", {{"radial", "1"}}}, {"phi", "x"}, {"colour", "red"}}), ValidationError);
}

TEST_CASE("malformed JSON reports a position") {
  const fs::path p = write_file("bad.json", "{\"phi\": \"x\",\n  \"domain\": }");
  try {
    load_config(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() > 0);
    CHECK(e.path() == p.string());
  }
  CHECK_THROWS_AS(load_config(scratch("missing.json")), IoError);
}

TEST_CASE("config round trip") {
  for (const char* name : {"worked_example.json", "unit_disk.json", "abstract.json"}) {
    const Config c = load_config(kConfigs / name);
    const json j = config_to_json(c);
    CHECK(config_from_json(j) == c);
    CHECK(config_to_json(config_from_json(j)) == j);
  }
}

TEST_CASE("check on the worked example") {
  const Report r = run(load_config(kConfigs / "worked_example.json"), Verb::Check);
  CHECK_FALSE(r.any_failed());
  CHECK(r.stage("barrier")->status == "skipped");
  CHECK(r.doc["verdict"]["branch"] == "criterion-mo");
  CHECK(r.doc["verdict"]["jenkins_serrin"]["pass"] == false);
  const std::string text = render_text(r);
  CHECK(text.find("theta ≈ 9.05") != std::string::npos);
  CHECK(text.find("bound(mo, δ=1) ≈ 0.433") != std::string::npos);
  CHECK(text.find("B_JS ≈ 0.00725") != std::string::npos);
  CHECK(text.find("SKIPPED") != std::string::npos);
}

TEST_CASE("mean-convex domain skips the barrier stage") {
  const Report r = run(load_config(kConfigs / "unit_disk.json"), Verb::Solve);
  CHECK_FALSE(r.any_failed());
  const StageStatus* b = r.stage("barrier");
  REQUIRE(b);
  CHECK(b->status == "skipped");
  CHECK(b->reason == "∂Ω⁻ = ∅");
  CHECK(r.stage("solve")->status == "ok");
  CHECK(r.doc["verdict"]["branch"] == "mean-convex");
  CHECK(r.doc["solve"]["levels"][0]["converged"] == true);
}

TEST_CASE("abstract mode reports constants and bounds only") {
  const Report r = run(load_config(kConfigs / "abstract.json"), Verb::Report);
  CHECK_FALSE(r.any_failed());
  CHECK(r.stage("barrier")->status == "skipped");
  CHECK(r.stage("solve")->status == "skipped");
  CHECK(r.doc.contains("constants"));
  CHECK(r.doc["verdict"]["branch"] == "criterion-mo");
  CHECK_FALSE(r.doc.contains("barrier"));
}

TEST_CASE("stage failures are recorded and dependants skipped") {
  Config c = load_config(kConfigs / "worked_example.json");
  c.phi = "ln(x)";
  const Report r = run(c, Verb::Solve);
  CHECK(r.any_failed());
  CHECK(r.stage("stats")->status == "failed");
  CHECK(r.stage("stats")->error_kind == "DomainError");
  CHECK(r.stage("criterion")->status == "skipped");
  CHECK(r.stage("criterion")->reason.find("stats") != std::string::npos);
  CHECK(render_text(r).find("FAILED") != std::string::npos);
}

TEST_CASE("json report is deterministic and parses back") {
  Config c = load_config(kConfigs / "worked_example.json");
  c.solver->richardson = false;
  c.solver->n_radial = 8;
  c.solver->n_angular = 32;
  const Report a = run(c, Verb::Solve), b = run(c, Verb::Solve);
  CHECK(render_json(a, true) == render_json(b, true));
  CHECK(json::parse(render_json(a, true)) == a.doc);
  CHECK(json::parse(render_json(a, false)).contains("timings"));
  CHECK(a.doc["barrier"]["pass"] == true);
  CHECK(a.doc["solve"]["levels"][0]["check"]["pass"] == true);
}

TEST_CASE("csv bundle") {
  Config c = load_config(kConfigs / "worked_example.json");
  c.solver->richardson = false;
  c.output.psi_grid = 40;
  const Report r = run(c, Verb::Solve);
  const fs::path dir = scratch("csv");
  export_report(r, Format::CsvBundle, dir);
  CHECK(count_lines(dir / "psi.csv") == 42);
  CHECK(count_lines(dir / "solution.csv") == r.mesh->size() + 1);
  CHECK(count_lines(dir / "triangles.csv") == r.mesh->triangles.size() + 1);
  CHECK(fs::exists(dir / "boundary.csv"));
  CHECK_THROWS_AS(export_report(r, Format::CsvBundle, {}), IoError);
}

TEST_CASE("command line exit codes") {
  const std::string example = (kConfigs / "worked_example.json").string();
  CHECK(run_cli("check --config " + example) == 0);
  CHECK(run_cli("check --config " + example + " --format json --normalize --out " +
                (scratch("cli") / "r.json").string()) == 0);
  CHECK(run_cli("check --config " + scratch("nope.json").string()) == 1);
  CHECK(run_cli("frobnicate") == 1);
  const fs::path both = write_file("both.json", R"({"domain": {"radial": "1", "x": "t"}, "phi": "x"})");
  const fs::path lnx = write_file("lnx.json", R"js({"domain": {"radial": "1"}, "phi": "ln(x)"})js");
  CHECK(run_cli("check --config " + both.string()) == 1);
  CHECK(run_cli("check --config " + lnx.string()) == 2);
  CHECK(run_cli("check --config " + example + " --delta 5") == 2);
}
