#include "minsurf/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "minsurf/criterion.hpp"
#include "minsurf/errors.hpp"
#include "minsurf/expr.hpp"

namespace minsurf {
namespace {

using nlohmann::json;

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json vec(Vec2 p) { return json::array({num(p.x), num(p.y)}); }

json to_json(const geom::BoundaryClassification& c) {
  json arcs = json::array();
  for (const auto& a : c.negative_arcs)
    arcs.push_back({{"t_begin", num(a.t_begin)}, {"t_end", num(a.t_end)}, {"t_min", num(a.t_min)},
                    {"kappa_min", num(a.kappa_min)}});
  return {{"kappa_min", num(c.kappa_min)},
          {"t_kappa_min", num(c.t_kappa_min)},
          {"kappa_max_abs", num(c.kappa_max_abs)},
          {"negative_arcs", arcs},
          {"eps_neg", num(c.eps_neg)},
          {"n_samples", c.n_samples},
          {"mean_convex", !c.has_negative_part()}};
}

json to_json(const geom::ExteriorSphere& s) {
  return {{"t", num(s.t_tangency)}, {"p", vec(s.p)}, {"p0", vec(s.p0)}, {"r", num(s.r)}};
}

json to_json(const geom::ExteriorRadius& e) {
  json spheres = json::array();
  for (const auto& s : e.spheres) spheres.push_back(to_json(s));
  return {{"r", num(e.r)},
          {"osculating_bound", num(e.osculating_bound)},
          {"fit_bound", num(e.fit_bound)},
          {"spheres", spheres}};
}

json to_json(const criterion::GeometrySummary& g) {
  return {{"n", g.n},
          {"lambda_r", num(g.lambda_r)},
          {"mu_r", num(g.mu_r)},
          {"r", num(g.r)},
          {"R", num(g.R)},
          {"source", g.source == criterion::GeometrySource::UserSupplied ? "user" : "domain"}};
}

json to_json(const criterion::DataStats& s) {
  return {{"tau", num(s.tau)},
          {"omega", num(s.omega)},
          {"sup_grad", num(s.sup_grad)},
          {"sup_hess", num(s.sup_hess)},
          {"sup_lap", num(s.sup_lap)},
          {"sup_phi", num(s.sup_phi)},
          {"inf_phi", num(s.inf_phi)},
          {"error_estimate", num(s.error_estimate)},
          {"n_points", s.n_points}};
}

json to_json(const criterion::CriterionConstants& k) {
  return {{"tau", num(k.tau)},   {"rho", num(k.rho)},     {"a", num(k.a)},
          {"b", num(k.b)},       {"c", num(k.c)},         {"theta", num(k.theta)},
          {"sigma", num(k.sigma)}, {"delta_max", num(k.delta_max)}, {"n", k.n}};
}

json to_json(const criterion::Verdict& v) {
  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"name", c.name}, {"bound", num(c.bound)}, {"margin", num(c.margin)}, {"pass", c.pass}});
  json j = {{"branch", criterion::to_string(v.branch)}, {"solvable", v.solvable}, {"checks", checks}};
  if (v.constants) {
    j["chosen_delta"] = num(v.chosen_delta);
    j["delta_opt"] = num(v.delta_opt);
    j["bound_mo"] = num(v.bound_mo);
    j["bound_mo_opt"] = num(v.bound_mo_opt);
    j["sh_lhs"] = num(v.sh_lhs);
  }
  if (v.corollary && v.corollary->she_evaluated) j["she_value"] = num(v.she_value);
  j["js_B"] = num(v.js_B);
  if (v.corollary) {
    const auto& c = *v.corollary;
    json cj = {{"sh_lhs", num(c.sh_lhs)}, {"sh_pass", c.sh_pass}, {"sh_margin", num(v.constants->lambda_r - c.sh_lhs)}};
    if (c.she_evaluated) {
      cj["she_value"] = num(c.she_value);
      cj["she_pass"] = c.she_pass;
      cj["she_margin"] = num(v.constants->r - c.she_value);
      if (!c.she_reason.empty()) cj["she_reason"] = c.she_reason;
    }
    j["corollary"] = cj;
  }
  if (v.constants && !std::isfinite(v.constants->R)) {
    j["bound_hc"] = num(v.bound_hc);
    j["bound_hc2"] = num(v.bound_hc2);
  }
  if (v.jenkins_serrin) {
    const auto& js = *v.jenkins_serrin;
    j["jenkins_serrin"] = {{"l_prime", num(js.l_prime)}, {"A", num(js.A)},       {"C", num(js.C)},
                           {"H", num(js.H)},             {"B", num(js.B)},       {"margin", num(js.B - v.stats.omega)},
                           {"pass", v.stats.omega <= js.B}, {"graph_radius_ok", v.js_graph_ok.value_or(false)}};
  }
  return j;
}

json to_json(const barrier::PsiProperties& p) {
  json checks = json::array();
  for (const auto& c : p.checks) checks.push_back({{"name", c.name}, {"margin", num(c.margin)}, {"pass", c.pass}});
  return {{"checks", checks}, {"pass", p.pass}};
}

json to_json(const barrier::BarrierCheckReport& r) {
  const bool upper = r.side == barrier::Side::Upper;
  json viol = json::array();
  for (const auto& v : r.violations) viol.push_back({{"what", v.what}, {"at", vec(v.at)}, {"value", num(v.value)}});
  json j = {{"n_points", r.n_points},
            {"spacing", num(r.spacing)},
            {upper ? "max_M" : "min_M", num(r.extreme_M)},
            {"extreme_M_at", vec(r.extreme_M_at)},
            {"M_margin", num(upper ? -r.extreme_M : r.extreme_M)},
            {"min_offset", num(r.min_offset)},
            {"min_offset_at", vec(r.min_offset_at)},
            {"tangency_offset", num(r.tangency_offset)},
            {"n_violations", r.n_violations},
            {"violations", viol},
            {"pass", r.pass}};
  if (r.cap_margin) j["cap_margin"] = num(*r.cap_margin);
  return j;
}

json to_json(const fem::SolutionCheck& c) {
  return {{"boundary_min", num(c.boundary_min)},
          {"boundary_max", num(c.boundary_max)},
          {"mp_margin", num(c.mp_margin)},
          {"mp_worst_node", c.mp_worst_node},
          {"mp_pass", c.mp_pass},
          {"tol_mesh", num(c.tol_mesh)},
          {"bracket_nodes", c.bracket_nodes},
          {"bracket_margin", num(c.bracket_margin)},
          {"bracket_worst_node", c.bracket_worst_node},
          {"bracket_pass", c.bracket_pass},
          {"trace_error", num(c.trace_error)},
          {"trace_pass", c.trace_pass},
          {"pass", c.pass()}};
}

json level_json(const fem::Mesh& m, const fem::SolveResult& s) {
  bool monotone = true;
  for (std::size_t i = 1; i < s.energy.size(); ++i)
    monotone = monotone && s.energy[i] <= s.energy[i - 1] + 1e-13 * std::abs(s.energy[i - 1]);
  double lo = INFINITY, hi = -INFINITY;
  for (double v : s.u) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {{"n_radial", m.n_radial},
          {"n_angular", m.n_angular},
          {"nodes", m.size()},
          {"triangles", m.triangles.size()},
          {"h", num(m.h())},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"stop_reason", s.stop_reason},
          {"max_residual", num(s.max_residual)},
          {"energy", num(s.energy.back())},
          {"energy_monotone", monotone},
          {"u_min", num(lo)},
          {"u_max", num(hi)},
          {"osc_u", num(hi - lo)}};
}

geom::BoundaryCurve make_curve(const DomainSpec& d) {
  const double period = expr::Expr::parse(d.period, {}).eval({});
  if (d.radial) return geom::BoundaryCurve::radial(*d.radial, period);
  return geom::BoundaryCurve::parametric(*d.x, *d.y, period);
}

const char* kStageNames[] = {"geometry", "stats", "criterion", "barrier", "solve"};

}  // namespace

std::optional<Verb> parse_verb(const std::string& s) {
  if (s == "check") return Verb::Check;
  if (s == "barrier") return Verb::Barrier;
  if (s == "solve") return Verb::Solve;
  if (s == "report") return Verb::Report;
  return std::nullopt;
}

std::string to_string(Verb v) {
  switch (v) {
    case Verb::Check: return "check";
    case Verb::Barrier: return "barrier";
    case Verb::Solve: return "solve";
    case Verb::Report: return "report";
  }
  return "?";
}

bool Report::any_failed() const {
  for (const auto& s : stages)
    if (s.status == "failed") return true;
  return false;
}

const StageStatus* Report::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

Report run(const Config& config, Verb verb) {
  Report rep;
  rep.config = config;
  rep.verb = verb;
  json& doc = rep.doc;
  doc["config"] = config_to_json(config);
  doc["verb"] = to_string(verb);
  doc["seed"] = config.seed;

  const int last_stage = verb == Verb::Check ? 2 : verb == Verb::Barrier ? 3 : 4;
  const bool abstract = config.mode == Mode::Abstract;

  std::optional<geom::Domain2D> domain;
  std::optional<expr::Expr> phi;
  std::optional<geom::BoundaryClassification> cls;
  std::optional<geom::ExteriorRadius> ext;
  std::optional<criterion::GeometrySummary> geometry;
  std::optional<criterion::DataStats> stats;
  std::optional<criterion::Verdict> verdict;
  std::vector<barrier::BarrierProfile> profiles;

  // Runs one stage unless a prerequisite is missing; records the outcome.
  auto stage = [&](int index, std::vector<std::string> needs, std::optional<std::string> skip_reason,
                   const std::function<void()>& body) {
    StageStatus st;
    st.name = kStageNames[index];
    if (index > last_stage) {
      st.status = "skipped";
      st.reason = "not requested by verb '" + to_string(verb) + "'";
    } else if (skip_reason) {
      st.status = "skipped";
      st.reason = *skip_reason;
    } else {
      for (const auto& n : needs) {
        const StageStatus* dep = rep.stage(n);
        if (!dep || dep->status != "ok") {
          st.status = "skipped";
          st.reason = "depends on " + n + " stage (" + (dep ? dep->status : std::string("absent")) + ")";
          break;
        }
      }
    }
    if (st.status.empty()) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        body();
        st.status = "ok";
      } catch (const Error& e) {
        st.status = "failed";
        st.error_kind = e.kind();
        st.reason = e.what();
      } catch (const std::exception& e) {
        st.status = "failed";
        st.error_kind = "InternalError";
        st.reason = e.what();
      }
      st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    rep.stages.push_back(st);
  };

  const std::optional<std::string> no_geometry =
      abstract ? std::optional<std::string>("abstract mode has no geometry") : std::nullopt;

  stage(0, {}, std::nullopt, [&] {
    if (abstract) {
      const AbstractSpec& a = *config.abstract;
      criterion::GeometrySummary g;
      g.n = a.n;
      g.lambda_r = a.lambda_r;
      g.mu_r = a.mu_r;
      g.r = a.r;
      g.R = a.R;
      g.source = criterion::GeometrySource::UserSupplied;
      geometry = g;
      doc["geometry"] = {{"summary", to_json(g)}};
      return;
    }
    const DomainSpec& d = *config.domain;
    std::optional<Vec2> hint;
    if (d.interior_hint) hint = Vec2{(*d.interior_hint)[0], (*d.interior_hint)[1]};
    domain.emplace(make_curve(d), hint);
    cls = geom::classify_boundary(*domain, config.sampling.boundary, config.sampling.eps_neg);
    json g = {{"boundary", to_json(*cls)},
              {"area", num(domain->area())},
              {"reversed", domain->boundary().reversed()}};
    if (cls->has_negative_part()) {
      ext = geom::exterior_radius(*domain, *cls);
      geometry = criterion::GeometrySummary::euclidean(ext->r);
      g["exterior"] = to_json(*ext);
      g["summary"] = to_json(*geometry);
    }
    doc["geometry"] = g;
    rep.classification = *cls;
  });

  stage(1, {}, std::nullopt, [&] {
    if (abstract) {
      criterion::DataStats s;
      s.tau = config.abstract->tau;
      s.omega = config.abstract->omega;
      stats = s;
      doc["data"] = {{"tau", num(s.tau)}, {"omega", num(s.omega)}, {"source", "user"}};
      return;
    }
    phi = expr::Expr::parse(*config.phi, {"x", "y"});
    if (!domain) throw InternalError("no domain");
    criterion::StatsOptions so;
    so.density = config.sampling.data_density;
    so.hessian_norm = config.sampling.hessian_norm == "frobenius" ? criterion::HessianNorm::Frobenius
                                                                   : criterion::HessianNorm::Operator;
    stats = criterion::data_stats(*phi, *domain, so);
    doc["data"] = to_json(*stats);
  });

  stage(2, {"geometry", "stats"}, std::nullopt, [&] {
    criterion::VerdictOptions vo;
    vo.delta = config.delta;
    vo.js_l = config.js_l;
    if (abstract) {
      verdict = criterion::evaluate_conditions(*stats, *geometry, vo);
    } else {
      verdict = criterion::assemble_verdict(*domain, *cls, ext, *stats, vo);
    }
    if (verdict->constants) doc["constants"] = to_json(*verdict->constants);
    doc["verdict"] = to_json(*verdict);
  });

  std::optional<std::string> barrier_skip = no_geometry;
  if (!barrier_skip && cls && !cls->has_negative_part()) barrier_skip = "∂Ω⁻ = ∅";
  if (!barrier_skip && verdict && !verdict->constants) barrier_skip = "no criterion constants (constant data)";
  stage(3, {"criterion"}, barrier_skip, [&] {
    const criterion::CriterionConstants& k = *verdict->constants;
    const double delta = verdict->chosen_delta;
    barrier::BarrierOptions bo;
    bo.density = config.sampling.barrier_density;
    bo.sup_phi = stats->sup_phi;
    bo.inf_phi = stats->inf_phi;

    json certs = json::array();
    bool all_pass = true;
    for (std::size_t a = 0; a < cls->negative_arcs.size(); ++a) {
      const geom::NegativeArc& arc = cls->negative_arcs[a];
      const std::pair<const char*, double> where[] = {
          {"minimiser", arc.t_min}, {"arc start", arc.t_begin}, {"arc end", arc.t_end}};
      for (const auto& [role, t] : where) {
        const geom::ExteriorSphere sphere = geom::exterior_sphere_at(*domain, t, ext->r);
        const barrier::BarrierProfile prof = barrier::make_profile(k, delta, sphere);
        if (profiles.empty()) rep.profile = prof;
        profiles.push_back(prof);
        const auto up = barrier::verify_upper_barrier(*domain, *phi, prof, bo);
        const auto lo = barrier::verify_lower_barrier(*domain, *phi, prof, bo);
        all_pass = all_pass && up.pass && lo.pass;
        certs.push_back({{"arc", a}, {"role", role}, {"sphere", to_json(sphere)}, {"upper", to_json(up)},
                         {"lower", to_json(lo)}});
      }
    }
    const barrier::PsiProperties props = barrier::psi_properties(profiles.front(), stats->omega);
    doc["barrier"] = {{"delta", num(delta)},
                      {"psi_properties", to_json(props)},
                      {"certificates", certs},
                      {"pass", all_pass && props.pass}};
  });

  stage(4, {"geometry", "stats"}, no_geometry, [&] {
    const SolverSpec spec = config.solver.value_or(SolverSpec{});
    fem::SolveOptions so;
    so.grad_tol = spec.grad_tol;
    so.max_iterations = spec.max_iterations;
    json levels = json::array();
    json out;
    if (spec.richardson) {
      const fem::Richardson rich = fem::richardson(*domain, *phi, spec.n_radial, spec.n_angular, so);
      const double tols[3] = {0.0, rich.tol_mid, rich.tol_fine};
      for (int l = 0; l < 3; ++l) {
        const fem::Mesh m = fem::triangulate_star(*domain, rich.levels[l].n_radial, rich.levels[l].n_angular);
        json lj = level_json(m, rich.levels[l].result);
        if (l > 0)
          lj["check"] = to_json(fem::verify_solution(m, rich.levels[l].result.u, *phi, profiles, tols[l]));
        levels.push_back(lj);
        if (l == 2) {
          rep.mesh = m;
          rep.u = rich.levels[l].result.u;
        }
      }
      out["richardson"] = {{"diff_coarse", num(rich.diff_coarse)},
                           {"diff_fine", num(rich.diff_fine)},
                           {"ratio", num(rich.ratio)},
                           {"tol_mid", num(rich.tol_mid)},
                           {"tol_fine", num(rich.tol_fine)},
                           {"ratio_in_range", rich.ratio >= 3.0 && rich.ratio <= 5.0}};
    } else {
      const fem::Mesh m = fem::triangulate_star(*domain, spec.n_radial, spec.n_angular);
      const fem::SolveResult s = fem::solve(m, *phi, so);
      json lj = level_json(m, s);
      lj["check"] = to_json(fem::verify_solution(m, s.u, *phi, profiles, 0.0));
      levels.push_back(lj);
      rep.mesh = m;
      rep.u = s.u;
    }
    out["levels"] = levels;
    out["barrier_bracket"] = !profiles.empty();
    doc["solve"] = out;
  });

  json st = json::array();
  for (const auto& s : rep.stages) {
    json j = {{"name", s.name}, {"status", s.status}};
    if (!s.reason.empty()) j["reason"] = s.reason;
    if (!s.error_kind.empty()) j["error_kind"] = s.error_kind;
    st.push_back(j);
  }
  doc["stages"] = st;
  return rep;
}

}  // namespace minsurf
