#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace minsurf {

enum class Mode { Euclidean2D, Abstract };

struct DomainSpec {
  // exactly one of `radial` or the (x, y) pair
  std::optional<std::string> radial;
  std::optional<std::string> x;
  std::optional<std::string> y;
  // number, or an expression without variables such as "2*pi"
  std::string period = "2*pi";
  std::optional<std::vector<double>> interior_hint;

  bool operator==(const DomainSpec&) const = default;
};

/// User-supplied geometry and data constants for abstract mode.
struct AbstractSpec {
  int n = 2;
  double lambda_r = 0.0;
  double mu_r = 0.0;
  double R = 0.0;  // may be +inf ("inf" in JSON)
  double r = 0.0;
  double tau = 0.0;
  double omega = 0.0;

  bool operator==(const AbstractSpec&) const = default;
};

struct SamplingSpec {
  std::size_t boundary = 1024;
  std::size_t data_density = 4096;
  std::size_t barrier_density = 10000;
  double eps_neg = 1e-8;
  std::string hessian_norm = "operator";  // or "frobenius"

  bool operator==(const SamplingSpec&) const = default;
};

struct SolverSpec {
  int n_radial = 16;
  int n_angular = 64;
  bool richardson = true;  // also solve on 2x and 4x refinements
  double grad_tol = 1e-10;
  int max_iterations = 200;

  bool operator==(const SolverSpec&) const = default;
};

struct OutputSpec {
  std::optional<std::string> dir;
  std::string format = "text";  // json | text | csv-bundle
  std::size_t psi_grid = 200;
  bool timings = true;

  bool operator==(const OutputSpec&) const = default;
};

struct Config {
  Mode mode = Mode::Euclidean2D;
  std::optional<DomainSpec> domain;
  std::optional<std::string> phi;
  std::optional<AbstractSpec> abstract;
  SamplingSpec sampling;
  std::optional<double> delta;
  std::optional<double> js_l;
  std::optional<SolverSpec> solver;
  OutputSpec output;
  std::uint64_t seed = 0;

  bool operator==(const Config&) const = default;
};

/// Throws ParseError (malformed JSON) or ValidationError.
Config load_config(const std::filesystem::path& path);
Config config_from_json(const nlohmann::json& j);
/// Full form with every default filled in; config_from_json inverts it.
nlohmann::json config_to_json(const Config& c);

/// Checks the cross-field rules (exactly one domain form, abstract mode
/// without solver, expressions parse). Throws ValidationError.
void validate(const Config& c);

std::string to_string(Mode m);

}  // namespace minsurf
