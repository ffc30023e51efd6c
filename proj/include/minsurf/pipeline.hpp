#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "minsurf/barrier.hpp"
#include "minsurf/config.hpp"
#include "minsurf/domain.hpp"
#include "minsurf/solver.hpp"

namespace minsurf {

/// CLI verbs; each one enables a prefix of the stage chain
/// geometry -> stats -> criterion -> barrier -> solve.
enum class Verb { Check, Barrier, Solve, Report };

std::optional<Verb> parse_verb(const std::string& s);
std::string to_string(Verb v);

struct StageStatus {
  std::string name;
  std::string status;  // ok | failed | skipped
  std::string reason;  // failure message or skip reason
  std::string error_kind;
  double seconds = 0.0;
};

/// Machine report plus the raw data behind the CSV bundle.
struct Report {
  Config config;
  Verb verb = Verb::Report;
  nlohmann::json doc;  // everything except timings
  std::vector<StageStatus> stages;

  std::optional<geom::BoundaryClassification> classification;
  std::optional<barrier::BarrierProfile> profile;
  std::optional<fem::Mesh> mesh;  // finest solved level
  std::vector<double> u;

  bool any_failed() const;
  const StageStatus* stage(const std::string& name) const;
};

/// Runs the enabled stages in order. Stage errors are recorded in the report;
/// stages depending on a failed or skipped stage are skipped with a reason.
Report run(const Config& config, Verb verb = Verb::Report);

}  // namespace minsurf
