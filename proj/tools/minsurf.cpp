// minsurf: solvability check, barrier certification and minimal-graph solve
// for the Dirichlet problem on a planar domain.
//
//   minsurf check   --config example.json
//   minsurf report  --config example.json --out results/
//
// Exit status: 0 ran to completion, 1 configuration error, 2 stage error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "minsurf/config.hpp"
#include "minsurf/errors.hpp"
#include "minsurf/parallel.hpp"
#include "minsurf/pipeline.hpp"
#include "minsurf/report.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Minimal graphs over non-mean-convex planar domains"};
  app.require_subcommand(1);

  std::string config_path, out, format;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool normalize = false;

  const std::pair<const char*, const char*> verbs[] = {
      {"check", "geometry, data statistics and the solvability conditions"},
      {"barrier", "check, then certify the upper and lower barriers"},
      {"solve", "barrier, then solve on the polar mesh"},
      {"report", "every stage, written in all formats"},
  };
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output file, or directory for csv-bundle and report");
    sub->add_option("--format", format, "json, text or csv-bundle")
        ->check(CLI::IsMember({"json", "text", "csv-bundle"}));
    sub->add_option("--delta", delta, "use this delta instead of the optimal one");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "echoed into the report");
    sub->add_flag("--normalize", normalize, "leave timings out of the JSON report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const minsurf::Verb verb = *minsurf::parse_verb(app.get_subcommands().front()->get_name());

  minsurf::Config config;
  try {
    config = minsurf::load_config(config_path);
    if (delta) config.delta = *delta;
    if (seed) config.seed = *seed;
    if (!format.empty()) config.output.format = format;
    if (normalize) config.output.timings = false;
    minsurf::validate(config);
  } catch (const minsurf::Error& e) {
    std::cerr << "minsurf: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  }

  minsurf::set_thread_count(threads);
  const minsurf::Report report = minsurf::run(config, verb);

  try {
    fs::path target = out;
    if (target.empty() && config.output.dir) target = *config.output.dir;
    if (verb == minsurf::Verb::Report) {
      if (target.empty()) {
        minsurf::export_report(report, minsurf::Format::Text, {}, normalize);
      } else {
        minsurf::export_report(report, minsurf::Format::Json, target / "report.json", normalize);
        minsurf::export_report(report, minsurf::Format::Text, target / "report.txt", normalize);
        minsurf::export_report(report, minsurf::Format::CsvBundle, target / "csv", normalize);
      }
    } else {
      const minsurf::Format f = *minsurf::parse_format(config.output.format);
      if (f != minsurf::Format::CsvBundle && !out.empty()) {
        minsurf::export_report(report, f, target, normalize);
      } else if (f != minsurf::Format::CsvBundle && !target.empty()) {
        minsurf::export_report(report, f, target / (f == minsurf::Format::Json ? "report.json" : "report.txt"),
                               normalize);
      } else {
        minsurf::export_report(report, f, target, normalize);
      }
    }
  } catch (const minsurf::Error& e) {
    std::cerr << "minsurf: " << e.kind() << ": " << e.what() << "\n";
    return 2;
  }

  for (const auto& s : report.stages)
    if (s.status == "failed") std::cerr << "minsurf: stage " << s.name << " failed: " << s.reason << "\n";
  return report.any_failed() ? 2 : 0;
}
