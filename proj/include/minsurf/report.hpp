#pragma once

#include <filesystem>
#include <string>

#include "minsurf/pipeline.hpp"

namespace minsurf {

enum class Format { Json, Text, CsvBundle };

std::optional<Format> parse_format(const std::string& s);

/// Full machine report. Timings are left out when `normalize` is set, so two
/// runs of the same config compare byte for byte.
std::string render_json(const Report& r, bool normalize = false);

/// Human summary in the order of the worked example: geometry, data,
/// constants, conditions, verdict, then barrier and solver results.
std::string render_text(const Report& r);

/// boundary.csv (t, x, y, kappa), psi.csv, and solution.csv / triangles.csv
/// when the solver ran. Throws IoError.
void write_csv_bundle(const Report& r, const std::filesystem::path& dir);

/// Writes one format; json and text go to `out` as a file, or to stdout when
/// `out` is empty. csv-bundle needs a directory.
void export_report(const Report& r, Format f, const std::filesystem::path& out, bool normalize = false);

}  // namespace minsurf
