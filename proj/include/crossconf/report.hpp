#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "crossconf/experiments.hpp"

namespace crossconf {

/// Resolved run configuration, echoed into every report header in order.
using ReportMetadata = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

/// `# key=value` header lines, then
/// method,p,reps,coverage,mean_width,sd_width,median_width,min_width,max_width,n_infinite
std::string format_csv(const AggregateReport& report, const ReportMetadata& meta);

/// {"config": {...}, "failed_trials": n, "rows": [...]} with the CSV keys; NaN widths become null.
std::string format_json(const AggregateReport& report, const ReportMetadata& meta);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace crossconf
