#include "crossconf/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

constexpr const char* kColumns =
    "method,p,reps,coverage,mean_width,sd_width,median_width,min_width,max_width,n_infinite";

nlohmann::json number_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_csv(const AggregateReport& report, const ReportMetadata& meta) {
  std::ostringstream out;
  for (const auto& [key, value] : meta) out << "# " << key << '=' << value << '\n';
  out << "# failed_trials=" << report.failed_trials << '\n';
  out << kColumns << '\n';
  for (const AggregateRow& r : report.rows) {
    out << method_name(r.method) << ',' << r.p << ',' << r.reps << ',' << format_number(r.coverage) << ','
        << format_number(r.mean_width) << ',' << format_number(r.sd_width) << ',' << format_number(r.median_width)
        << ',' << format_number(r.min_width) << ',' << format_number(r.max_width) << ',' << r.n_infinite << '\n';
  }
  return out.str();
}

std::string format_json(const AggregateReport& report, const ReportMetadata& meta) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : meta) config[key] = value;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const AggregateRow& r : report.rows) {
    nlohmann::ordered_json row;
    row["method"] = method_name(r.method);
    row["p"] = r.p;
    row["reps"] = r.reps;
    row["coverage"] = number_json(r.coverage);
    row["mean_width"] = number_json(r.mean_width);
    row["sd_width"] = number_json(r.sd_width);
    row["median_width"] = number_json(r.median_width);
    row["min_width"] = number_json(r.min_width);
    row["max_width"] = number_json(r.max_width);
    row["n_infinite"] = r.n_infinite;
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["config"] = std::move(config);
  doc["failed_trials"] = report.failed_trials;
  doc["failures"] = report.failures;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidData("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw InvalidData("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidData("cannot rename onto " + path.string());
  }
}

}  // namespace crossconf
