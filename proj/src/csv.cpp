#include "crossconf/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crossconf/errors.hpp"

namespace crossconf {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cell.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  std::string line;
  CsvTable table;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InvalidData("CSV input is empty");
  table.columns = split_line(line);

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.columns.size()) {
      throw InvalidData("CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(table.columns.size()));
    }
    rows.push_back(std::move(cells));
  }

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto v = parse_number(rows[r][c]);
      if (!v) {
        throw InvalidData("column '" + table.columns[c] + "' is not numeric (row " +
                          std::to_string(r + 1) + ": '" + rows[r][c] + "')");
      }
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData("cannot open CSV file '" + path + "'");
  return read_csv(in);
}

LabeledDataset dataset_from_table(const CsvTable& table, const std::string& target) {
  auto it = std::find(table.columns.begin(), table.columns.end(), target);
  if (it == table.columns.end()) {
    throw InvalidData("target column '" + target + "' not found");
  }
  const auto target_col = static_cast<Eigen::Index>(it - table.columns.begin());
  std::vector<std::string> names;
  std::vector<Eigen::Index> cols;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (static_cast<Eigen::Index>(c) == target_col) continue;
    names.push_back(table.columns[c]);
    cols.push_back(static_cast<Eigen::Index>(c));
  }
  if (cols.empty()) throw InvalidData("CSV has no feature columns besides the target");
  Eigen::MatrixXd x(table.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = table.values.col(cols[j]);
  Eigen::VectorXd y = table.values.col(target_col);
  return LabeledDataset{Dataset(std::move(x), std::move(y)), std::move(names)};
}

QueryRows query_from_table(const CsvTable& table, const std::vector<std::string>& feature_names,
                           const std::string& target) {
  QueryRows out;
  out.features.resize(table.values.rows(), static_cast<Eigen::Index>(feature_names.size()));
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    auto it = std::find(table.columns.begin(), table.columns.end(), feature_names[j]);
    if (it == table.columns.end()) {
      throw InvalidData("query is missing feature column '" + feature_names[j] + "'");
    }
    out.features.col(static_cast<Eigen::Index>(j)) =
        table.values.col(static_cast<Eigen::Index>(it - table.columns.begin()));
  }
  const std::size_t expected = feature_names.size();
  auto t = std::find(table.columns.begin(), table.columns.end(), target);
  const std::size_t extra = table.columns.size() - expected - (t != table.columns.end() ? 1 : 0);
  if (extra != 0) {
    throw InvalidData("query has " + std::to_string(table.columns.size()) +
                      " columns but the model expects " + std::to_string(expected) + " features");
  }
  if (t != table.columns.end()) {
    out.responses = table.values.col(static_cast<Eigen::Index>(t - table.columns.begin()));
  }
  return out;
}

}  // namespace crossconf
