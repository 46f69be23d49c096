#pragma once

#include <Eigen/Dense>

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "crossconf/data.hpp"

namespace crossconf {

/// Numeric table read from a CSV file with a header row.
struct CsvTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // rows x columns
};

/// Parses a header row plus numeric rows. Any column containing a
/// non-numeric cell is rejected with an InvalidData error naming it.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Dataset whose response is column `target` and whose features are all
/// other columns in file order.
struct LabeledDataset {
  Dataset data;
  std::vector<std::string> feature_names;
};

LabeledDataset dataset_from_table(const CsvTable& table, const std::string& target);

/// Query rows for a model trained on `feature_names`. Columns are matched by
/// name; an extra `target` column, if present, is returned separately.
struct QueryRows {
  Eigen::MatrixXd features;
  std::optional<Eigen::VectorXd> responses;
};

QueryRows query_from_table(const CsvTable& table, const std::vector<std::string>& feature_names,
                           const std::string& target);

}  // namespace crossconf
