#pragma once

#include <string>
#include <vector>

#include "rpf/types.hpp"

namespace rpf {

// Input-file problem with position info; the CLI maps this to exit code 2.
struct CsvError : std::runtime_error {
  CsvError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // one row per data line
};

// Strict numeric CSV with a header line.
NumericTable read_numeric_csv(const std::string& path);

// Requires exactly one column named "y"; the remaining columns become
// predictors in file order.
Dataset read_dataset_csv(const std::string& path);

// Predictor-only view: drops a "y" column when present, keeps column order.
struct PredictorTable {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
};
PredictorTable read_predictors_csv(const std::string& path);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace rpf
