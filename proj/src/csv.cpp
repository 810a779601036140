#include "rpf/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rpf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

NumericTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw CsvError(path, 0, "empty file");
  NumericTable table;
  for (const std::string& cell : split_line(line)) table.header.push_back(trim(cell));
  if (table.header.empty()) throw CsvError(path, 1, "empty header");

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.header.size())
      throw CsvError(path, lineno,
                     "expected " + std::to_string(table.header.size()) + " columns, got " +
                         std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      std::size_t used = 0;
      try {
        row[c] = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw CsvError(path, lineno, "not a number: '" + cell + "'");
      }
      if (used != cell.size()) throw CsvError(path, lineno, "not a number: '" + cell + "'");
      if (!std::isfinite(row[c])) throw CsvError(path, lineno, "non-finite value");
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(rows.size(), table.header.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) table.values(r, c) = rows[r][c];
  return table;
}

Dataset read_dataset_csv(const std::string& path) {
  const NumericTable table = read_numeric_csv(path);
  int y_col = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "y") {
      if (y_col >= 0) throw CsvError(path, 1, "multiple y columns");
      y_col = static_cast<int>(c);
    }
  }
  if (y_col < 0) throw CsvError(path, 1, "no column named y");
  if (table.header.size() < 2) throw CsvError(path, 1, "no predictor columns");

  Dataset data;
  const Eigen::Index d = table.values.cols() - 1;
  data.y = table.values.col(y_col);
  data.x.resize(table.values.rows(), d);
  Eigen::Index out = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c == y_col) continue;
    data.x.col(out) = table.values.col(c);
    data.feature_names.push_back(table.header[c]);
    ++out;
  }
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw CsvError(path, 0, e.what());
  }
  return data;
}

PredictorTable read_predictors_csv(const std::string& path) {
  const NumericTable table = read_numeric_csv(path);
  PredictorTable out;
  int y_col = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "y") {
      y_col = static_cast<int>(c);
      break;
    }
  }
  const Eigen::Index d = table.values.cols() - (y_col >= 0 ? 1 : 0);
  out.x.resize(table.values.rows(), d);
  Eigen::Index col = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c == y_col) continue;
    out.x.col(col) = table.values.col(c);
    out.names.push_back(table.header[c]);
    ++col;
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
}

}  // namespace rpf
