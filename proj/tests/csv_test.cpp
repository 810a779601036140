#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "rpf/csv.hpp"
#include "rpf/rng.hpp"

using namespace rpf;

namespace {

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("numeric csv parses header and values") {
  TempFile f("csv_basic.csv",
             "a, b ,y\n"
             "1,2.5,3\n"
             "\n"                       // blank lines are skipped
             "-4,5e-1,6.25\n");
  const NumericTable t = read_numeric_csv(f.path);
  REQUIRE(t.header.size() == 3);
  CHECK(t.header[0] == "a");
  CHECK(t.header[1] == "b");  // padding around names is trimmed
  CHECK(t.values.rows() == 2);
  CHECK(t.values(0, 1) == 2.5);
  CHECK(t.values(1, 0) == -4.0);
  CHECK(t.values(1, 1) == 0.5);
}

TEST_CASE("dataset reader wants exactly one y column") {
  TempFile ok("csv_ok.csv", "x1,y,x2\n0.1,7,0.2\n0.3,8,0.4\n");
  const Dataset d = read_dataset_csv(ok.path);
  CHECK(d.n() == 2);
  CHECK(d.d() == 2);
  CHECK(d.y(0) == 7.0);
  CHECK(d.y(1) == 8.0);
  CHECK(d.x(0, 0) == 0.1);
  CHECK(d.x(1, 1) == 0.4);   // predictor order follows the file
  REQUIRE(d.feature_names.size() == 2);
  CHECK(d.feature_names[0] == "x1");
  CHECK(d.feature_names[1] == "x2");

  TempFile missing("csv_missing_y.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(missing.path), CsvError);

  TempFile twice("csv_two_y.csv", "y,a,y\n1,2,3\n");
  CHECK_THROWS_AS(read_dataset_csv(twice.path), CsvError);

  TempFile only_y("csv_only_y.csv", "y\n1\n2\n");
  CHECK_THROWS_AS(read_dataset_csv(only_y.path), CsvError);

  TempFile no_rows("csv_no_rows.csv", "x1,y\n");
  CHECK_THROWS_AS(read_dataset_csv(no_rows.path), CsvError);
}

TEST_CASE("malformed csv is reported with the offending line") {
  TempFile ragged("csv_ragged.csv", "a,y\n1,2\n3,4,5\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(ragged.path),
                       "csv_ragged.csv:3: expected 2 columns, got 3", CsvError);

  TempFile text("csv_text.csv", "a,y\n1,two\n");
  CHECK_THROWS_AS(read_numeric_csv(text.path), CsvError);

  TempFile trailing("csv_trailing.csv", "a,y\n1,2.5x\n");
  CHECK_THROWS_AS(read_numeric_csv(trailing.path), CsvError);

  TempFile nan_cell("csv_nan.csv", "a,y\n1,nan\n");
  CHECK_THROWS_AS(read_numeric_csv(nan_cell.path), CsvError);

  TempFile inf_cell("csv_inf.csv", "a,y\ninf,2\n");
  CHECK_THROWS_AS(read_numeric_csv(inf_cell.path), CsvError);

  TempFile empty("csv_empty.csv", "");
  CHECK_THROWS_AS(read_numeric_csv(empty.path), CsvError);

  CHECK_THROWS_AS(read_numeric_csv("csv_does_not_exist.csv"), CsvError);
}

TEST_CASE("predictor view drops the response column") {
  TempFile f("csv_pred.csv", "x1,y,x2\n0.1,7,0.2\n");
  const PredictorTable t = read_predictors_csv(f.path);
  CHECK(t.x.rows() == 1);
  CHECK(t.x.cols() == 2);
  CHECK(t.x(0, 0) == 0.1);
  CHECK(t.x(0, 1) == 0.2);
  REQUIRE(t.names.size() == 2);
  CHECK(t.names[0] == "x1");
  CHECK(t.names[1] == "x2");

  TempFile g("csv_pred_no_y.csv", "x1,x2\n0.1,0.2\n");
  CHECK(read_predictors_csv(g.path).x.cols() == 2);
}

TEST_CASE("write then read gives back the same numbers") {
  Rng rng(3);
  std::vector<std::vector<std::string>> rows;
  Eigen::MatrixXd values(50, 2);
  for (int i = 0; i < 50; ++i) {
    values(i, 0) = (rng.uniform01() - 0.5) * std::pow(10.0, double(i % 20) - 10.0);
    values(i, 1) = rng.normal();
    rows.push_back({format_double(values(i, 0)), format_double(values(i, 1))});
  }
  TempFile guard("csv_roundtrip.csv", "");
  write_csv(guard.path, {"a", "y"}, rows);
  const NumericTable t = read_numeric_csv(guard.path);
  REQUIRE(t.values.rows() == 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(t.values(i, 0) == values(i, 0));
    CHECK(t.values(i, 1) == values(i, 1));
  }
}

TEST_CASE("doubles format to the shortest exact form") {
  for (const double v : {0.1, 1.0 / 3.0, 6.02e23, -7.25, 0.0,
                         std::numeric_limits<double>::denorm_min(),
                         std::numeric_limits<double>::max()}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}
