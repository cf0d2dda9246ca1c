#include "tslab/error.hpp"
#include "tslab/market_data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace tslab;

namespace {

const std::filesystem::path kData = TSLAB_TEST_DATA_DIR;

std::string error_of(const std::filesystem::path& p) {
  try {
    load_csv(p);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(LoadCsv, ThreeRows) {
  const BarSeries s = load_csv(kData / "three_rows.csv");
  ASSERT_EQ(s.size(), 3);
  EXPECT_DOUBLE_EQ(s[0].close, 100.5);
  EXPECT_DOUBLE_EQ(s[2].high, 103.0);
  EXPECT_EQ(*s[1].volume, 1200.0);
  EXPECT_EQ(format_timestamp(s[0].timestamp), "2020-01-02");
  EXPECT_TRUE(s.has_complete_volume());
}

TEST(LoadCsv, HighBelowLowNamesRow) {
  const std::string msg = error_of(kData / "high_below_low.csv");
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
}

TEST(LoadCsv, ShuffledRowsAreSorted) {
  const BarSeries s = load_csv(kData / "shuffled.csv");
  std::vector<double> closes;
  for (const auto& b : s.bars()) closes.push_back(b.close);
  // External oracle: sort the file's rows by their ISO date text.
  std::vector<std::pair<std::string, double>> rows = {
      {"2020-01-06", 102}, {"2020-01-02", 100.5}, {"2020-01-07", 103}, {"2020-01-03", 101.5}};
  std::sort(rows.begin(), rows.end());
  ASSERT_EQ(closes.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(closes[i], rows[i].second);
  for (std::size_t i = 1; i < s.bars().size(); ++i) EXPECT_LT(s[i - 1].timestamp, s[i].timestamp);
}

TEST(LoadCsv, CloseOnlyFillsPrices) {
  const BarSeries s = load_csv(kData / "close_only.csv");
  EXPECT_FALSE(s.fields().open);
  EXPECT_FALSE(s.fields().high_low);
  EXPECT_FALSE(s.has_complete_volume());
  EXPECT_THROW(s.volumes(), DataError);
  EXPECT_EQ(s.highs(), s.closes());
}

TEST(LoadCsv, DuplicateTimestampRejected) {
  const auto p = write_temp("tslab_dup.csv", "date,close\n2020-01-02,1\n2020-01-02,2\n");
  EXPECT_THROW(load_csv(p), DataError);
}

TEST(LoadCsv, CollectsEveryBadRow) {
  const auto p = write_temp("tslab_bad.csv", "date,high,low,close\n2020-01-02,1,1,1\n2020-01-03,1,1,-1\n2020-01-04,1,2,1.5\n");
  const std::string msg = error_of(p);
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
}

TEST(LoadCsv, CustomSchema) {
  const auto p = write_temp("tslab_schema.csv", "Day;Px\n2020-01-02;5\n2020-01-03;6\n");
  CsvSchema schema;
  schema.timestamp = "Day";
  schema.close = "Px";
  schema.delimiter = ';';
  schema.symbol = "XYZ";
  const BarSeries s = load_csv(p, schema);
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.symbol(), "XYZ");
  EXPECT_DOUBLE_EQ(s[1].close, 6.0);
}

TEST(LoadCsv, Deterministic) {
  const BarSeries a = load_csv(kData / "ohlcv_500.csv");
  const BarSeries b = load_csv(kData / "ohlcv_500.csv");
  EXPECT_EQ(a.closes(), b.closes());
  EXPECT_EQ(a.volumes(), b.volumes());
}

TEST(LoadCsv, UnparseableNumber) {
  const auto p = write_temp("tslab_nan.csv", "date,close\n2020-01-02,1\n2020-01-03,abc\n");
  EXPECT_NE(error_of(p).find("row 2"), std::string::npos);
}

TEST(LoadCsv, MissingFile) { EXPECT_THROW(load_csv(kData / "nope.csv"), DataError); }

TEST(Timestamp, ParsesDateAndDateTime) {
  const auto d = parse_timestamp("2020-02-29");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_timestamp(*d), "2020-02-29");
  const auto dt = parse_timestamp("2020-02-29T13:05:09");
  ASSERT_TRUE(dt);
  EXPECT_EQ(format_timestamp(*dt), "2020-02-29T13:05:09");
  EXPECT_FALSE(parse_timestamp("2020-13-01"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}

TEST(Returns, Simple) {
  Eigen::VectorXd c(3);
  c << 100, 110, 99;
  const auto r = to_returns(c, ReturnKind::simple);
  ASSERT_EQ(r.values.size(), 2);
  EXPECT_NEAR(r.values[0], 0.10, 1e-15);
  EXPECT_NEAR(r.values[1], -0.10, 1e-15);
}

TEST(Returns, Constant) {
  const auto r = to_returns(Eigen::VectorXd::Constant(3, 100.0), ReturnKind::simple);
  EXPECT_EQ(r.values, Eigen::VectorXd::Zero(2));
}

TEST(Returns, Log) {
  Eigen::VectorXd c(2);
  c << 100, 110;
  const auto r = to_returns(c, ReturnKind::log);
  EXPECT_NEAR(r.values[0], std::log(1.1), 1e-15);
  EXPECT_NEAR(r.values[0], 0.09531, 1e-5);
}

TEST(Returns, TooShort) { EXPECT_THROW(to_returns(Eigen::VectorXd::Ones(1), ReturnKind::log), DataError); }

TEST(CloseVector, PreservesValuesAndLength) {
  const BarSeries s = load_csv(kData / "ohlcv_500.csv");
  const Eigen::VectorXd c = close_vector(s);
  ASSERT_EQ(c.size(), 500);
  for (Eigen::Index i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], s[i].close);
}
