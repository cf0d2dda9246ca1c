#pragma once

#include <Eigen/Core>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tslab {

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS]` or `YYYY-MM-DD HH:MM[:SS]`.
/// A trailing `Z` is accepted. Returns nullopt on malformed input.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// ISO-8601 rendering; date-only when the time of day is midnight.
std::string format_timestamp(Timestamp ts);

struct Bar {
  Timestamp timestamp;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  std::optional<double> volume;
};

/// Which optional OHLCV fields the source actually carried. Absent price
/// fields are filled with the close so bar invariants still hold; absent
/// volume stays empty.
struct FieldPresence {
  bool open = true;
  bool high_low = true;
  bool volume = true;
};

/// Ordered, validated OHLCV history of one instrument. Immutable.
class BarSeries {
 public:
  /// Throws DataError on any invariant violation: non-positive prices,
  /// high/low inconsistent with open/close, non-increasing timestamps.
  BarSeries(std::string symbol, std::vector<Bar> bars, FieldPresence fields = {});

  const std::string& symbol() const { return symbol_; }
  const std::vector<Bar>& bars() const { return bars_; }
  const FieldPresence& fields() const { return fields_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(bars_.size()); }
  const Bar& operator[](Eigen::Index i) const { return bars_[static_cast<std::size_t>(i)]; }

  Eigen::VectorXd opens() const;
  Eigen::VectorXd highs() const;
  Eigen::VectorXd lows() const;
  Eigen::VectorXd closes() const;
  /// Throws DataError if any bar lacks volume.
  Eigen::VectorXd volumes() const;
  bool has_complete_volume() const;

 private:
  std::string symbol_;
  std::vector<Bar> bars_;
  FieldPresence fields_;
};

/// Empty column names mark the field as not present in the file.
struct CsvSchema {
  std::string timestamp = "date";
  std::string open = "open";
  std::string high = "high";
  std::string low = "low";
  std::string close = "close";
  std::string volume = "volume";
  char delimiter = ',';
  /// Defaults to the file stem when empty.
  std::string symbol;
};

/// Reads and validates a CSV with a header row. Optional columns named in the
/// schema but missing from the header are treated as absent. Rows are sorted
/// by timestamp; duplicates and invalid bars abort with their data-row
/// numbers (1-based, header excluded).
BarSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

enum class ReturnKind { simple, log };

struct ReturnSeries {
  Eigen::VectorXd values;
  ReturnKind kind = ReturnKind::simple;
};

ReturnSeries to_returns(const BarSeries& series, ReturnKind kind);
ReturnSeries to_returns(const Eigen::Ref<const Eigen::VectorXd>& closes, ReturnKind kind);

Eigen::VectorXd close_vector(const BarSeries& series);

}  // namespace tslab
