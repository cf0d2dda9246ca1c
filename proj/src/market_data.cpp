#include "tslab/market_data.hpp"

#include "tslab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tslab {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string row_error(std::size_t row, const std::string& what) {
  return "row " + std::to_string(row) + ": " + what;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  int y = 0, m = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' || !read_int(text, 5, 2, m) ||
      text[7] != '-' || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  std::string_view rest = text.substr(10);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
    if (!read_int(rest, 1, 2, hh) || rest.size() < 6 || rest[3] != ':' || !read_int(rest, 4, 2, mm)) {
      return std::nullopt;
    }
    if (rest.size() > 6) {
      if (rest.size() != 9 || rest[6] != ':' || !read_int(rest, 7, 2, ss)) return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
         std::chrono::seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd{day};
  const auto secs = (ts - day).count();
  char buf[64];
  if (secs == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60));
  }
  return buf;
}

BarSeries::BarSeries(std::string symbol, std::vector<Bar> bars, FieldPresence fields)
    : symbol_(std::move(symbol)), bars_(std::move(bars)), fields_(fields) {
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    const Bar& b = bars_[i];
    if (!(b.open > 0.0 && b.high > 0.0 && b.low > 0.0 && b.close > 0.0)) {
      throw DataError("bar " + std::to_string(i) + ": non-positive price");
    }
    if (b.high < b.low || b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close)) {
      throw DataError("bar " + std::to_string(i) + ": high/low inconsistent with open/close");
    }
    if (b.volume && !(*b.volume >= 0.0)) {
      throw DataError("bar " + std::to_string(i) + ": negative volume");
    }
    if (i > 0 && !(bars_[i - 1].timestamp < b.timestamp)) {
      throw DataError("bar " + std::to_string(i) + ": timestamps not strictly increasing");
    }
  }
}

namespace {

template <typename Field>
Eigen::VectorXd extract(const std::vector<Bar>& bars, Field field) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(bars.size()));
  for (std::size_t i = 0; i < bars.size(); ++i) out[static_cast<Eigen::Index>(i)] = field(bars[i]);
  return out;
}

}  // namespace

Eigen::VectorXd BarSeries::opens() const { return extract(bars_, [](const Bar& b) { return b.open; }); }
Eigen::VectorXd BarSeries::highs() const { return extract(bars_, [](const Bar& b) { return b.high; }); }
Eigen::VectorXd BarSeries::lows() const { return extract(bars_, [](const Bar& b) { return b.low; }); }
Eigen::VectorXd BarSeries::closes() const { return extract(bars_, [](const Bar& b) { return b.close; }); }

bool BarSeries::has_complete_volume() const {
  return std::all_of(bars_.begin(), bars_.end(), [](const Bar& b) { return b.volume.has_value(); });
}

Eigen::VectorXd BarSeries::volumes() const {
  if (!has_complete_volume()) throw DataError("series " + symbol_ + " has missing volume");
  return extract(bars_, [](const Bar& b) { return *b.volume; });
}

BarSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (schema.timestamp.empty() || schema.close.empty()) {
    throw DataError("schema must name the timestamp and close columns");
  }

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_fields(line, schema.delimiter);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto ts_col = column(schema.timestamp);
  const auto close_col = column(schema.close);
  if (!ts_col) throw DataError("header lacks timestamp column '" + schema.timestamp + "'");
  if (!close_col) throw DataError("header lacks close column '" + schema.close + "'");
  const auto open_col = column(schema.open);
  const auto high_col = column(schema.high);
  const auto low_col = column(schema.low);
  const auto vol_col = column(schema.volume);
  if (high_col.has_value() != low_col.has_value()) {
    throw DataError("high and low columns must be present together");
  }

  struct Row {
    Bar bar;
    std::size_t number;
  };
  std::vector<Row> rows;
  std::vector<std::string> violations;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    const auto fields = split_fields(line, schema.delimiter);
    if (fields.size() < header.size()) {
      throw DataError(row_error(row_number, "expected " + std::to_string(header.size()) + " fields, got " +
                                                std::to_string(fields.size())));
    }
    Bar bar;
    const auto ts = parse_timestamp(fields[*ts_col]);
    if (!ts) throw DataError(row_error(row_number, "unparseable timestamp '" + std::string(fields[*ts_col]) + "'"));
    bar.timestamp = *ts;
    auto number = [&](std::size_t col, const std::string& name) {
      const auto v = parse_number(fields[col]);
      if (!v) throw DataError(row_error(row_number, "unparseable " + name + " '" + std::string(fields[col]) + "'"));
      return *v;
    };
    bar.close = number(*close_col, "close");
    bar.open = open_col ? number(*open_col, "open") : bar.close;
    bar.high = high_col ? number(*high_col, "high") : std::max(bar.open, bar.close);
    bar.low = low_col ? number(*low_col, "low") : std::min(bar.open, bar.close);
    if (vol_col && !fields[*vol_col].empty()) bar.volume = number(*vol_col, "volume");

    if (!(bar.open > 0.0 && bar.high > 0.0 && bar.low > 0.0 && bar.close > 0.0)) {
      violations.push_back(row_error(row_number, "non-positive price"));
    } else if (bar.high < bar.low) {
      violations.push_back(row_error(row_number, "high < low"));
    } else if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close)) {
      violations.push_back(row_error(row_number, "open/close outside [low, high]"));
    } else if (bar.volume && *bar.volume < 0.0) {
      violations.push_back(row_error(row_number, "negative volume"));
    }
    rows.push_back({bar, row_number});
  }
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": invalid bars:";
    for (const auto& v : violations) msg << "\n  " << v;
    throw DataError(msg.str());
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.bar.timestamp < b.bar.timestamp; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].bar.timestamp == rows[i - 1].bar.timestamp) {
      throw DataError("duplicate timestamp " + format_timestamp(rows[i].bar.timestamp) + " on rows " +
                      std::to_string(std::min(rows[i - 1].number, rows[i].number)) + " and " +
                      std::to_string(std::max(rows[i - 1].number, rows[i].number)));
    }
  }

  std::vector<Bar> bars;
  bars.reserve(rows.size());
  for (auto& r : rows) bars.push_back(r.bar);
  FieldPresence presence{open_col.has_value(), high_col.has_value(), vol_col.has_value()};
  std::string symbol = schema.symbol.empty() ? path.stem().string() : schema.symbol;
  return BarSeries(std::move(symbol), std::move(bars), presence);
}

ReturnSeries to_returns(const Eigen::Ref<const Eigen::VectorXd>& closes, ReturnKind kind) {
  if (closes.size() < 2) throw DataError("returns need at least 2 prices");
  const Eigen::Index n = closes.size() - 1;
  const auto ratio = closes.tail(n).array() / closes.head(n).array();
  ReturnSeries out;
  out.kind = kind;
  out.values = kind == ReturnKind::simple ? Eigen::VectorXd(ratio - 1.0) : Eigen::VectorXd(ratio.log());
  return out;
}

ReturnSeries to_returns(const BarSeries& series, ReturnKind kind) { return to_returns(series.closes(), kind); }

Eigen::VectorXd close_vector(const BarSeries& series) { return series.closes(); }

}  // namespace tslab
