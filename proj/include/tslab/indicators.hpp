#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace tslab {

/// How an indicator channel must be scaled alongside prices.
enum class Taxonomy { overlaid, bounded, separate };

/// Warm-up entries are NaN.
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool is_defined(double v) { return !std::isnan(v); }

struct IndicatorSeries {
  std::string name;
  Eigen::VectorXd values;
  Taxonomy taxonomy = Taxonomy::overlaid;
  std::optional<double> bound_max;

  /// Index of the first defined value, or values.size() if none.
  Eigen::Index first_defined() const;
};

IndicatorSeries sma(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period);

/// Seeded by the SMA of the first `period` values, then
/// ema[t] = a * close[t] + (1 - a) * ema[t-1] with a = 2 / (period + 1).
IndicatorSeries ema(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period);

/// Window [t - period + 1, t], current bar included.
IndicatorSeries rolling_max(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period);
IndicatorSeries rolling_min(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period);

/// Wilder RSI in [0, 100]; first defined value at index `period`.
/// A window with neither gains nor losses reads 50.
IndicatorSeries rsi(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period);

/// Dispatch by name ("sma", "ema", "max", "min", "rsi"). The result is named
/// `<name><period>`, e.g. "ema5".
IndicatorSeries compute_indicator(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& closes,
                                  Eigen::Index period);

const char* to_string(Taxonomy t);

}  // namespace tslab
