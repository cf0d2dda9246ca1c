#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace tslab {

class BarSeries;

enum class LabelFamily {
  nbar_updown,
  nbar_change,
  nbar_logret,
  ma_updown,
  trend_strength,
  trend_direction,
  pctq,
  qclass,
  probe_condition,
};

enum class TrendMethod { regression, ma_fraction };

/// Within-slice relationships used by the learnability probe.
enum class ProbeCondition {
  close_above_close5,  ///< C[t] > C[t-5]
  close_above_ema5,    ///< C[t] > EMA5[t]
  close_above_hc10,    ///< C[t] > max(C[t-9 .. t-1])
};

struct QClassThresholds {
  double up_min = 0.6;
  double down_max = 0.4;
  /// Throws std::invalid_argument unless 0 < down_max < up_min < 1.
  void validate() const;
};

struct LabelParams {
  Eigen::Index ma_period = 0;
  QClassThresholds qclass;
  TrendMethod trend_method = TrendMethod::regression;
  double direction_threshold = 0.0;
  ProbeCondition condition = ProbeCondition::close_above_close5;
};

/// One label per slice. Classes are stored as exact small integers.
struct LabelVector {
  LabelFamily family = LabelFamily::nbar_updown;
  Eigen::Index horizon = 0;
  std::vector<Eigen::Index> end_indices;
  Eigen::VectorXd values;
  /// 0 for regression targets.
  int class_count = 0;
  LabelParams params;
  std::vector<std::string> warnings;

  Eigen::Index size() const { return values.size(); }
  bool is_classifier() const { return class_count > 0; }
  int class_of(Eigen::Index slice) const { return static_cast<int>(values[slice]); }
  std::vector<int> classes() const;
  /// Per-class counts; classifier families only.
  std::vector<Eigen::Index> histogram() const;
};

/// nbar_updown: 1 if C[t+n] > C[t]; nbar_change: C[t+n] - C[t];
/// nbar_logret: ln(C[t+n] / C[t]).
LabelVector label_nbar(const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                       Eigen::Index horizon, LabelFamily family);

/// 1 if SMA[t+n] > SMA[t] for an SMA of `ma_period`.
LabelVector label_ma(const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                     Eigen::Index horizon, Eigen::Index ma_period);

/// (HH - C[t]) / (HH - LL) over bars t+1..t+n, clamped to [0, 1]. A flat
/// window (HH == LL) yields 0.5 and a warning.
LabelVector label_pctq(const Eigen::Ref<const Eigen::VectorXd>& highs, const Eigen::Ref<const Eigen::VectorXd>& lows,
                       const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                       Eigen::Index horizon);

/// Uses the series' highs and lows, or its closes (with a warning) when the
/// source had no high/low columns.
LabelVector label_pctq(const BarSeries& series, const std::vector<Eigen::Index>& end_indices, Eigen::Index horizon);

/// 0 (up) if %Q >= up_min, 2 (down) if %Q <= down_max, else 1 (neutral).
LabelVector label_qclass(const LabelVector& pctq, const QClassThresholds& thresholds = {});

/// regression: OLS slope of C[t+1..t+n] against bar number, divided by C[t].
/// ma_fraction: share of C[t+1..t+n] strictly above SMA(ma_period).
/// The direction family is 1 when strength exceeds direction_threshold.
LabelVector label_trend(const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                        Eigen::Index horizon, TrendMethod method, LabelFamily family, Eigen::Index ma_period = 20,
                        std::optional<double> direction_threshold = std::nullopt);

/// Binary label for one probe condition at each slice end, from unscaled closes.
LabelVector label_probe_conditions(const Eigen::Ref<const Eigen::VectorXd>& closes,
                                   const std::vector<Eigen::Index>& end_indices, ProbeCondition condition);

const char* to_string(LabelFamily f);
const char* to_string(TrendMethod m);
const char* to_string(ProbeCondition c);
/// Throws std::invalid_argument for unknown names.
LabelFamily parse_label_family(const std::string& name);
TrendMethod parse_trend_method(const std::string& name);
ProbeCondition parse_probe_condition(const std::string& name);

}  // namespace tslab
