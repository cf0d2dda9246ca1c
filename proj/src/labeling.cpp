#include "tslab/labeling.hpp"

#include "tslab/indicators.hpp"
#include "tslab/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tslab {

namespace {

void check_future(Eigen::Index length, const std::vector<Eigen::Index>& ends, Eigen::Index horizon) {
  if (horizon < 1) throw std::invalid_argument("label horizon must be at least 1");
  for (const Eigen::Index t : ends) {
    if (t < 0 || t + horizon >= length) {
      throw std::invalid_argument("label horizon " + std::to_string(horizon) + " at end index " + std::to_string(t) +
                                  " exceeds the reserved future window");
    }
  }
}

LabelVector make(LabelFamily family, Eigen::Index horizon, const std::vector<Eigen::Index>& ends, int classes) {
  LabelVector out;
  out.family = family;
  out.horizon = horizon;
  out.end_indices = ends;
  out.values.resize(static_cast<Eigen::Index>(ends.size()));
  out.class_count = classes;
  return out;
}

double binary(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

void QClassThresholds::validate() const {
  if (!(0.0 < down_max && down_max < up_min && up_min < 1.0)) {
    throw std::invalid_argument("qclass thresholds must satisfy 0 < down_max < up_min < 1");
  }
}

std::vector<int> LabelVector::classes() const {
  std::vector<int> out(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) out[static_cast<std::size_t>(i)] = class_of(i);
  return out;
}

std::vector<Eigen::Index> LabelVector::histogram() const {
  if (!is_classifier()) throw std::invalid_argument("histogram needs classifier labels");
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(class_count), 0);
  for (Eigen::Index i = 0; i < values.size(); ++i) ++counts[static_cast<std::size_t>(class_of(i))];
  return counts;
}

LabelVector label_nbar(const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                       Eigen::Index horizon, LabelFamily family) {
  check_future(closes.size(), end_indices, horizon);
  const bool classifier = family == LabelFamily::nbar_updown;
  if (!classifier && family != LabelFamily::nbar_change && family != LabelFamily::nbar_logret) {
    throw std::invalid_argument("label_nbar: unsupported family");
  }
  LabelVector out = make(family, horizon, end_indices, classifier ? 2 : 0);
  for (std::size_t k = 0; k < end_indices.size(); ++k) {
    const double now = closes[end_indices[k]];
    const double later = closes[end_indices[k] + horizon];
    double v = 0.0;
    switch (family) {
      case LabelFamily::nbar_updown: v = binary(later > now); break;
      case LabelFamily::nbar_change: v = later - now; break;
      default: v = std::log(later / now); break;
    }
    out.values[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

LabelVector label_ma(const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                     Eigen::Index horizon, Eigen::Index ma_period) {
  check_future(closes.size(), end_indices, horizon);
  const Eigen::VectorXd ma = sma(closes, ma_period).values;
  LabelVector out = make(LabelFamily::ma_updown, horizon, end_indices, 2);
  out.params.ma_period = ma_period;
  for (std::size_t k = 0; k < end_indices.size(); ++k) {
    const Eigen::Index t = end_indices[k];
    if (!is_defined(ma[t])) {
      throw std::invalid_argument("label_ma: SMA(" + std::to_string(ma_period) + ") undefined at index " +
                                  std::to_string(t));
    }
    out.values[static_cast<Eigen::Index>(k)] = binary(ma[t + horizon] > ma[t]);
  }
  return out;
}

LabelVector label_pctq(const Eigen::Ref<const Eigen::VectorXd>& highs, const Eigen::Ref<const Eigen::VectorXd>& lows,
                       const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                       Eigen::Index horizon) {
  if (highs.size() != closes.size() || lows.size() != closes.size()) {
    throw std::invalid_argument("label_pctq: highs, lows and closes differ in length");
  }
  check_future(closes.size(), end_indices, horizon);
  LabelVector out = make(LabelFamily::pctq, horizon, end_indices, 0);
  Eigen::Index flat = 0;
  for (std::size_t k = 0; k < end_indices.size(); ++k) {
    const Eigen::Index t = end_indices[k];
    const double hh = highs.segment(t + 1, horizon).maxCoeff();
    const double ll = lows.segment(t + 1, horizon).minCoeff();
    if (hh < ll) throw std::invalid_argument("label_pctq: high below low after index " + std::to_string(t));
    double q = 0.5;
    if (hh > ll) {
      q = std::clamp((hh - closes[t]) / (hh - ll), 0.0, 1.0);
    } else {
      ++flat;
    }
    out.values[static_cast<Eigen::Index>(k)] = q;
  }
  if (flat > 0) out.warnings.push_back(std::to_string(flat) + " flat future window(s) labeled 0.5");
  return out;
}

LabelVector label_pctq(const BarSeries& series, const std::vector<Eigen::Index>& end_indices, Eigen::Index horizon) {
  const Eigen::VectorXd closes = series.closes();
  if (series.fields().high_low) return label_pctq(series.highs(), series.lows(), closes, end_indices, horizon);
  LabelVector out = label_pctq(closes, closes, closes, end_indices, horizon);
  out.warnings.push_back("no high/low columns; %Q computed from closes");
  return out;
}

LabelVector label_qclass(const LabelVector& pctq, const QClassThresholds& thresholds) {
  if (pctq.family != LabelFamily::pctq) throw std::invalid_argument("label_qclass needs a pctq label vector");
  thresholds.validate();
  LabelVector out = make(LabelFamily::qclass, pctq.horizon, pctq.end_indices, 3);
  out.params.qclass = thresholds;
  out.warnings = pctq.warnings;
  for (Eigen::Index k = 0; k < pctq.size(); ++k) {
    const double q = pctq.values[k];
    out.values[k] = q >= thresholds.up_min ? 0.0 : (q <= thresholds.down_max ? 2.0 : 1.0);
  }
  return out;
}

LabelVector label_trend(const Eigen::Ref<const Eigen::VectorXd>& closes, const std::vector<Eigen::Index>& end_indices,
                        Eigen::Index horizon, TrendMethod method, LabelFamily family, Eigen::Index ma_period,
                        std::optional<double> direction_threshold) {
  if (family != LabelFamily::trend_strength && family != LabelFamily::trend_direction) {
    throw std::invalid_argument("label_trend: family must be trend_strength or trend_direction");
  }
  check_future(closes.size(), end_indices, horizon);
  if (method == TrendMethod::regression && horizon < 2) {
    throw std::invalid_argument("label_trend: regression needs a horizon of at least 2");
  }
  const double threshold = direction_threshold.value_or(method == TrendMethod::regression ? 0.0 : 0.5);
  const bool direction = family == LabelFamily::trend_direction;
  LabelVector out = make(family, horizon, end_indices, direction ? 2 : 0);
  out.params.trend_method = method;
  out.params.direction_threshold = threshold;

  Eigen::VectorXd ma;
  if (method == TrendMethod::ma_fraction) {
    out.params.ma_period = ma_period;
    ma = sma(closes, ma_period).values;
  }
  const double n = static_cast<double>(horizon);
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(horizon, 1.0, n);
  const Eigen::ArrayXd xc = x - x.mean();
  const double sxx = xc.square().sum();

  for (std::size_t k = 0; k < end_indices.size(); ++k) {
    const Eigen::Index t = end_indices[k];
    const auto future = closes.segment(t + 1, horizon).array();
    double strength = 0.0;
    if (method == TrendMethod::regression) {
      strength = (xc * (future - future.mean())).sum() / sxx / closes[t];
    } else {
      Eigen::Index above = 0;
      for (Eigen::Index j = 0; j < horizon; ++j) {
        const double m = ma[t + 1 + j];
        if (!is_defined(m)) {
          throw std::invalid_argument("label_trend: SMA(" + std::to_string(ma_period) + ") undefined at index " +
                                      std::to_string(t + 1 + j));
        }
        if (future[j] > m) ++above;
      }
      strength = static_cast<double>(above) / n;
    }
    out.values[static_cast<Eigen::Index>(k)] = direction ? binary(strength > threshold) : strength;
  }
  return out;
}

LabelVector label_probe_conditions(const Eigen::Ref<const Eigen::VectorXd>& closes,
                                   const std::vector<Eigen::Index>& end_indices, ProbeCondition condition) {
  const Eigen::Index history = condition == ProbeCondition::close_above_close5  ? 5
                               : condition == ProbeCondition::close_above_ema5 ? 4
                                                                               : 9;
  for (const Eigen::Index t : end_indices) {
    if (t < history || t >= closes.size()) {
      throw std::invalid_argument(std::string("insufficient history for ") + to_string(condition) + " at index " +
                                  std::to_string(t));
    }
  }
  Eigen::VectorXd ema5;
  if (condition == ProbeCondition::close_above_ema5) ema5 = ema(closes, 5).values;

  LabelVector out = make(LabelFamily::probe_condition, 0, end_indices, 2);
  out.params.condition = condition;
  for (std::size_t k = 0; k < end_indices.size(); ++k) {
    const Eigen::Index t = end_indices[k];
    bool label = false;
    switch (condition) {
      case ProbeCondition::close_above_close5: label = closes[t] > closes[t - 5]; break;
      case ProbeCondition::close_above_ema5: label = closes[t] > ema5[t]; break;
      case ProbeCondition::close_above_hc10: label = closes[t] > closes.segment(t - 9, 9).maxCoeff(); break;
    }
    out.values[static_cast<Eigen::Index>(k)] = binary(label);
  }
  return out;
}

const char* to_string(LabelFamily f) {
  switch (f) {
    case LabelFamily::nbar_updown: return "nbar_updown";
    case LabelFamily::nbar_change: return "nbar_change";
    case LabelFamily::nbar_logret: return "nbar_logret";
    case LabelFamily::ma_updown: return "ma_updown";
    case LabelFamily::trend_strength: return "trend_strength";
    case LabelFamily::trend_direction: return "trend_direction";
    case LabelFamily::pctq: return "pctq";
    case LabelFamily::qclass: return "qclass";
    case LabelFamily::probe_condition: return "probe_condition";
  }
  return "?";
}

const char* to_string(TrendMethod m) { return m == TrendMethod::regression ? "regression" : "ma_fraction"; }

const char* to_string(ProbeCondition c) {
  switch (c) {
    case ProbeCondition::close_above_close5: return "c5";
    case ProbeCondition::close_above_ema5: return "ema5";
    case ProbeCondition::close_above_hc10: return "hc10";
  }
  return "?";
}

LabelFamily parse_label_family(const std::string& name) {
  for (const auto f : {LabelFamily::nbar_updown, LabelFamily::nbar_change, LabelFamily::nbar_logret,
                       LabelFamily::ma_updown, LabelFamily::trend_strength, LabelFamily::trend_direction,
                       LabelFamily::pctq, LabelFamily::qclass}) {
    if (name == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown label family '" + name + "'");
}

TrendMethod parse_trend_method(const std::string& name) {
  if (name == "regression") return TrendMethod::regression;
  if (name == "ma_fraction") return TrendMethod::ma_fraction;
  throw std::invalid_argument("unknown trend method '" + name + "'");
}

ProbeCondition parse_probe_condition(const std::string& name) {
  if (name == "c5") return ProbeCondition::close_above_close5;
  if (name == "ema5") return ProbeCondition::close_above_ema5;
  if (name == "hc10") return ProbeCondition::close_above_hc10;
  throw std::invalid_argument("unknown probe condition '" + name + "' (expected c5, ema5 or hc10)");
}

}  // namespace tslab
