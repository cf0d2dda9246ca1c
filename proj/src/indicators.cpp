#include "tslab/indicators.hpp"

#include <deque>
#include <stdexcept>

namespace tslab {

namespace {

void check_period(Eigen::Index length, Eigen::Index period) {
  if (period <= 0) throw std::invalid_argument("indicator period must be positive");
  if (period > length) throw std::invalid_argument("indicator period exceeds series length");
}

Eigen::VectorXd undefined(Eigen::Index n) { return Eigen::VectorXd::Constant(n, kUndefined); }

// Monotone deque; `better(a, b)` is true when a should evict b.
template <typename Better>
Eigen::VectorXd rolling_extreme(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index period, Better better) {
  Eigen::VectorXd out = undefined(x.size());
  std::deque<Eigen::Index> window;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    while (!window.empty() && !better(x[window.back()], x[t]) ) window.pop_back();
    window.push_back(t);
    if (window.front() <= t - period) window.pop_front();
    if (t >= period - 1) out[t] = x[window.front()];
  }
  return out;
}

}  // namespace

Eigen::Index IndicatorSeries::first_defined() const {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (is_defined(values[i])) return i;
  }
  return values.size();
}

IndicatorSeries sma(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period) {
  check_period(closes.size(), period);
  Eigen::VectorXd out = undefined(closes.size());
  for (Eigen::Index t = period - 1; t < closes.size(); ++t) {
    // Direct window sums avoid running-sum drift over long series.
    out[t] = closes.segment(t - period + 1, period).mean();
  }
  return {"sma" + std::to_string(period), std::move(out), Taxonomy::overlaid, std::nullopt};
}

IndicatorSeries ema(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period) {
  check_period(closes.size(), period);
  Eigen::VectorXd out = undefined(closes.size());
  const double alpha = 2.0 / (static_cast<double>(period) + 1.0);
  out[period - 1] = closes.head(period).mean();
  for (Eigen::Index t = period; t < closes.size(); ++t) {
    out[t] = alpha * closes[t] + (1.0 - alpha) * out[t - 1];
  }
  return {"ema" + std::to_string(period), std::move(out), Taxonomy::overlaid, std::nullopt};
}

IndicatorSeries rolling_max(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period) {
  check_period(closes.size(), period);
  return {"max" + std::to_string(period),
          rolling_extreme(closes, period, [](double kept, double incoming) { return kept > incoming; }),
          Taxonomy::overlaid, std::nullopt};
}

IndicatorSeries rolling_min(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period) {
  check_period(closes.size(), period);
  return {"min" + std::to_string(period),
          rolling_extreme(closes, period, [](double kept, double incoming) { return kept < incoming; }),
          Taxonomy::overlaid, std::nullopt};
}

IndicatorSeries rsi(const Eigen::Ref<const Eigen::VectorXd>& closes, Eigen::Index period) {
  check_period(closes.size(), period);
  if (closes.size() <= period) throw std::invalid_argument("rsi needs more than `period` values");
  Eigen::VectorXd out = undefined(closes.size());
  const double p = static_cast<double>(period);
  auto value = [](double gain, double loss) {
    if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
    return 100.0 - 100.0 / (1.0 + gain / loss);
  };
  double gain = 0.0, loss = 0.0;
  for (Eigen::Index t = 1; t <= period; ++t) {
    const double change = closes[t] - closes[t - 1];
    gain += std::max(change, 0.0);
    loss += std::max(-change, 0.0);
  }
  gain /= p;
  loss /= p;
  out[period] = value(gain, loss);
  for (Eigen::Index t = period + 1; t < closes.size(); ++t) {
    const double change = closes[t] - closes[t - 1];
    gain = (gain * (p - 1.0) + std::max(change, 0.0)) / p;
    loss = (loss * (p - 1.0) + std::max(-change, 0.0)) / p;
    out[t] = value(gain, loss);
  }
  return {"rsi" + std::to_string(period), std::move(out), Taxonomy::bounded, 100.0};
}

IndicatorSeries compute_indicator(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& closes,
                                  Eigen::Index period) {
  if (name == "sma") return sma(closes, period);
  if (name == "ema") return ema(closes, period);
  if (name == "max") return rolling_max(closes, period);
  if (name == "min") return rolling_min(closes, period);
  if (name == "rsi") return rsi(closes, period);
  throw std::invalid_argument("unknown indicator '" + name + "'");
}

const char* to_string(Taxonomy t) {
  switch (t) {
    case Taxonomy::overlaid: return "overlaid";
    case Taxonomy::bounded: return "bounded";
    case Taxonomy::separate: return "separate";
  }
  return "?";
}

}  // namespace tslab
