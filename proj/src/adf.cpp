#include "tslab/adf.hpp"

#include "tslab/error.hpp"
#include "tslab/ols.hpp"
#include "tslab/windowing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tslab {

namespace {

// MacKinnon (1994) response-surface coefficients for one variable, in
// ascending powers of the statistic. The large-p polynomial is used above
// `star`, the small-p polynomial at or below it.
struct PValueSurface {
  double min_stat;
  double max_stat;
  double star;
  std::array<double, 3> small_p;
  std::array<double, 4> large_p;
};

constexpr PValueSurface kSurfaceC{-18.83, 2.74, -1.61,
                                  {2.1659, 1.4412, 0.038269},
                                  {1.7339, 0.93202, -0.12745, -0.010368}};
constexpr PValueSurface kSurfaceCT{-16.18, 0.7, -2.89,
                                   {3.2512, 1.6047, 0.049588},
                                   {2.5261, 0.61654, -0.37956, -0.060285}};

// MacKinnon (2010) finite-sample critical values: rows are 1%, 5%, 10%;
// columns are coefficients of 1, 1/T, 1/T^2, 1/T^3.
constexpr std::array<std::array<double, 4>, 3> kCriticalC{{
    {-3.43035, -6.5393, -16.786, -79.433},
    {-2.86154, -2.8903, -4.234, -40.04},
    {-2.56677, -1.5384, -2.809, 0.0},
}};
constexpr std::array<std::array<double, 4>, 3> kCriticalCT{{
    {-3.95877, -9.0531, -28.428, -134.155},
    {-3.41049, -4.3904, -9.036, -45.374},
    {-3.12705, -2.5856, -3.925, -22.380},
}};

template <std::size_t N>
double polynomial(const std::array<double, N>& coef, double x) {
  double acc = 0.0;
  for (std::size_t i = N; i-- > 0;) acc = acc * x + coef[i];
  return acc;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Eigen::Index trend_terms(AdfRegression r) { return r == AdfRegression::constant ? 1 : 2; }

// Design for the ADF regression using the last `rows` usable differences:
// [deterministic terms | lagged level | `lags` lagged differences].
struct Regression {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
};

Regression build_regression(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& dy,
                            AdfRegression regression, Eigen::Index sample_lag, Eigen::Index lags) {
  const Eigen::Index rows = dy.size() - sample_lag;
  const Eigen::Index det = trend_terms(regression);
  Regression out;
  out.design.resize(rows, det + 1 + lags);
  out.response = dy.tail(rows);
  out.design.col(0).setOnes();
  if (regression == AdfRegression::constant_and_trend) {
    out.design.col(1) = Eigen::VectorXd::LinSpaced(rows, 1.0, static_cast<double>(rows));
  }
  out.design.col(det) = y.segment(sample_lag, rows);
  for (Eigen::Index i = 1; i <= lags; ++i) {
    out.design.col(det + i) = dy.segment(sample_lag - i, rows);
  }
  return out;
}

}  // namespace

Eigen::Index default_max_lags(Eigen::Index length, AdfRegression regression) {
  const auto schwert = static_cast<Eigen::Index>(std::floor(12.0 * std::pow(static_cast<double>(length) / 100.0, 0.25)));
  return std::min(schwert, length / 2 - trend_terms(regression) - 1);
}

AdfReport adf_test(const Eigen::Ref<const Eigen::VectorXd>& series, AdfRegression regression,
                   std::optional<Eigen::Index> max_lags) {
  const Eigen::Index length = series.size();
  if (!series.allFinite()) throw DataError("adf: series contains non-finite values");
  if (length >= 1 && series.maxCoeff() == series.minCoeff()) throw DataError("adf: series is constant");

  const Eigen::Index lag_cap = length / 2 - trend_terms(regression) - 1;
  const Eigen::Index max_lag = max_lags ? *max_lags : default_max_lags(length, regression);
  if (max_lag < 0) throw std::invalid_argument("adf: max_lags must be non-negative");
  if (length < 15 + max_lag || max_lag > lag_cap) {
    throw std::invalid_argument("adf: series of length " + std::to_string(length) + " too short for " +
                                std::to_string(max_lag) + " lags");
  }

  const Eigen::VectorXd dy = series.tail(length - 1) - series.head(length - 1);

  // All candidates share the sample implied by the largest lag, so their
  // information criteria are comparable.
  Eigen::Index best_lag = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p <= max_lag; ++p) {
    const Regression reg = build_regression(series, dy, regression, max_lag, p);
    const double aic = ols(reg.design, reg.response).aic();
    if (aic < best_aic) {
      best_aic = aic;
      best_lag = p;
    }
  }

  const Regression final_reg = build_regression(series, dy, regression, best_lag, best_lag);
  const auto fit = ols(final_reg.design, final_reg.response);

  AdfReport report;
  report.regression = regression;
  report.statistic = fit.t_value(trend_terms(regression));
  report.p_value = mackinnon_p_value(report.statistic, regression);
  report.lags_used = best_lag;
  report.max_lags = max_lag;
  report.n_obs = final_reg.response.size();
  report.critical_values = mackinnon_critical_values(regression, report.n_obs);
  report.best_aic = best_aic;
  return report;
}

AdfReport adf_on_slices(const SliceTensor& slices, Eigen::Index channel, AdfRegression regression,
                        std::optional<Eigen::Index> max_lags) {
  if (slices.slice_count() == 0) throw std::invalid_argument("adf_on_slices: empty tensor");
  if (channel < 0 || channel >= slices.channel_count()) {
    throw std::invalid_argument("adf_on_slices: channel " + std::to_string(channel) + " out of range");
  }
  const Eigen::Index n = slices.timesteps();
  Eigen::VectorXd joined(slices.slice_count() * n);
  for (Eigen::Index k = 0; k < slices.slice_count(); ++k) {
    joined.segment(k * n, n) = slices.slice(k).col(channel);
  }
  return adf_test(joined, regression, max_lags);
}

double mackinnon_p_value(double statistic, AdfRegression regression) {
  const PValueSurface& s = regression == AdfRegression::constant ? kSurfaceC : kSurfaceCT;
  if (statistic > s.max_stat) return 1.0;
  if (statistic < s.min_stat) return 0.0;
  const double z = statistic <= s.star ? polynomial(s.small_p, statistic) : polynomial(s.large_p, statistic);
  return normal_cdf(z);
}

std::array<double, 3> mackinnon_critical_values(AdfRegression regression, Eigen::Index n_obs) {
  const auto& table = regression == AdfRegression::constant ? kCriticalC : kCriticalCT;
  const double inv = n_obs > 0 ? 1.0 / static_cast<double>(n_obs) : 0.0;
  return {polynomial(table[0], inv), polynomial(table[1], inv), polynomial(table[2], inv)};
}

const char* to_string(AdfRegression r) { return r == AdfRegression::constant ? "c" : "ct"; }

}  // namespace tslab
