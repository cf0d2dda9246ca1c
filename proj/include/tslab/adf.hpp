#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>

namespace tslab {

class SliceTensor;

/// Deterministic terms in the test regression.
enum class AdfRegression { constant, constant_and_trend };

struct AdfReport {
  /// t-ratio of the lagged-level coefficient.
  double statistic = 0.0;
  double p_value = 1.0;
  Eigen::Index lags_used = 0;
  Eigen::Index max_lags = 0;
  /// Observations in the final regression.
  Eigen::Index n_obs = 0;
  AdfRegression regression = AdfRegression::constant;
  /// Critical values at the 1%, 5% and 10% levels, in that order.
  std::array<double, 3> critical_values{};
  /// AIC of the selected lag among the common-sample candidates.
  double best_aic = 0.0;

  /// level: 0 = 1%, 1 = 5%, 2 = 10%.
  bool rejects_unit_root(std::size_t level = 0) const { return statistic < critical_values[level]; }
};

/// Upper bound on augmenting lags: floor(12 * (T / 100)^(1/4)), capped so the
/// regression keeps enough degrees of freedom.
Eigen::Index default_max_lags(Eigen::Index length, AdfRegression regression);

/// Augmented Dickey-Fuller test. The lag order is picked by minimum AIC over
/// 0..max_lags on a common sample, then refit on the largest sample for that
/// lag. Throws DataError for constant or non-finite input and
/// std::invalid_argument when the series is too short for `max_lags`.
AdfReport adf_test(const Eigen::Ref<const Eigen::VectorXd>& series,
                   AdfRegression regression = AdfRegression::constant,
                   std::optional<Eigen::Index> max_lags = std::nullopt);

/// Concatenates one channel of every slice, in slice order, and tests it.
AdfReport adf_on_slices(const SliceTensor& slices, Eigen::Index channel,
                        AdfRegression regression = AdfRegression::constant,
                        std::optional<Eigen::Index> max_lags = std::nullopt);

/// Approximate asymptotic p-value from MacKinnon's response surfaces
/// (single-variable case).
double mackinnon_p_value(double statistic, AdfRegression regression);

/// Finite-sample critical values {1%, 5%, 10%}; `n_obs` <= 0 gives the
/// asymptotic values.
std::array<double, 3> mackinnon_critical_values(AdfRegression regression, Eigen::Index n_obs);

const char* to_string(AdfRegression r);

}  // namespace tslab
