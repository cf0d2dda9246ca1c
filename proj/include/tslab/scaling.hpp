#pragma once

#include "tslab/scaling_meta.hpp"
#include "tslab/windowing.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace tslab {

struct ScalerConfig {
  ScaleMethod method = ScaleMethod::minmax;
  double range_min = 0.0;
  double range_max = 1.0;
  /// Scaled jointly with one set of statistics per slice.
  std::vector<std::string> overlaid;
  /// Divided by their bound.
  std::vector<std::pair<std::string, double>> bounded;
  /// Each scaled with its own statistics.
  std::vector<std::string> separate;

  /// Throws std::invalid_argument unless the groups partition `channels`
  /// exactly and the feature range is non-empty.
  void validate(const std::vector<std::string>& channels) const;

  /// Overlaid group first (if any), then one group per bounded and per
  /// separate channel, in declaration order.
  std::vector<ScalingGroup> resolve(const std::vector<std::string>& channels) const;
};

/// Taxonomy by channel name: volume and returns are separate, rsi* is bounded
/// by 100, everything else (prices, moving averages, extrema) is overlaid.
ScalerConfig default_scaler_config(const std::vector<std::string>& channels, ScaleMethod method);

// Statistics and affine maps over any dense expression.

template <typename Derived>
GroupStats minmax_stats(const Eigen::DenseBase<Derived>& x) {
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  return {lo, hi, !(hi > lo)};
}

/// Population (divide-by-N) standard deviation.
template <typename Derived>
GroupStats standardize_stats(const Eigen::DenseBase<Derived>& x) {
  const double mean = x.mean();
  const double var = (x.derived().array() - mean).square().mean();
  return {mean, std::sqrt(var), !(x.maxCoeff() > x.minCoeff())};
}

inline double minmax_apply(double x, const GroupStats& s, double lo, double hi) {
  if (s.degenerate) return 0.5 * (lo + hi);
  return (x - s.first) / (s.second - s.first) * (hi - lo) + lo;
}

inline double minmax_invert(double z, const GroupStats& s, double lo, double hi) {
  if (s.degenerate) return s.first;
  return (z - lo) / (hi - lo) * (s.second - s.first) + s.first;
}

inline double standardize_apply(double x, const GroupStats& s) {
  return s.degenerate ? 0.0 : (x - s.first) / s.second;
}

inline double standardize_invert(double z, const GroupStats& s) {
  return s.degenerate ? s.first : z * s.second + s.first;
}

/// Scales every slice independently; statistics are recorded in the result's
/// scaling metadata. Degenerate (flat) groups map to the range midpoint
/// (minmax) or zero (standardize) and add a warning. Throws
/// std::invalid_argument if the tensor is already scaled or the config does
/// not partition its channels.
SliceTensor scale_slices(const SliceTensor& slices, const ScalerConfig& config);

/// One global scaling over the series from spec.first_start onwards, then
/// slicing. Kept for comparison; the metadata is flagged global.
SliceTensor scale_then_slice(const std::vector<Eigen::VectorXd>& channels, const SliceSpec& spec,
                             const ScalerConfig& config);

/// Undoes scaling using the stored metadata. Throws std::invalid_argument
/// ("missing metadata") for unscaled tensors.
SliceTensor invert_scaling(const SliceTensor& slices);

}  // namespace tslab
