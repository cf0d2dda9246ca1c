#pragma once

#include "tslab/windowing.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace tslab {

struct LabelVector;

/// Half-open interval [begin, end) of slice indices.
struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
  bool contains(Eigen::Index k) const { return k >= begin && k < end; }
};

struct LeakageAudit {
  /// Largest lookback-overlap fraction between any train slice and any
  /// validation/test slice.
  double max_cross_overlap = 0.0;
  /// Mean over validation/test slices of their largest overlap with any
  /// train slice.
  double mean_cross_overlap = 0.0;
  /// (train, held-out) pairs whose input windows share at least one bar.
  std::int64_t violating_pairs = 0;
  /// (train, held-out) pairs where the train slice's label window reaches a
  /// bar of the held-out slice (its input or its label window).
  std::int64_t label_overlap_pairs = 0;
};

struct SplitPlan {
  /// Contiguous for split_then_shuffle. For the shuffle-first anti-pattern
  /// these are positions in the shuffled permutation, not slice indices.
  IndexRange train_range, val_range, test_range;
  /// Slices dropped at each boundary to isolate held-out sets.
  Eigen::Index embargo = 0;
  std::uint64_t seed = 0;
  bool shuffled_before_split = false;
  std::vector<Eigen::Index> train_order;
  std::vector<Eigen::Index> val_indices;
  std::vector<Eigen::Index> test_indices;
  LeakageAudit leakage;
};

/// Set sizes: train = round(K*f0), val = round(K*f1), test = remainder.
std::array<Eigen::Index, 3> split_sizes(Eigen::Index count, const std::array<double, 3>& fractions);

/// Slices needed between sets so that no bar of a train slice, label window
/// included, is also a bar of a held-out slice: ceil((n - 1 + h) / stride).
Eigen::Index auto_embargo(const SliceSpec& spec);

/// Contiguous train | val | test split in temporal order, then a seeded
/// Fisher-Yates shuffle of the train indices only. `embargo` slices are
/// dropped from the earlier set at each boundary between non-empty sets.
SplitPlan split_then_shuffle(Eigen::Index count, const std::array<double, 3>& fractions, std::uint64_t seed,
                             const SliceSpec& spec, Eigen::Index embargo = 0);

/// Shuffles all slices and then cuts the permutation. Leaks by construction;
/// kept to demonstrate the audit.
SplitPlan shuffle_then_split(Eigen::Index count, const std::array<double, 3>& fractions, std::uint64_t seed,
                             const SliceSpec& spec);

/// Exhaustive pairwise audit between train and held-out slice indices.
LeakageAudit audit_leakage(const std::vector<Eigen::Index>& train, const std::vector<Eigen::Index>& held_out,
                           const SliceSpec& spec);

/// Reduces every class among `train` to the minority-class count by seeded
/// sampling without replacement. Kept indices retain their input order.
/// `labels` is indexed by slice. Throws std::invalid_argument when fewer than
/// two classes are present or a class in [0, class_count) has no member.
std::vector<Eigen::Index> downsample_majority(const std::vector<Eigen::Index>& train, const LabelVector& labels,
                                              std::uint64_t seed);

}  // namespace tslab
