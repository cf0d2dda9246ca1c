#include "tslab/labeling.hpp"
#include "tslab/random.hpp"
#include "tslab/splitting.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace tslab;

namespace {

SliceSpec spec_of(Eigen::Index n, Eigen::Index stride, Eigen::Index horizon) {
  SliceSpec s;
  s.lookback = n;
  s.stride = stride;
  s.label_horizon = horizon;
  return s;
}

std::vector<Eigen::Index> sorted(std::vector<Eigen::Index> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<Eigen::Index> iota(Eigen::Index a, Eigen::Index b) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(b - a));
  std::iota(v.begin(), v.end(), a);
  return v;
}

LabelVector labels_from(const std::vector<int>& classes, int class_count) {
  LabelVector l;
  l.class_count = class_count;
  l.values.resize(static_cast<Eigen::Index>(classes.size()));
  for (std::size_t i = 0; i < classes.size(); ++i) l.values[static_cast<Eigen::Index>(i)] = classes[i];
  return l;
}

// Bar-level oracle: the sets of bars touched by each slice's input window.
LeakageAudit brute_audit(const std::vector<Eigen::Index>& train, const std::vector<Eigen::Index>& held,
                         const SliceSpec& s) {
  LeakageAudit a;
  double sum = 0;
  for (auto v : held) {
    double best = 0;
    for (auto t : train) {
      std::set<Eigen::Index> bt, bv;
      for (Eigen::Index j = 0; j < s.lookback; ++j) {
        bt.insert(t * s.stride + j);
        bv.insert(v * s.stride + j);
      }
      Eigen::Index shared = 0;
      for (auto b : bt) shared += bv.count(b);
      const double f = static_cast<double>(shared) / static_cast<double>(s.lookback);
      best = std::max(best, f);
      if (shared > 0) ++a.violating_pairs;
      // Train label bars vs. every bar the held-out slice depends on.
      bool label_hit = false;
      for (Eigen::Index j = s.lookback; j < s.lookback + s.label_horizon; ++j) {
        const Eigen::Index bar = t * s.stride + j;
        if (bar >= v * s.stride && bar <= v * s.stride + s.lookback - 1 + s.label_horizon) label_hit = true;
      }
      if (label_hit) ++a.label_overlap_pairs;
    }
    a.max_cross_overlap = std::max(a.max_cross_overlap, best);
    sum += best;
  }
  a.mean_cross_overlap = held.empty() ? 0.0 : sum / static_cast<double>(held.size());
  return a;
}

}  // namespace

TEST(SplitSizes, Rounding) {
  EXPECT_EQ(split_sizes(10, {0.8, 0.2, 0.0}), (std::array<Eigen::Index, 3>{8, 2, 0}));
  EXPECT_EQ(split_sizes(1000, {0.7, 0.15, 0.15}), (std::array<Eigen::Index, 3>{700, 150, 150}));
  EXPECT_THROW(split_sizes(2, {0.8, 0.2, 0.0}), std::invalid_argument);
  EXPECT_THROW(split_sizes(100, {0.8, 0.3, 0.0}), std::invalid_argument);
}

TEST(SplitThenShuffle, TenSlices) {
  const SliceSpec s = spec_of(20, 1, 1);
  const SplitPlan p = split_then_shuffle(10, {0.8, 0.2, 0.0}, 42, s);
  EXPECT_EQ(sorted(p.train_order), iota(0, 8));
  EXPECT_EQ(p.val_indices, iota(8, 10));
  EXPECT_TRUE(p.test_indices.empty());
  EXPECT_FALSE(p.shuffled_before_split);
  EXPECT_NE(p.train_order, iota(0, 8));
  // Boundary pair 7 / 8 shares 19 of 20 bars.
  EXPECT_DOUBLE_EQ(p.leakage.max_cross_overlap, 0.95);
  for (auto v : p.val_indices) EXPECT_EQ(std::count(p.train_order.begin(), p.train_order.end(), v), 0);
}

TEST(SplitThenShuffle, Deterministic) {
  const SliceSpec s = spec_of(20, 1, 1);
  const SplitPlan a = split_then_shuffle(500, {0.7, 0.2, 0.1}, 9, s, 3);
  const SplitPlan b = split_then_shuffle(500, {0.7, 0.2, 0.1}, 9, s, 3);
  EXPECT_EQ(a.train_order, b.train_order);
  const SplitPlan c = split_then_shuffle(500, {0.7, 0.2, 0.1}, 10, s, 3);
  EXPECT_NE(a.train_order, c.train_order);
}

TEST(SplitThenShuffle, AutoEmbargoPurgesEverything) {
  for (auto [n, stride, h] : {std::tuple{20, 1, 1}, std::tuple{20, 1, 5}, std::tuple{10, 3, 4}, std::tuple{5, 5, 0}}) {
    const SliceSpec s = spec_of(n, stride, h);
    const Eigen::Index e = auto_embargo(s);
    EXPECT_EQ(e, (n - 1 + h + stride - 1) / stride);
    const SplitPlan p = split_then_shuffle(300, {0.6, 0.2, 0.2}, 1, s, e);
    EXPECT_EQ(p.leakage.max_cross_overlap, 0.0);
    EXPECT_EQ(p.leakage.violating_pairs, 0);
    EXPECT_EQ(p.leakage.label_overlap_pairs, 0);
    // Val and test are separated too.
    const LeakageAudit vt = audit_leakage(p.val_indices, p.test_indices, s);
    EXPECT_EQ(vt.violating_pairs, 0);
    EXPECT_EQ(vt.label_overlap_pairs, 0);
    // The earlier set loses exactly `e` slices at each boundary.
    EXPECT_EQ(p.train_range.end, p.val_range.begin - e);
    EXPECT_EQ(p.val_range.end, p.test_range.begin - e);
  }
}

TEST(ShuffleThenSplit, LeaksHeavily) {
  const SliceSpec s = spec_of(20, 1, 1);
  const SplitPlan bad = shuffle_then_split(1000, {0.8, 0.2, 0.0}, 42, s);
  EXPECT_TRUE(bad.shuffled_before_split);
  EXPECT_GT(bad.leakage.mean_cross_overlap, 0.5);
  const SplitPlan good = split_then_shuffle(1000, {0.8, 0.2, 0.0}, 42, s);
  EXPECT_LT(good.leakage.mean_cross_overlap, 0.05);
  std::set<Eigen::Index> all(bad.train_order.begin(), bad.train_order.end());
  all.insert(bad.val_indices.begin(), bad.val_indices.end());
  EXPECT_EQ(all.size(), 1000u);
}

TEST(ShuffleThenSplit, TwoSlicesStraddle) {
  const SliceSpec s = spec_of(20, 1, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SplitPlan p = shuffle_then_split(3, {0.34, 0.33, 0.33}, seed, s);
    EXPECT_GE(p.leakage.max_cross_overlap, 0.9);
  }
}

TEST(AuditLeakage, MatchesBarLevelOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const SliceSpec s = spec_of(2 + static_cast<Eigen::Index>(rng.below(8)), 1 + static_cast<Eigen::Index>(rng.below(3)),
                                static_cast<Eigen::Index>(rng.below(4)));
    std::vector<Eigen::Index> idx = iota(0, 40);
    rng.shuffle(idx);
    const std::vector<Eigen::Index> train(idx.begin(), idx.begin() + 25), held(idx.begin() + 25, idx.end());
    const LeakageAudit a = audit_leakage(train, held, s);
    const LeakageAudit b = brute_audit(train, held, s);
    EXPECT_DOUBLE_EQ(a.max_cross_overlap, b.max_cross_overlap);
    EXPECT_NEAR(a.mean_cross_overlap, b.mean_cross_overlap, 1e-12);
    EXPECT_EQ(a.violating_pairs, b.violating_pairs);
    EXPECT_EQ(a.label_overlap_pairs, b.label_overlap_pairs);
  }
}

TEST(Downsample, PaperImbalance) {
  std::vector<int> classes(1000);
  for (int i = 0; i < 1000; ++i) classes[i] = i < 686 ? 1 : 0;
  Rng rng(1);
  rng.shuffle(classes);
  const LabelVector l = labels_from(classes, 2);
  const auto kept = downsample_majority(iota(0, 1000), l, 5);
  int ones = 0;
  for (auto k : kept) ones += classes[k];
  EXPECT_EQ(kept.size(), 628u);
  EXPECT_EQ(ones, 314);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
  EXPECT_EQ(kept, downsample_majority(iota(0, 1000), l, 5));
}

TEST(Downsample, BalancedUnchanged) {
  const LabelVector l = labels_from({0, 1, 1, 0, 1, 0}, 2);
  const std::vector<Eigen::Index> train = {5, 2, 0, 1, 3, 4};
  EXPECT_EQ(downsample_majority(train, l, 3), train);
}

TEST(Downsample, ThreeClasses) {
  std::vector<int> classes;
  for (int c = 0; c < 3; ++c) classes.insert(classes.end(), c == 0 ? 50 : c == 1 ? 30 : 20, c);
  const LabelVector l = labels_from(classes, 3);
  const auto kept = downsample_majority(iota(0, 100), l, 8);
  std::array<int, 3> h{};
  for (auto k : kept) ++h[classes[k]];
  EXPECT_EQ(h, (std::array<int, 3>{20, 20, 20}));
}

TEST(Downsample, RequiresTwoClasses) {
  EXPECT_THROW(downsample_majority(iota(0, 4), labels_from({1, 1, 1, 1}, 2), 1), std::invalid_argument);
}
