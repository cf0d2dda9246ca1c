#include "tslab/splitting.hpp"

#include "tslab/labeling.hpp"
#include "tslab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tslab {

namespace {

void check_fractions(Eigen::Index count, const std::array<double, 3>& fractions) {
  for (const double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split fractions must be non-negative");
  }
  if (!(fractions[0] > 0.0)) throw std::invalid_argument("train fraction must be positive");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
  if (count < 3) throw std::invalid_argument("need at least 3 slices to split");
}

std::vector<Eigen::Index> iota(Eigen::Index begin, Eigen::Index end) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(std::max<Eigen::Index>(end - begin, 0)));
  std::iota(out.begin(), out.end(), begin);
  return out;
}

}  // namespace

std::array<Eigen::Index, 3> split_sizes(Eigen::Index count, const std::array<double, 3>& fractions) {
  check_fractions(count, fractions);
  const double k = static_cast<double>(count);
  Eigen::Index train = static_cast<Eigen::Index>(std::llround(k * fractions[0]));
  Eigen::Index val = static_cast<Eigen::Index>(std::llround(k * fractions[1]));
  train = std::min(train, count);
  val = std::min(val, count - train);
  const Eigen::Index test = count - train - val;
  const std::array<Eigen::Index, 3> sizes{train, val, test};
  for (std::size_t i = 0; i < 3; ++i) {
    if (fractions[i] > 0.0 && sizes[i] == 0) {
      throw std::invalid_argument("slice count " + std::to_string(count) + " too small for a non-empty set " +
                                  std::to_string(i));
    }
  }
  return sizes;
}

Eigen::Index auto_embargo(const SliceSpec& spec) {
  spec.validate();
  return (spec.lookback - 1 + spec.label_horizon + spec.stride - 1) / spec.stride;
}

SplitPlan split_then_shuffle(Eigen::Index count, const std::array<double, 3>& fractions, std::uint64_t seed,
                             const SliceSpec& spec, Eigen::Index embargo) {
  if (embargo < 0) throw std::invalid_argument("embargo must be non-negative");
  const auto [train, val, test] = split_sizes(count, fractions);

  SplitPlan plan;
  plan.seed = seed;
  plan.embargo = embargo;
  const Eigen::Index train_cut = val + test > 0 ? embargo : 0;
  const Eigen::Index val_cut = val > 0 && test > 0 ? embargo : 0;
  if (train - train_cut <= 0 || (val > 0 && val - val_cut <= 0)) {
    throw std::invalid_argument("embargo of " + std::to_string(embargo) + " slices leaves an empty set");
  }
  plan.train_range = {0, train - train_cut};
  plan.val_range = {train, train + val - val_cut};
  plan.test_range = {train + val, count};

  plan.train_order = iota(plan.train_range.begin, plan.train_range.end);
  Rng rng(seed);
  rng.shuffle(plan.train_order);
  plan.val_indices = iota(plan.val_range.begin, plan.val_range.end);
  plan.test_indices = iota(plan.test_range.begin, plan.test_range.end);

  std::vector<Eigen::Index> held_out = plan.val_indices;
  held_out.insert(held_out.end(), plan.test_indices.begin(), plan.test_indices.end());
  plan.leakage = audit_leakage(plan.train_order, held_out, spec);
  return plan;
}

SplitPlan shuffle_then_split(Eigen::Index count, const std::array<double, 3>& fractions, std::uint64_t seed,
                             const SliceSpec& spec) {
  const auto [train, val, test] = split_sizes(count, fractions);
  std::vector<Eigen::Index> all = iota(0, count);
  Rng rng(seed);
  rng.shuffle(all);

  SplitPlan plan;
  plan.seed = seed;
  plan.shuffled_before_split = true;
  plan.train_range = {0, train};
  plan.val_range = {train, train + val};
  plan.test_range = {train + val, train + val + test};
  plan.train_order.assign(all.begin(), all.begin() + train);
  plan.val_indices.assign(all.begin() + train, all.begin() + train + val);
  plan.test_indices.assign(all.begin() + train + val, all.end());

  std::vector<Eigen::Index> held_out = plan.val_indices;
  held_out.insert(held_out.end(), plan.test_indices.begin(), plan.test_indices.end());
  plan.leakage = audit_leakage(plan.train_order, held_out, spec);
  return plan;
}

LeakageAudit audit_leakage(const std::vector<Eigen::Index>& train, const std::vector<Eigen::Index>& held_out,
                           const SliceSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.lookback;
  const Eigen::Index s = spec.stride;
  const Eigen::Index h = spec.label_horizon;

  LeakageAudit audit;
  double overlap_sum = 0.0;
  for (const Eigen::Index v : held_out) {
    // Held-out slice v spans bars [v*s, v*s + n - 1 + h] including its label window.
    const Eigen::Index v_start = v * s;
    const Eigen::Index v_last = v_start + n - 1 + h;
    Eigen::Index best_shared = 0;
    for (const Eigen::Index t : train) {
      const Eigen::Index shared = n - std::abs(t - v) * s;
      if (shared > 0) {
        ++audit.violating_pairs;
        best_shared = std::max(best_shared, shared);
      }
      if (h > 0) {
        const Eigen::Index label_first = t * s + n;
        const Eigen::Index label_last = t * s + n - 1 + h;
        if (label_first <= v_last && label_last >= v_start) ++audit.label_overlap_pairs;
      }
    }
    const double frac = static_cast<double>(best_shared) / static_cast<double>(n);
    audit.max_cross_overlap = std::max(audit.max_cross_overlap, frac);
    overlap_sum += frac;
  }
  audit.mean_cross_overlap = held_out.empty() ? 0.0 : overlap_sum / static_cast<double>(held_out.size());
  return audit;
}

std::vector<Eigen::Index> downsample_majority(const std::vector<Eigen::Index>& train, const LabelVector& labels,
                                              std::uint64_t seed) {
  if (!labels.is_classifier()) throw std::invalid_argument("downsample_majority needs classifier labels");
  const int classes = labels.class_count;
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int c = labels.class_of(train[i]);
    members[static_cast<std::size_t>(c)].push_back(i);
  }
  if (classes < 2) throw std::invalid_argument("downsample_majority needs at least two classes");
  for (int c = 0; c < classes; ++c) {
    if (members[static_cast<std::size_t>(c)].empty()) {
      throw std::invalid_argument("class " + std::to_string(c) + " has no training members");
    }
  }
  std::size_t minority = train.size();
  for (const auto& m : members) minority = std::min(minority, m.size());

  Rng rng(seed);
  std::vector<char> keep(train.size(), 0);
  for (auto& m : members) {
    // Partial Fisher-Yates: the first `minority` positions become a uniform sample.
    for (std::size_t i = 0; i < minority; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(m.size() - i));
      std::swap(m[i], m[j]);
      keep[m[i]] = 1;
    }
  }
  std::vector<Eigen::Index> out;
  out.reserve(minority * members.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (keep[i]) out.push_back(train[i]);
  }
  return out;
}

}  // namespace tslab
