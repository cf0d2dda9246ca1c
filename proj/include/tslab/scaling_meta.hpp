#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace tslab {

enum class ScaleMethod { minmax, standardize };

enum class GroupKind { overlaid, bounded, separate };

/// A set of channels sharing one set of statistics within each slice.
struct ScalingGroup {
  GroupKind kind = GroupKind::overlaid;
  std::vector<Eigen::Index> channels;
  /// Divisor for bounded groups.
  double bound = 0.0;
};

/// Statistics used for one group of one slice: (x_min, x_max) for minmax,
/// (mean, population sigma) for standardize; unused for bounded groups.
struct GroupStats {
  double first = 0.0;
  double second = 0.0;
  bool degenerate = false;
};

struct ScalingMeta {
  ScaleMethod method = ScaleMethod::minmax;
  double range_min = 0.0;
  double range_max = 1.0;
  /// One set of statistics over the whole series instead of per slice.
  bool global = false;
  std::vector<ScalingGroup> groups;
  /// per_slice[k][g] for slice k, group g.
  std::vector<std::vector<GroupStats>> per_slice;
  std::vector<std::string> warnings;
};

const char* to_string(ScaleMethod m);
const char* to_string(GroupKind g);

}  // namespace tslab
