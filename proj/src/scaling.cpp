#include "tslab/scaling.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tslab {

namespace {

Eigen::Index index_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::invalid_argument("scaler config names unknown channel '" + name + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

// Gathers the group's channels of a (timesteps x channels) block into one
// column; statistics are pooled over channels and timesteps.
template <typename Block>
Eigen::VectorXd gather(const Block& block, const ScalingGroup& group) {
  Eigen::VectorXd out(block.rows() * static_cast<Eigen::Index>(group.channels.size()));
  Eigen::Index i = 0;
  for (const Eigen::Index c : group.channels) {
    out.segment(i, block.rows()) = block.col(c);
    i += block.rows();
  }
  return out;
}

GroupStats compute_stats(const Eigen::VectorXd& values, ScaleMethod method) {
  return method == ScaleMethod::minmax ? minmax_stats(values) : standardize_stats(values);
}

template <typename Block>
void apply_group(Block&& block, const ScalingGroup& group, const GroupStats& stats, const ScalingMeta& meta) {
  for (const Eigen::Index c : group.channels) {
    for (Eigen::Index t = 0; t < block.rows(); ++t) {
      double& v = block(t, c);
      if (group.kind == GroupKind::bounded) {
        v /= group.bound;
      } else if (meta.method == ScaleMethod::minmax) {
        v = minmax_apply(v, stats, meta.range_min, meta.range_max);
      } else {
        v = standardize_apply(v, stats);
      }
    }
  }
}

template <typename Block>
void invert_group(Block&& block, const ScalingGroup& group, const GroupStats& stats, const ScalingMeta& meta) {
  for (const Eigen::Index c : group.channels) {
    for (Eigen::Index t = 0; t < block.rows(); ++t) {
      double& v = block(t, c);
      if (group.kind == GroupKind::bounded) {
        v *= group.bound;
      } else if (meta.method == ScaleMethod::minmax) {
        v = minmax_invert(v, stats, meta.range_min, meta.range_max);
      } else {
        v = standardize_invert(v, stats);
      }
    }
  }
}

ScalingMeta empty_meta(const ScalerConfig& config, const std::vector<std::string>& channels) {
  config.validate(channels);
  ScalingMeta meta;
  meta.method = config.method;
  meta.range_min = config.range_min;
  meta.range_max = config.range_max;
  meta.groups = config.resolve(channels);
  return meta;
}

void summarize_degenerate(ScalingMeta& meta) {
  std::size_t count = 0;
  std::size_t first = 0;
  for (std::size_t k = 0; k < meta.per_slice.size(); ++k) {
    for (const auto& s : meta.per_slice[k]) {
      if (s.degenerate) {
        if (count == 0) first = k;
        ++count;
      }
    }
  }
  if (count > 0) {
    meta.warnings.push_back(std::to_string(count) + " flat slice group(s) filled with " +
                            (meta.method == ScaleMethod::minmax ? "the range midpoint" : "zeros") +
                            " (first at slice " + std::to_string(first) + ")");
  }
}

}  // namespace

void ScalerConfig::validate(const std::vector<std::string>& channels) const {
  if (!(range_min < range_max)) throw std::invalid_argument("feature range must satisfy min < max");
  std::set<std::string> seen;
  auto claim = [&](const std::string& name) {
    index_of(channels, name);
    if (!seen.insert(name).second) throw std::invalid_argument("channel '" + name + "' is in more than one group");
  };
  for (const auto& name : overlaid) claim(name);
  for (const auto& [name, bound] : bounded) {
    claim(name);
    if (!(bound > 0.0)) throw std::invalid_argument("bound for '" + name + "' must be positive");
  }
  for (const auto& name : separate) claim(name);
  for (const auto& name : channels) {
    if (!seen.count(name)) throw std::invalid_argument("channel '" + name + "' is not assigned to a scaling group");
  }
}

std::vector<ScalingGroup> ScalerConfig::resolve(const std::vector<std::string>& channels) const {
  std::vector<ScalingGroup> groups;
  if (!overlaid.empty()) {
    ScalingGroup g{GroupKind::overlaid, {}, 0.0};
    for (const auto& name : overlaid) g.channels.push_back(index_of(channels, name));
    groups.push_back(std::move(g));
  }
  for (const auto& [name, bound] : bounded) groups.push_back({GroupKind::bounded, {index_of(channels, name)}, bound});
  for (const auto& name : separate) groups.push_back({GroupKind::separate, {index_of(channels, name)}, 0.0});
  return groups;
}

ScalerConfig default_scaler_config(const std::vector<std::string>& channels, ScaleMethod method) {
  ScalerConfig config;
  config.method = method;
  for (const auto& name : channels) {
    if (name == "volume" || name == "return" || name == "logreturn") {
      config.separate.push_back(name);
    } else if (name.rfind("rsi", 0) == 0) {
      config.bounded.emplace_back(name, 100.0);
    } else {
      config.overlaid.push_back(name);
    }
  }
  return config;
}

SliceTensor scale_slices(const SliceTensor& slices, const ScalerConfig& config) {
  if (slices.scaling()) throw std::invalid_argument("scale_slices: tensor is already scaled");
  ScalingMeta meta = empty_meta(config, slices.channel_names());
  SliceTensor out = slices;
  meta.per_slice.resize(static_cast<std::size_t>(slices.slice_count()));
  for (Eigen::Index k = 0; k < out.slice_count(); ++k) {
    auto block = out.slice(k);
    auto& stats = meta.per_slice[static_cast<std::size_t>(k)];
    for (const auto& group : meta.groups) {
      const GroupStats s = group.kind == GroupKind::bounded ? GroupStats{}
                                                            : compute_stats(gather(block, group), meta.method);
      apply_group(block, group, s, meta);
      stats.push_back(s);
    }
  }
  summarize_degenerate(meta);
  out.set_scaling(std::move(meta));
  return out;
}

SliceTensor scale_then_slice(const std::vector<Eigen::VectorXd>& channels, const SliceSpec& spec,
                             const ScalerConfig& config) {
  SliceTensor raw = make_slices(channels, spec);
  ScalingMeta meta = empty_meta(config, raw.channel_names());
  meta.global = true;

  const Eigen::Index length = channels.front().size();
  const Eigen::Index span = length - spec.first_start;
  Eigen::MatrixXd series(span, static_cast<Eigen::Index>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    series.col(static_cast<Eigen::Index>(c)) = channels[c].tail(span);
  }
  std::vector<GroupStats> global;
  for (const auto& group : meta.groups) {
    global.push_back(group.kind == GroupKind::bounded ? GroupStats{} : compute_stats(gather(series, group), meta.method));
  }
  for (Eigen::Index k = 0; k < raw.slice_count(); ++k) {
    auto block = raw.slice(k);
    for (std::size_t g = 0; g < meta.groups.size(); ++g) apply_group(block, meta.groups[g], global[g], meta);
  }
  meta.per_slice.assign(static_cast<std::size_t>(raw.slice_count()), global);
  meta.warnings.push_back("global scaling reads future bars; slice-then-scale is recommended");
  summarize_degenerate(meta);
  raw.set_scaling(std::move(meta));
  return raw;
}

SliceTensor invert_scaling(const SliceTensor& slices) {
  if (!slices.scaling()) throw std::invalid_argument("invert_scaling: missing metadata");
  const ScalingMeta& meta = *slices.scaling();
  if (static_cast<Eigen::Index>(meta.per_slice.size()) != slices.slice_count()) {
    throw std::invalid_argument("invert_scaling: metadata does not match slice count");
  }
  SliceTensor out = slices;
  for (Eigen::Index k = 0; k < out.slice_count(); ++k) {
    auto block = out.slice(k);
    const auto& stats = meta.per_slice[static_cast<std::size_t>(k)];
    for (std::size_t g = 0; g < meta.groups.size(); ++g) invert_group(block, meta.groups[g], stats[g], meta);
  }
  out.clear_scaling();
  return out;
}

}  // namespace tslab
