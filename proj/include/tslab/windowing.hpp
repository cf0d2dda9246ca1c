#pragma once

#include "tslab/scaling_meta.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace tslab {

struct SliceSpec {
  /// Bars per slice; must exceed 1.
  Eigen::Index lookback = 20;
  Eigen::Index stride = 1;
  std::vector<std::string> channels;
  /// Future bars reserved after the last slice for labeling.
  Eigen::Index label_horizon = 0;
  /// Source index of the first bar of slice 0 (skips indicator warm-up).
  Eigen::Index first_start = 0;

  /// Throws std::invalid_argument.
  void validate() const;

  /// floor((T - first_start - lookback - label_horizon) / stride) + 1, or 0.
  Eigen::Index slice_count(Eigen::Index length) const;
};

/// K slices of n timesteps by i channels. Storage is one row per slice with
/// channels interleaved timestep-major, which is also the flattened (K, n*i)
/// form and the on-disk order.
class SliceTensor {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using SliceView = Eigen::Map<const Storage>;
  using MutableSliceView = Eigen::Map<Storage>;

  SliceTensor() = default;
  SliceTensor(Storage data, Eigen::Index timesteps, Eigen::Index channels, std::vector<Eigen::Index> end_indices,
              std::vector<std::string> channel_names);

  Eigen::Index slice_count() const { return data_.rows(); }
  Eigen::Index timesteps() const { return timesteps_; }
  Eigen::Index channel_count() const { return channels_; }

  double operator()(Eigen::Index k, Eigen::Index t, Eigen::Index c) const { return data_(k, t * channels_ + c); }
  double& operator()(Eigen::Index k, Eigen::Index t, Eigen::Index c) { return data_(k, t * channels_ + c); }

  /// (timesteps x channels) view of slice k.
  SliceView slice(Eigen::Index k) const { return SliceView(data_.row(k).data(), timesteps_, channels_); }
  MutableSliceView slice(Eigen::Index k) { return MutableSliceView(data_.row(k).data(), timesteps_, channels_); }

  const Storage& data() const { return data_; }
  const std::vector<Eigen::Index>& end_indices() const { return end_indices_; }
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  Eigen::Index channel_index(const std::string& name) const;

  const std::optional<ScalingMeta>& scaling() const { return scaling_; }
  void set_scaling(ScalingMeta meta) { scaling_ = std::move(meta); }
  void clear_scaling() { scaling_.reset(); }

  /// Gap between consecutive end indices; 1 for fewer than two slices.
  Eigen::Index stride() const;

 private:
  Storage data_;
  Eigen::Index timesteps_ = 0;
  Eigen::Index channels_ = 0;
  std::vector<Eigen::Index> end_indices_;
  std::vector<std::string> channel_names_;
  std::optional<ScalingMeta> scaling_;
};

/// Overlapping windows over aligned channels. Slice k covers source indices
/// [first_start + k*stride, first_start + k*stride + lookback - 1]. Throws
/// std::invalid_argument for mismatched lengths or a too-short series and
/// DataError if an emitted slice touches an undefined (NaN) value.
SliceTensor make_slices(const std::vector<Eigen::VectorXd>& channels, const SliceSpec& spec);

/// Smallest first_start such that no slice touches a leading undefined value.
Eigen::Index first_defined_start(const std::vector<Eigen::VectorXd>& channels);

/// (K, n*i) copy of the tensor data.
Eigen::MatrixXd flatten(const SliceTensor& slices);

/// Inverse of flatten; `end_indices` defaults to 0..K-1 offset by timesteps-1.
SliceTensor unflatten(const Eigen::Ref<const Eigen::MatrixXd>& flat, Eigen::Index timesteps,
                      Eigen::Index channels, std::vector<Eigen::Index> end_indices = {},
                      std::vector<std::string> channel_names = {});

/// Fraction of the lookback shared by slices a and b.
double slice_overlap_fraction(Eigen::Index a, Eigen::Index b, const SliceSpec& spec,
                              std::optional<Eigen::Index> slice_count = std::nullopt);

}  // namespace tslab
