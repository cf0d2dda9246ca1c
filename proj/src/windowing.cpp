#include "tslab/windowing.hpp"

#include "tslab/error.hpp"
#include "tslab/indicators.hpp"

#include <cstdlib>
#include <stdexcept>

namespace tslab {

void SliceSpec::validate() const {
  if (lookback <= 1) throw std::invalid_argument("slice lookback must be greater than 1");
  if (stride < 1) throw std::invalid_argument("slice stride must be at least 1");
  if (label_horizon < 0) throw std::invalid_argument("label horizon must be non-negative");
  if (first_start < 0) throw std::invalid_argument("first_start must be non-negative");
}

Eigen::Index SliceSpec::slice_count(Eigen::Index length) const {
  const Eigen::Index usable = length - first_start - lookback - label_horizon;
  return usable < 0 ? 0 : usable / stride + 1;
}

SliceTensor::SliceTensor(Storage data, Eigen::Index timesteps, Eigen::Index channels,
                         std::vector<Eigen::Index> end_indices, std::vector<std::string> channel_names)
    : data_(std::move(data)),
      timesteps_(timesteps),
      channels_(channels),
      end_indices_(std::move(end_indices)),
      channel_names_(std::move(channel_names)) {
  if (data_.cols() != timesteps_ * channels_) throw std::invalid_argument("tensor: column count != timesteps*channels");
  if (static_cast<Eigen::Index>(end_indices_.size()) != data_.rows()) {
    throw std::invalid_argument("tensor: end index count != slice count");
  }
  if (channel_names_.empty()) {
    for (Eigen::Index c = 0; c < channels_; ++c) channel_names_.push_back("ch" + std::to_string(c));
  }
  if (static_cast<Eigen::Index>(channel_names_.size()) != channels_) {
    throw std::invalid_argument("tensor: channel name count != channel count");
  }
  for (std::size_t k = 1; k < end_indices_.size(); ++k) {
    if (end_indices_[k] - end_indices_[k - 1] != end_indices_[1] - end_indices_[0] ||
        end_indices_[k] <= end_indices_[k - 1]) {
      throw std::invalid_argument("tensor: end indices must increase with a uniform gap");
    }
  }
}

Eigen::Index SliceTensor::channel_index(const std::string& name) const {
  for (std::size_t c = 0; c < channel_names_.size(); ++c) {
    if (channel_names_[c] == name) return static_cast<Eigen::Index>(c);
  }
  throw std::invalid_argument("tensor has no channel '" + name + "'");
}

Eigen::Index SliceTensor::stride() const {
  return end_indices_.size() < 2 ? 1 : end_indices_[1] - end_indices_[0];
}

SliceTensor make_slices(const std::vector<Eigen::VectorXd>& channels, const SliceSpec& spec) {
  spec.validate();
  if (channels.empty()) throw std::invalid_argument("make_slices: no channels");
  if (!spec.channels.empty() && spec.channels.size() != channels.size()) {
    throw std::invalid_argument("make_slices: channel names do not match channel count");
  }
  const Eigen::Index length = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != length) throw std::invalid_argument("make_slices: channel lengths differ");
  }
  const Eigen::Index count = spec.slice_count(length);
  if (count == 0) {
    throw std::invalid_argument("make_slices: series of length " + std::to_string(length) +
                                " too short for lookback " + std::to_string(spec.lookback) + " + horizon " +
                                std::to_string(spec.label_horizon));
  }

  const Eigen::Index n = spec.lookback;
  const auto width = static_cast<Eigen::Index>(channels.size());
  SliceTensor::Storage data(count, n * width);
  std::vector<Eigen::Index> ends(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index start = spec.first_start + k * spec.stride;
    ends[static_cast<std::size_t>(k)] = start + n - 1;
    for (Eigen::Index t = 0; t < n; ++t) {
      for (Eigen::Index c = 0; c < width; ++c) {
        const double v = channels[static_cast<std::size_t>(c)][start + t];
        if (!is_defined(v)) {
          throw DataError("make_slices: slice " + std::to_string(k) + " touches undefined value at index " +
                          std::to_string(start + t) + " of channel " + std::to_string(c));
        }
        data(k, t * width + c) = v;
      }
    }
  }
  return SliceTensor(std::move(data), n, width, std::move(ends), spec.channels);
}

Eigen::Index first_defined_start(const std::vector<Eigen::VectorXd>& channels) {
  Eigen::Index start = 0;
  for (const auto& ch : channels) {
    Eigen::Index i = ch.size();
    for (Eigen::Index j = ch.size(); j-- > 0;) {
      if (!is_defined(ch[j])) break;
      i = j;
    }
    start = std::max(start, i);
  }
  return start;
}

Eigen::MatrixXd flatten(const SliceTensor& slices) { return slices.data(); }

SliceTensor unflatten(const Eigen::Ref<const Eigen::MatrixXd>& flat, Eigen::Index timesteps, Eigen::Index channels,
                      std::vector<Eigen::Index> end_indices, std::vector<std::string> channel_names) {
  if (timesteps <= 0 || channels <= 0 || flat.cols() != timesteps * channels) {
    throw std::invalid_argument("unflatten: shape mismatch");
  }
  if (end_indices.empty()) {
    for (Eigen::Index k = 0; k < flat.rows(); ++k) end_indices.push_back(k + timesteps - 1);
  }
  return SliceTensor(flat, timesteps, channels, std::move(end_indices), std::move(channel_names));
}

double slice_overlap_fraction(Eigen::Index a, Eigen::Index b, const SliceSpec& spec,
                              std::optional<Eigen::Index> slice_count) {
  spec.validate();
  if (a < 0 || b < 0 || (slice_count && (a >= *slice_count || b >= *slice_count))) {
    throw std::invalid_argument("slice_overlap_fraction: invalid slice index");
  }
  const Eigen::Index shared = spec.lookback - std::abs(a - b) * spec.stride;
  return shared <= 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(spec.lookback);
}

}  // namespace tslab
