#include "tslab/tensor_io.hpp"

#include "tslab/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tslab {

using nlohmann::json;

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap64(v);
  }
}

ScaleMethod parse_method(const std::string& s) {
  if (s == "minmax") return ScaleMethod::minmax;
  if (s == "standardize") return ScaleMethod::standardize;
  throw DataError("unknown scaling method '" + s + "'");
}

GroupKind parse_group_kind(const std::string& s) {
  if (s == "overlaid") return GroupKind::overlaid;
  if (s == "bounded") return GroupKind::bounded;
  if (s == "separate") return GroupKind::separate;
  throw DataError("unknown scaling group kind '" + s + "'");
}

}  // namespace

const char* to_string(ScaleMethod m) { return m == ScaleMethod::minmax ? "minmax" : "standardize"; }

const char* to_string(GroupKind g) {
  switch (g) {
    case GroupKind::overlaid: return "overlaid";
    case GroupKind::bounded: return "bounded";
    case GroupKind::separate: return "separate";
  }
  return "?";
}

json to_json(const ScalingMeta& meta) {
  json groups = json::array();
  for (const auto& g : meta.groups) {
    groups.push_back({{"kind", to_string(g.kind)}, {"channels", g.channels}, {"bound", g.bound}});
  }
  json stats = json::array();
  for (const auto& slice : meta.per_slice) {
    json row = json::array();
    for (const auto& s : slice) row.push_back({s.first, s.second, s.degenerate});
    stats.push_back(std::move(row));
  }
  return {{"method", to_string(meta.method)},
          {"feature_range", {meta.range_min, meta.range_max}},
          {"global", meta.global},
          {"recommended", !meta.global},
          {"groups", std::move(groups)},
          {"stats_layout", meta.method == ScaleMethod::minmax ? "[x_min, x_max, degenerate]"
                                                               : "[mean, sigma, degenerate]"},
          {"per_slice", std::move(stats)},
          {"warnings", meta.warnings}};
}

ScalingMeta scaling_meta_from_json(const json& j) {
  ScalingMeta meta;
  meta.method = parse_method(j.at("method").get<std::string>());
  meta.range_min = j.at("feature_range").at(0).get<double>();
  meta.range_max = j.at("feature_range").at(1).get<double>();
  meta.global = j.at("global").get<bool>();
  for (const auto& g : j.at("groups")) {
    meta.groups.push_back({parse_group_kind(g.at("kind").get<std::string>()),
                           g.at("channels").get<std::vector<Eigen::Index>>(), g.at("bound").get<double>()});
  }
  for (const auto& row : j.at("per_slice")) {
    std::vector<GroupStats> slice;
    for (const auto& s : row) slice.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<bool>()});
    meta.per_slice.push_back(std::move(slice));
  }
  meta.warnings = j.at("warnings").get<std::vector<std::string>>();
  return meta;
}

json tensor_metadata(const SliceTensor& tensor, const std::string& blob_name) {
  json meta = {
      {"shape", {tensor.slice_count(), tensor.timesteps(), tensor.channel_count()}},
      {"dtype", "float64"},
      {"byte_order", "little"},
      {"layout", "row-major (slices, timesteps, channels)"},
      {"blob", blob_name},
      {"channel_names", tensor.channel_names()},
      {"end_indices", tensor.end_indices()},
      {"stride", tensor.stride()},
  };
  meta["scaling"] = tensor.scaling() ? to_json(*tensor.scaling()) : json(nullptr);
  return meta;
}

std::vector<std::filesystem::path> write_tensor(const std::filesystem::path& dir, const std::string& stem,
                                                const SliceTensor& tensor, const json& extra) {
  std::filesystem::create_directories(dir);
  const auto blob_path = dir / (stem + ".bin");
  const auto meta_path = dir / (stem + ".json");

  std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
  if (!blob) throw std::runtime_error("cannot write " + blob_path.string());
  const auto& data = tensor.data();
  std::vector<std::uint64_t> words(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    words[static_cast<std::size_t>(i)] = to_little_endian(std::bit_cast<std::uint64_t>(data.data()[i]));
  }
  blob.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
  if (!blob) throw std::runtime_error("failed writing " + blob_path.string());

  json meta = tensor_metadata(tensor, blob_path.filename().string());
  for (const auto& [key, value] : extra.items()) meta[key] = value;
  std::ofstream out(meta_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + meta_path.string());
  out << meta.dump(2) << '\n';
  return {blob_path, meta_path};
}

SliceTensor read_tensor(const std::filesystem::path& metadata_path) {
  std::ifstream in(metadata_path);
  if (!in) throw DataError("cannot open " + metadata_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(metadata_path.string() + ": " + e.what());
  }
  const auto shape = meta.at("shape").get<std::vector<Eigen::Index>>();
  if (shape.size() != 3) throw DataError(metadata_path.string() + ": shape must have 3 entries");
  const auto blob_path = metadata_path.parent_path() / meta.at("blob").get<std::string>();

  const Eigen::Index count = shape[0] * shape[1] * shape[2];
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw DataError("cannot open " + blob_path.string());
  std::vector<std::uint64_t> words(static_cast<std::size_t>(count));
  blob.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(count * 8));
  if (blob.gcount() != count * 8 || blob.peek() != std::char_traits<char>::eof()) {
    throw DataError(blob_path.string() + ": size does not match shape");
  }
  SliceTensor::Storage data(shape[0], shape[1] * shape[2]);
  for (Eigen::Index i = 0; i < count; ++i) {
    data.data()[i] = std::bit_cast<double>(to_little_endian(words[static_cast<std::size_t>(i)]));
  }
  SliceTensor tensor(std::move(data), shape[1], shape[2], meta.at("end_indices").get<std::vector<Eigen::Index>>(),
                     meta.at("channel_names").get<std::vector<std::string>>());
  if (!meta.at("scaling").is_null()) tensor.set_scaling(scaling_meta_from_json(meta.at("scaling")));
  return tensor;
}

void write_flat_csv(const std::filesystem::path& path, const SliceTensor& tensor) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "end_index";
  for (Eigen::Index t = 0; t < tensor.timesteps(); ++t) {
    for (const auto& name : tensor.channel_names()) out << ',' << name << "_t" << t;
  }
  out << '\n';
  out.precision(17);
  for (Eigen::Index k = 0; k < tensor.slice_count(); ++k) {
    out << tensor.end_indices()[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < tensor.data().cols(); ++j) out << ',' << tensor.data()(k, j);
    out << '\n';
  }
}

}  // namespace tslab
