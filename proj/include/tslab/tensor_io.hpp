#pragma once

#include "tslab/windowing.hpp"

#include <json.hpp>

#include <filesystem>

namespace tslab {

nlohmann::json to_json(const ScalingMeta& meta);
ScalingMeta scaling_meta_from_json(const nlohmann::json& j);

/// Metadata document for a tensor whose raw values live in `blob_name`.
nlohmann::json tensor_metadata(const SliceTensor& tensor, const std::string& blob_name);

/// Writes `<stem>.bin` (little-endian float64, row-major (m, s, i)) and
/// `<stem>.json`. Keys of `extra` are merged into the metadata document.
/// Returns the paths written.
std::vector<std::filesystem::path> write_tensor(const std::filesystem::path& dir, const std::string& stem,
                                                const SliceTensor& tensor, const nlohmann::json& extra = {});

/// Reads a tensor from its metadata document; the blob path is resolved
/// relative to the metadata file.
SliceTensor read_tensor(const std::filesystem::path& metadata_path);

/// Flattened (m, s*i) form as CSV with an end_index column and `<channel>_t<k>` headers.
void write_flat_csv(const std::filesystem::path& path, const SliceTensor& tensor);

}  // namespace tslab
