#pragma once

#include "tslab/labeling.hpp"
#include "tslab/market_data.hpp"
#include "tslab/probe.hpp"
#include "tslab/scaling.hpp"
#include "tslab/windowing.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tslab {

inline constexpr const char* kToolVersion = "1.0.0";

struct IndicatorSpec {
  std::string name;  ///< sma, ema, max, min, rsi
  Eigen::Index period = 0;
  std::string channel() const { return name + std::to_string(period); }
};

struct LabelConfig {
  LabelFamily family = LabelFamily::nbar_updown;
  Eigen::Index horizon = 1;
  Eigen::Index ma_period = 20;
  QClassThresholds qclass;
  TrendMethod trend_method = TrendMethod::regression;
  std::optional<double> direction_threshold;
};

struct SplitConfig {
  std::array<double, 3> fractions{0.8, 0.2, 0.0};
  std::uint64_t seed = 42;
  /// nullopt = automatic embargo (see auto_embargo).
  std::optional<Eigen::Index> embargo;
  bool anti_pattern = false;
};

struct ProbeConfig {
  Eigen::Index hidden_units = 32;
  bool use_bias = true;
  TrainConfig train;
};

struct PipelineConfig {
  std::filesystem::path input;
  CsvSchema schema;
  std::vector<IndicatorSpec> indicators;
  /// first_start is derived at run time and ignored here.
  SliceSpec slice;
  /// false applies one global scaling before slicing.
  bool slice_first = true;
  ScalerConfig scaler;
  /// When false the scaler groups are derived from channel taxonomy.
  bool explicit_groups = false;
  LabelConfig label;
  SplitConfig split;
  bool balance = false;
  std::optional<ProbeConfig> probe;
  bool export_flat_csv = false;
  std::filesystem::path output_dir = "out";
};

/// Structural and cross-field checks; an empty result means valid.
std::vector<std::string> validate_config(const nlohmann::json& document);
/// Reads the file and validates it; unreadable or unparseable files are
/// reported as errors rather than thrown.
std::vector<std::string> validate_config(const std::filesystem::path& path);

/// Throws ConfigError listing every problem.
PipelineConfig config_from_json(const nlohmann::json& document);
nlohmann::json to_json(const PipelineConfig& config);

/// Parses the file; a relative input path is resolved against the config
/// file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

/// Built-in channels: open, high, low, close, volume, return, logreturn.
/// Indicator channels are named `<name><period>`.
std::vector<std::string> available_channels(const PipelineConfig& config);

/// Values of one channel aligned to bar index: a built-in name or an
/// indicator written `<name><period>` (e.g. sma5, rsi14). Undefined leading
/// values are NaN.
Eigen::VectorXd build_channel(const BarSeries& series, const std::string& name);

struct DatasetManifest {
  nlohmann::json document;
  std::vector<std::filesystem::path> files;
};

/// Ingest, indicators, slice, scale, label, split, balance, ADF summary,
/// optional probe, then writes tensor.bin/.json, labels.csv, split.json,
/// manifest.json (plus probe_report.json and probe_losses.csv). Stage
/// failures are rethrown with the stage name, and files already written by
/// this run are removed.
DatasetManifest run_pipeline(const PipelineConfig& config);

/// SHA-256 of a file's bytes, lowercase hex.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace tslab
