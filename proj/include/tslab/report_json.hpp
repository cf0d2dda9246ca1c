#pragma once

#include "tslab/adf.hpp"
#include "tslab/labeling.hpp"
#include "tslab/probe.hpp"
#include "tslab/splitting.hpp"

#include <json.hpp>

#include <filesystem>

namespace tslab {

nlohmann::json to_json(const AdfReport& report);
nlohmann::json to_json(const LeakageAudit& audit);
/// Includes the full train permutation and held-out index lists.
nlohmann::json to_json(const SplitPlan& plan);
/// Summary only: family, horizon, params, histogram, warnings.
nlohmann::json label_summary(const LabelVector& labels);
/// NaN precisions become null.
nlohmann::json to_json(const ProbeReport& report);

/// `end_index,value` rows; classes are written as integers.
void write_labels_csv(const std::filesystem::path& path, const LabelVector& labels);
/// `epoch,train_loss,val_loss` rows.
void write_losses_csv(const std::filesystem::path& path, const ProbeReport& report);

/// Aligned plain-text renderings for the CLI.
std::string format_adf(const AdfReport& report);
std::string format_probe(const ProbeReport& report, const std::string& title);

}  // namespace tslab
