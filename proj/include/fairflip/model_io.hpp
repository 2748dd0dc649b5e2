#pragma once

#include <string>

#include "fairflip/classifiers.hpp"

namespace fairflip {

/// Model wire format:
/// {"kind": "logistic"|"svm", "beta0"/"b": real, "beta"/"w": [...],
///  "lambda"/"C": real, "standardization": {group: {column: {mean, std}}},
///  "columns": [...], "group_values": {"ADV": ..., "DIS": ...}}
/// Reals survive a round trip exactly (shortest round-trip decimals).
std::string model_to_json(const AnyModel& model);
AnyModel model_from_json(const std::string& text);

void attach_dataset_metadata(AnyModel& model, const LabeledDataset& ds,
                             const StandardizationParams& params);

}  // namespace fairflip
