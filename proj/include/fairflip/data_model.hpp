#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairflip/matrix.hpp"

namespace fairflip {

enum class Group : std::uint8_t { Adv = 0, Dis = 1 };

/// Column roles for CSV ingestion. The two category values identify the
/// protected subgroups; the first listed wins the ADV tag on an exact
/// positive-rate tie.
struct CsvSchema {
  std::string group_column;
  std::string category_a;
  std::string category_b;
  std::string label_column;
  std::string positive_value;
  std::vector<std::string> merit_columns;
};

struct GroupStats {
  std::size_t n_w = 0;
  std::size_t n_b = 0;
  std::size_t p_w = 0;
  std::size_t p_b = 0;

  double pos_rate_w() const { return static_cast<double>(p_w) / static_cast<double>(n_w); }
  double pos_rate_b() const { return static_cast<double>(p_b) / static_cast<double>(n_b); }
};

struct ColumnMoments {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Per-group, per-column standardization parameters (sample stddev, n-1).
struct StandardizationParams {
  std::array<std::vector<ColumnMoments>, 2> per_group;  // indexed by Group

  const ColumnMoments& at(Group g, std::size_t col) const {
    return per_group[static_cast<std::size_t>(g)][col];
  }
};

struct LabeledDataset {
  Matrix features;                   // n x p, raw or standardized per flag
  std::vector<std::int8_t> labels;   // +1 / -1
  std::vector<Group> group;          // per row
  std::vector<std::string> column_names;
  std::vector<std::size_t> merit_columns;
  bool standardized = false;
  std::optional<Matrix> raw_copy;    // original values when standardized
  std::optional<StandardizationParams> std_params;

  // Ingestion bookkeeping so models and reports can speak the user's labels.
  std::string adv_category;
  std::string dis_category;
  std::string negative_value;
  CsvSchema schema;
  std::size_t dropped_rows = 0;

  std::size_t num_rows() const { return labels.size(); }
  std::size_t num_features() const { return features.cols(); }

  GroupStats group_stats() const;
  const Matrix& raw_features() const { return raw_copy ? *raw_copy : features; }

  void validate() const;
};

struct BiasReport {
  double alpha = 0.0;
  Group higher_rate = Group::Adv;
  GroupStats stats;
};

struct PlantedTruth {
  std::vector<double> beta;
  double beta0 = 0.0;
  double shift = 0.0;
  double realized_alpha = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  LabeledDataset dataset;
  PlantedTruth truth;
};

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema);
LabeledDataset load_csv_text(const std::string& text, const CsvSchema& schema);
void write_csv(const LabeledDataset& ds, const std::string& path);
std::string write_csv_text(const LabeledDataset& ds);

/// Standardizes every feature column within each group (mean 0, sample std 1)
/// and stashes the raw matrix plus the parameters on the returned dataset.
std::pair<LabeledDataset, StandardizationParams> standardize_by_group(const LabeledDataset& ds);

BiasReport alpha_bias(const LabeledDataset& ds);

double parity_gap(const std::vector<std::int8_t>& predictions, const std::vector<Group>& group);

/// Mean value of each merit column over positively labeled rows.
std::vector<double> merit_means(const LabeledDataset& ds);

SyntheticDataset generate_synthetic(std::size_t n, std::size_t p, double alpha_target,
                                    double group_fraction, std::uint64_t seed);

}  // namespace fairflip
