#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fairflip/data_model.hpp"
#include "fairflip/flip_optimizer.hpp"
#include "fairflip/matrix.hpp"

namespace fairflip {

enum class FlipClass : std::uint8_t { NoChange = 0, Positive = 1, Negative = 2 };

const char* flip_class_name(FlipClass c);
FlipClass flip_class_from_name(const std::string& name);

struct TreeNode {
  // Internal nodes carry (feature, threshold); leaves carry the class.
  int feature = -1;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;   // feature < threshold
  std::unique_ptr<TreeNode> right;  // feature >= threshold
  FlipClass cls = FlipClass::NoChange;
  std::array<std::size_t, 3> counts = {0, 0, 0};  // [no_change, positive, negative]

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::unique_ptr<TreeNode> root;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 5;
};

struct CvReport {
  std::vector<double> mean_accuracy;  // index d-1 for depth d in 1..5
  std::size_t chosen_depth = 1;
  std::vector<std::string> warnings;
};

/// Per-row flip classes from the original and flipped labels.
std::vector<FlipClass> build_flip_labels(const LabeledDataset& ds, const DebiasResult& result);

/// Raw features plus a trailing 0/1 group indicator (DIS = 1), which lets the
/// tree split on group membership; thresholds stay in raw units.
std::pair<Matrix, std::vector<std::string>> tree_features(const LabeledDataset& ds);

/// Greedy Gini tree: splits at midpoints between consecutive distinct sorted
/// values, accepted only when impurity strictly decreases and both children
/// keep min_leaf rows. Ties break to the lower feature, then lower threshold.
DecisionTree fit_tree(const Matrix& x, const std::vector<FlipClass>& classes, std::size_t depth,
                      std::size_t min_leaf = 5);

FlipClass tree_predict(const DecisionTree& tree, const double* row);
double tree_accuracy(const DecisionTree& tree, const Matrix& x,
                     const std::vector<FlipClass>& classes);

/// Stratified k-fold accuracy per depth 1..5; argmax wins, smaller depth on
/// ties.
CvReport cross_validate_depth(const Matrix& x, const std::vector<FlipClass>& classes,
                              std::size_t k, std::uint64_t seed, std::size_t min_leaf = 5);

/// Exhaustive optimal depth-2 tree (quality cross-check for the greedy fit).
DecisionTree fit_optimal_depth2(const Matrix& x, const std::vector<FlipClass>& classes,
                                std::size_t min_leaf = 5);

std::string render_text(const DecisionTree& tree, const std::vector<std::string>& column_names);
std::string tree_to_json(const DecisionTree& tree, const std::vector<std::string>& column_names);
DecisionTree tree_from_json(const std::string& text, const std::vector<std::string>& column_names);

double gini_impurity(const std::array<std::size_t, 3>& counts);

}  // namespace fairflip
