#include "fairflip/explain_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairflip/rng.hpp"
#include "json.hpp"

namespace fairflip {

namespace {

using nlohmann::json;

std::size_t class_index(FlipClass c) { return static_cast<std::size_t>(c); }

FlipClass majority(const std::array<std::size_t, 3>& counts) {
  // Argmax with ties resolved toward NoChange, then Positive.
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (counts[k] > counts[best]) best = k;
  return static_cast<FlipClass>(best);
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

SplitChoice best_split(const Matrix& x, const std::vector<FlipClass>& classes,
                       const std::vector<std::size_t>& rows, std::size_t min_leaf) {
  SplitChoice best;
  const std::size_t n = rows.size();
  std::array<std::size_t, 3> total = {0, 0, 0};
  for (std::size_t r : rows) ++total[class_index(classes[r])];
  const double parent = gini_impurity(total) * static_cast<double>(n);

  std::vector<std::size_t> order(rows);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
      return a < b;
    });
    std::array<std::size_t, 3> left = {0, 0, 0};
    for (std::size_t k = 0; k + 1 < n; ++k) {
      ++left[class_index(classes[order[k]])];
      const double v = x(order[k], f);
      const double next = x(order[k + 1], f);
      if (v == next) continue;
      const std::size_t nl = k + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      std::array<std::size_t, 3> right = {total[0] - left[0], total[1] - left[1],
                                          total[2] - left[2]};
      const double w = gini_impurity(left) * static_cast<double>(nl) +
                       gini_impurity(right) * static_cast<double>(nr);
      if (w < parent - 1e-12 && (!best.found || w < best.impurity - 1e-12)) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (v + next);
        best.impurity = w;
      }
    }
  }
  return best;
}

std::unique_ptr<TreeNode> grow(const Matrix& x, const std::vector<FlipClass>& classes,
                               const std::vector<std::size_t>& rows, std::size_t depth_left,
                               std::size_t min_leaf) {
  auto node = std::make_unique<TreeNode>();
  for (std::size_t r : rows) ++node->counts[class_index(classes[r])];
  node->cls = majority(node->counts);
  if (depth_left == 0 || rows.size() < 2 * min_leaf) return node;
  const SplitChoice split = best_split(x, classes, rows, min_leaf);
  if (!split.found) return node;
  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows)
    (x(r, split.feature) < split.threshold ? left_rows : right_rows).push_back(r);
  node->feature = static_cast<int>(split.feature);
  node->threshold = split.threshold;
  node->left = grow(x, classes, left_rows, depth_left - 1, min_leaf);
  node->right = grow(x, classes, right_rows, depth_left - 1, min_leaf);
  return node;
}

const TreeNode* route(const TreeNode* node, const double* row) {
  while (!node->is_leaf())
    node = row[node->feature] < node->threshold ? node->left.get() : node->right.get();
  return node;
}

void render_node(const TreeNode* node, const std::vector<std::string>& names, std::size_t depth,
                 std::string& out) {
  std::string indent;
  for (std::size_t i = 0; i < depth; ++i) indent += "| ";
  if (node->is_leaf()) {
    out += indent + "-> " + flip_class_name(node->cls) + " [" + std::to_string(node->counts[0]) +
           " " + std::to_string(node->counts[1]) + " " + std::to_string(node->counts[2]) + "]\n";
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", node->threshold);
  out += indent + names[static_cast<std::size_t>(node->feature)] + " < " + buf + "\n";
  render_node(node->left.get(), names, depth + 1, out);
  render_node(node->right.get(), names, depth + 1, out);
}

json node_to_json(const TreeNode* node, const std::vector<std::string>& names) {
  json j;
  if (node->is_leaf()) {
    j["feature"] = nullptr;
    j["threshold"] = nullptr;
    j["left"] = nullptr;
    j["right"] = nullptr;
    j["class"] = flip_class_name(node->cls);
  } else {
    j["feature"] = names[static_cast<std::size_t>(node->feature)];
    j["threshold"] = node->threshold;
    j["left"] = node_to_json(node->left.get(), names);
    j["right"] = node_to_json(node->right.get(), names);
    j["class"] = nullptr;
  }
  j["counts"] = node->counts;
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const json& j, const std::vector<std::string>& names) {
  auto node = std::make_unique<TreeNode>();
  const auto counts = j.at("counts").get<std::vector<std::size_t>>();
  if (counts.size() != 3) raise(ErrorKind::Data, "tree JSON: counts must have three entries");
  std::copy(counts.begin(), counts.end(), node->counts.begin());
  if (j.at("feature").is_null()) {
    node->cls = flip_class_from_name(j.at("class").get<std::string>());
    return node;
  }
  const std::string fname = j.at("feature").get<std::string>();
  const auto it = std::find(names.begin(), names.end(), fname);
  if (it == names.end()) raise(ErrorKind::Data, "tree JSON: unknown feature '" + fname + "'");
  node->feature = static_cast<int>(it - names.begin());
  node->threshold = j.at("threshold").get<double>();
  node->left = node_from_json(j.at("left"), names);
  node->right = node_from_json(j.at("right"), names);
  node->cls = majority(node->counts);
  return node;
}

}  // namespace

double gini_impurity(const std::array<std::size_t, 3>& counts) {
  const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
  if (n == 0.0) return 0.0;
  double s = 1.0;
  for (std::size_t c : counts) {
    const double f = static_cast<double>(c) / n;
    s -= f * f;
  }
  return s;
}

const char* flip_class_name(FlipClass c) {
  switch (c) {
    case FlipClass::NoChange: return "NO_CHANGE";
    case FlipClass::Positive: return "POSITIVE";
    case FlipClass::Negative: return "NEGATIVE";
  }
  return "NO_CHANGE";
}

FlipClass flip_class_from_name(const std::string& name) {
  if (name == "NO_CHANGE") return FlipClass::NoChange;
  if (name == "POSITIVE") return FlipClass::Positive;
  if (name == "NEGATIVE") return FlipClass::Negative;
  raise(ErrorKind::Data, "unknown flip class '" + name + "'");
}

std::vector<FlipClass> build_flip_labels(const LabeledDataset& ds, const DebiasResult& result) {
  const auto& yt = result.assignment.y_tilde;
  if (yt.size() != ds.num_rows())
    raise(ErrorKind::InvalidArgument, "result length does not match the dataset");
  std::vector<FlipClass> out(yt.size());
  for (std::size_t i = 0; i < yt.size(); ++i) {
    if (ds.labels[i] < 0 && yt[i] > 0) out[i] = FlipClass::Positive;
    else if (ds.labels[i] > 0 && yt[i] < 0) out[i] = FlipClass::Negative;
    else out[i] = FlipClass::NoChange;
  }
  return out;
}

std::pair<Matrix, std::vector<std::string>> tree_features(const LabeledDataset& ds) {
  const Matrix& raw = ds.raw_features();
  Matrix x(raw.rows(), raw.cols() + 1);
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    for (std::size_t j = 0; j < raw.cols(); ++j) x(i, j) = raw(i, j);
    x(i, raw.cols()) = ds.group[i] == Group::Dis ? 1.0 : 0.0;
  }
  std::vector<std::string> names = ds.column_names;
  names.push_back("group");
  return {std::move(x), std::move(names)};
}

DecisionTree fit_tree(const Matrix& x, const std::vector<FlipClass>& classes, std::size_t depth,
                      std::size_t min_leaf) {
  if (x.rows() != classes.size())
    raise(ErrorKind::InvalidArgument, "feature rows and class length disagree");
  if (depth < 1 || depth > 5) raise(ErrorKind::InvalidArgument, "depth must lie in 1..5");
  if (min_leaf < 1) raise(ErrorKind::InvalidArgument, "min_leaf must be >= 1");
  if (x.rows() < 2 * min_leaf)
    raise(ErrorKind::InvalidArgument, "fit_tree needs at least 2*min_leaf rows");
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  DecisionTree tree;
  tree.max_depth = depth;
  tree.min_leaf = min_leaf;
  tree.root = grow(x, classes, rows, depth, min_leaf);
  return tree;
}

FlipClass tree_predict(const DecisionTree& tree, const double* row) {
  return route(tree.root.get(), row)->cls;
}

double tree_accuracy(const DecisionTree& tree, const Matrix& x,
                     const std::vector<FlipClass>& classes) {
  if (x.rows() == 0) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (tree_predict(tree, x.row_ptr(i)) == classes[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

CvReport cross_validate_depth(const Matrix& x, const std::vector<FlipClass>& classes,
                              std::size_t k, std::uint64_t seed, std::size_t min_leaf) {
  if (x.rows() != classes.size())
    raise(ErrorKind::InvalidArgument, "feature rows and class length disagree");
  if (k < 2) raise(ErrorKind::InvalidArgument, "cross-validation needs k >= 2");
  if (x.rows() < k * min_leaf)
    raise(ErrorKind::InvalidArgument, "cross-validation needs at least k*min_leaf rows");

  CvReport report;
  // Stratified fold assignment: shuffle within each class, deal round-robin.
  std::vector<std::size_t> fold(x.rows(), 0);
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < x.rows(); ++i)
      if (class_index(classes[i]) == c) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < k)
      report.warnings.push_back(std::string("class ") +
                                flip_class_name(static_cast<FlipClass>(c)) + " has only " +
                                std::to_string(members.size()) + " rows for " + std::to_string(k) +
                                " folds; distributing best effort");
    rng.shuffle(members);
    for (std::size_t i : members) {
      fold[i] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }

  double best_acc = -1.0;
  for (std::size_t depth = 1; depth <= 5; ++depth) {
    double acc_sum = 0.0;
    std::size_t folds_used = 0;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < x.rows(); ++i)
        (fold[i] == f ? test_rows : train_rows).push_back(i);
      if (test_rows.empty() || train_rows.size() < 2 * min_leaf) continue;
      Matrix xt(train_rows.size(), x.cols());
      std::vector<FlipClass> ct(train_rows.size());
      for (std::size_t r = 0; r < train_rows.size(); ++r) {
        for (std::size_t j = 0; j < x.cols(); ++j) xt(r, j) = x(train_rows[r], j);
        ct[r] = classes[train_rows[r]];
      }
      const DecisionTree tree = fit_tree(xt, ct, depth, min_leaf);
      std::size_t hits = 0;
      for (std::size_t i : test_rows)
        if (tree_predict(tree, x.row_ptr(i)) == classes[i]) ++hits;
      acc_sum += static_cast<double>(hits) / static_cast<double>(test_rows.size());
      ++folds_used;
    }
    const double mean = folds_used ? acc_sum / static_cast<double>(folds_used) : 0.0;
    report.mean_accuracy.push_back(mean);
    if (mean > best_acc + 1e-12) {
      best_acc = mean;
      report.chosen_depth = depth;
    }
  }
  return report;
}

DecisionTree fit_optimal_depth2(const Matrix& x, const std::vector<FlipClass>& classes,
                                std::size_t min_leaf) {
  const std::size_t n = x.rows();
  if (n > 2000) raise(ErrorKind::Size, "fit_optimal_depth2 is limited to n <= 2000");
  if (n != classes.size())
    raise(ErrorKind::InvalidArgument, "feature rows and class length disagree");
  if (n < 2 * min_leaf)
    raise(ErrorKind::InvalidArgument, "fit_optimal_depth2 needs at least 2*min_leaf rows");

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  // Best single-leaf/one-split refinement of a row subset, by training hits.
  auto best_child = [&](const std::vector<std::size_t>& rows) -> std::size_t {
    std::array<std::size_t, 3> total = {0, 0, 0};
    for (std::size_t r : rows) ++total[class_index(classes[r])];
    std::size_t best_hits = *std::max_element(total.begin(), total.end());
    if (rows.size() < 2 * min_leaf) return best_hits;
    std::vector<std::size_t> order(rows);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
        return a < b;
      });
      std::array<std::size_t, 3> left = {0, 0, 0};
      for (std::size_t kk = 0; kk + 1 < order.size(); ++kk) {
        ++left[class_index(classes[order[kk]])];
        if (x(order[kk], f) == x(order[kk + 1], f)) continue;
        const std::size_t nl = kk + 1, nr = order.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const std::size_t hits =
            *std::max_element(left.begin(), left.end()) +
            std::max({total[0] - left[0], total[1] - left[1], total[2] - left[2]});
        best_hits = std::max(best_hits, hits);
      }
    }
    return best_hits;
  };

  // Scan all root splits, score by total achievable hits at depth 2.
  std::size_t best_hits = 0;
  bool found = false;
  std::size_t best_f = 0;
  double best_t = 0.0;
  {
    std::array<std::size_t, 3> total = {0, 0, 0};
    for (std::size_t r : all) ++total[class_index(classes[r])];
    best_hits = *std::max_element(total.begin(), total.end());  // single leaf
  }
  std::vector<std::size_t> order(all);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
      return a < b;
    });
    for (std::size_t kk = 0; kk + 1 < n; ++kk) {
      if (x(order[kk], f) == x(order[kk + 1], f)) continue;
      const std::size_t nl = kk + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double thr = 0.5 * (x(order[kk], f) + x(order[kk + 1], f));
      std::vector<std::size_t> lrows(order.begin(), order.begin() + static_cast<long>(nl));
      std::vector<std::size_t> rrows(order.begin() + static_cast<long>(nl), order.end());
      const std::size_t hits = best_child(lrows) + best_child(rrows);
      if (hits > best_hits) {
        best_hits = hits;
        best_f = f;
        best_t = thr;
        found = true;
      }
    }
  }

  if (!found) return fit_tree(x, classes, 1, min_leaf);

  // Materialize the chosen root with accuracy-optimal depth-1 children, the
  // same criterion the scan scored.
  auto build_child = [&](const std::vector<std::size_t>& rows) {
    auto node = std::make_unique<TreeNode>();
    for (std::size_t r : rows) ++node->counts[class_index(classes[r])];
    node->cls = majority(node->counts);
    if (rows.size() < 2 * min_leaf) return node;
    std::size_t leaf_hits = *std::max_element(node->counts.begin(), node->counts.end());
    std::size_t child_hits = leaf_hits;
    std::size_t cf = 0;
    double ct = 0.0;
    bool split_found = false;
    std::vector<std::size_t> ord(rows);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
        if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
        return a < b;
      });
      std::array<std::size_t, 3> left = {0, 0, 0};
      for (std::size_t kk = 0; kk + 1 < ord.size(); ++kk) {
        ++left[class_index(classes[ord[kk]])];
        if (x(ord[kk], f) == x(ord[kk + 1], f)) continue;
        const std::size_t nl = kk + 1, nr = ord.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const std::size_t hits =
            *std::max_element(left.begin(), left.end()) +
            std::max({node->counts[0] - left[0], node->counts[1] - left[1],
                      node->counts[2] - left[2]});
        if (hits > child_hits) {
          child_hits = hits;
          cf = f;
          ct = 0.5 * (x(ord[kk], f) + x(ord[kk + 1], f));
          split_found = true;
        }
      }
    }
    if (!split_found) return node;
    node->feature = static_cast<int>(cf);
    node->threshold = ct;
    std::vector<std::size_t> lr, rr;
    for (std::size_t r : rows) (x(r, cf) < ct ? lr : rr).push_back(r);
    auto make_leaf = [&](const std::vector<std::size_t>& sub) {
      auto leaf = std::make_unique<TreeNode>();
      for (std::size_t r : sub) ++leaf->counts[class_index(classes[r])];
      leaf->cls = majority(leaf->counts);
      return leaf;
    };
    node->left = make_leaf(lr);
    node->right = make_leaf(rr);
    return node;
  };

  DecisionTree tree;
  tree.max_depth = 2;
  tree.min_leaf = min_leaf;
  auto node = std::make_unique<TreeNode>();
  for (std::size_t r : all) ++node->counts[class_index(classes[r])];
  node->cls = majority(node->counts);
  node->feature = static_cast<int>(best_f);
  node->threshold = best_t;
  std::vector<std::size_t> lrows, rrows;
  for (std::size_t r : all) (x(r, best_f) < best_t ? lrows : rrows).push_back(r);
  node->left = build_child(lrows);
  node->right = build_child(rrows);
  tree.root = std::move(node);
  return tree;
}

std::string render_text(const DecisionTree& tree, const std::vector<std::string>& column_names) {
  std::string out;
  render_node(tree.root.get(), column_names, 0, out);
  return out;
}

std::string tree_to_json(const DecisionTree& tree, const std::vector<std::string>& column_names) {
  return node_to_json(tree.root.get(), column_names).dump(2);
}

DecisionTree tree_from_json(const std::string& text, const std::vector<std::string>& column_names) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(ErrorKind::Data, std::string("tree JSON parse failure: ") + e.what());
  }
  DecisionTree tree;
  tree.root = node_from_json(j, column_names);
  return tree;
}

}  // namespace fairflip
