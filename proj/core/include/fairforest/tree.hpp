#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairforest/dataset.hpp"
#include "fairforest/split.hpp"

namespace fairforest {

struct TreeConfig {
  CriterionConfig criterion;
  int max_depth = -1;          // -1 = unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int feature_subsample = 0;   // candidate features scored per node; 0 = all
  bool protected_is_candidate = true;
};

/// One node of an induced tree, stored flat in pre-order. Internal nodes keep
/// the distribution/mean of their own rows so that routing can fall back when
/// a categorical code had no training rows in this subtree.
struct TreeNode {
  int feature = -1;  // -1 = leaf
  SplitKind kind = SplitKind::numeric_threshold;
  double threshold = 0.0;
  // numeric: [left, right]; categorical: one entry per code, -1 = absent
  std::vector<std::int32_t> children;
  double weight = 0.0;      // |rows| / |root rows|
  double label_gain = 0.0;  // G^l of the chosen split; MDI input
  std::int64_t support = 0;
  std::vector<double> distribution;  // classification: class frequencies
  double mean = 0.0;                 // regression: label mean

  bool is_leaf() const { return feature < 0; }
};

struct Prediction {
  int cls = -1;                    // classification: argmax class, ties to lower index
  double value = 0.0;              // regression value, or cls as a double
  std::span<const double> scores;  // classification: leaf class frequencies
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, TreeConfig config, std::uint64_t fingerprint,
               int label_col, int protected_col, bool classification, int n_classes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeConfig& config() const { return config_; }
  std::uint64_t schema_fingerprint() const { return fingerprint_; }
  int label_column() const { return label_col_; }
  int protected_column() const { return protected_col_; }
  bool classification() const { return classification_; }
  int n_classes() const { return n_classes_; }

  int leaf_count() const;
  int internal_count() const;
  int depth() const;

  /// Throws ModelError when the dataset's schema fingerprint differs.
  void check_compatible(const Dataset& ds) const;

  /// Node id reached by routing the row (a node whose payload answers the
  /// query; an internal node when an absent categorical branch was hit).
  std::int32_t route(const Dataset& ds, std::int32_t row) const;

  Prediction predict(const Dataset& ds, std::int32_t row) const;

 private:
  std::vector<TreeNode> nodes_;
  TreeConfig config_;
  std::uint64_t fingerprint_ = 0;
  int label_col_ = -1;
  int protected_col_ = -1;
  bool classification_ = true;
  int n_classes_ = 0;
};

/// Greedy recursive induction over a training view. The protected column (-1
/// = none) enters the gain as the fairness penalty when the criterion config
/// enables fairness, and stays a split candidate unless the config excludes
/// it. Stops on purity, depth, sample limits, or best fair gain <= 0.
DecisionTree induce(const SubsetView& train, int label_col, int protected_col,
                    const TreeConfig& cfg, std::uint64_t rng_seed);

/// As induce, but over an explicit row list that may contain duplicates
/// (bootstrap resamples).
DecisionTree induce_rows(const Dataset& ds, std::vector<std::int32_t> rows, int label_col,
                         int protected_col, const TreeConfig& cfg, std::uint64_t rng_seed);

/// Indented one-node-per-line rendering; leaves print their distribution or
/// mean and support. Stable format: tests and `inspect` rely on the "leaf:"
/// and "split:" prefixes.
std::string print_tree(const DecisionTree& tree, std::span<const FeatureSchema> schema);
inline std::string print_tree(const DecisionTree& tree, const Dataset& ds) {
  return print_tree(tree, std::span<const FeatureSchema>(ds.schema()));
}

/// Per-feature sum over internal nodes of node_weight * label_gain, indexed
/// by column; unused features are 0.
std::vector<double> mdi_contributions(const DecisionTree& tree, int column_count);

}  // namespace fairforest
