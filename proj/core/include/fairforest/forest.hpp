#pragma once

#include <cstdint>
#include <vector>

#include "fairforest/tree.hpp"

namespace fairforest {

struct ForestConfig {
  int n_trees = 100;
  TreeConfig tree;
  bool bootstrap = true;
  // When tree.feature_subsample is 0, fit uses round(sqrt(candidate count)).
  bool auto_subsample = true;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, ForestConfig cfg);

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const ForestConfig& config() const { return cfg_; }
  std::uint64_t schema_fingerprint() const;
  bool classification() const;
  int n_classes() const;

  void check_compatible(const Dataset& ds) const;

 private:
  std::vector<DecisionTree> trees_;
  ForestConfig cfg_;
};

/// Bagged ensemble: tree i trains on a bootstrap resample drawn from a
/// sub-stream seeded by (cfg.seed, i), with per-node feature subsampling
/// inside each tree. The result is independent of worker count.
ForestModel fit_forest(const SubsetView& train, int label_col, int protected_col,
                       const ForestConfig& cfg);

/// Classification: majority vote over hard predictions, ties to the lower
/// class index (average_scores votes on mean leaf frequencies instead).
/// Regression: mean of tree outputs.
Prediction predict_forest(const ForestModel& model, const Dataset& ds, std::int32_t row,
                          std::vector<double>* score_buffer = nullptr,
                          bool average_scores = false);

/// Per-feature mean of MDI contributions across trees, divided by the
/// maximum; all zeros when no tree ever split.
std::vector<double> importance(const ForestModel& model, int column_count);

}  // namespace fairforest
