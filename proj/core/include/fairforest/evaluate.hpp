#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairforest/dataset.hpp"
#include "fairforest/forest.hpp"
#include "fairforest/metrics.hpp"
#include "fairforest/model_io.hpp"

namespace fairforest {

/// How the protected attribute enters training. `none` trains plainly (the
/// column still feeds the metrics); `binary` penalizes impurity reduction of
/// the (possibly binarized) categorical column; `continuous` penalizes mean
/// drift of the raw numeric column.
enum class ProtectMode { none, binary, continuous };

struct ExperimentSpec {
  ModelKind model = ModelKind::forest;
  ProtectMode protect = ProtectMode::none;
  std::string protected_feature;              // empty = schema's protected column
  std::optional<double> protected_threshold;  // binarize threshold for a numeric protected
  int folds = 10;
  std::uint64_t seed = 1;
  ForestConfig forest;  // forest mode (forest.tree carries the tree settings)
  TreeConfig tree;      // tree mode
  KnnConfig knn;
  bool compute_inconsistency = true;
  bool score_predictions = false;  // mean class-1 score instead of hard labels
  int threads = 0;
};

/// The dataset and column designations an experiment actually runs on, after
/// the protected-attribute transform.
struct PreparedExperiment {
  Dataset data;
  int label_col = -1;
  int protected_col = -1;  // training-penalty column, -1 when none designated
  bool fairness = false;
  int group_col = -1;      // categorical discrimination groups, -1 when none
  int numeric_col = -1;    // numeric protected source for MaxD, -1 when none
  std::optional<double> group_threshold;  // groups = numeric_col >= t
  std::optional<BinarizeRecipe> applied_recipe;
  std::string protected_desc;
};

PreparedExperiment prepare_experiment(const Dataset& raw, const ExperimentSpec& spec);

/// Pooled out-of-fold predictions for one cross-validated training run.
struct CvPredictions {
  std::vector<std::int32_t> hard;   // classification
  std::vector<double> value;        // regression values, or fairness y-hat
  std::vector<double> fold_utility;
  std::vector<std::int32_t> fold_size;
  bool classification = true;
};

CvPredictions run_cross_validation(const PreparedExperiment& prep, const ExperimentSpec& spec);

/// 10-fold (by default) cross-validated evaluation: metrics on pooled
/// out-of-fold predictions; Inconsistency uses the full-dataset neighbor
/// index with the CV predictions.
FairnessReport cross_validate(const Dataset& raw, const ExperimentSpec& spec);

/// Metrics for a trained model on a prepared dataset (hold-out style).
FairnessReport evaluate_model(const SavedModel& model, const Dataset& prepared,
                              const ExperimentSpec& spec);

// -- all-features protection sweep -------------------------------------------

struct SweepRow {
  std::string feature;
  double raw_discrimination = 0.0;
  double protected_discrimination = 0.0;
  double protected_accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double raw_mean = 0.0, raw_std = 0.0;
  double protected_mean = 0.0, protected_std = 0.0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
};

/// Trains one plain baseline forest (CV) and measures per-feature
/// discrimination of its predictions; then, for every candidate feature,
/// trains a fair forest protecting that feature and records the protected
/// feature's discrimination and the model accuracy. Categorical features are
/// measured k-way, numeric features by MaxD.
SweepResult protect_all_features_sweep(const Dataset& raw, const ExperimentSpec& spec);

// -- synthetic fixture ---------------------------------------------------------

/// Two clusters with equal protected-attribute means (0) but very different
/// protected variances, cleanly separated by the `split_axis` feature at 0.5.
/// Columns: split_axis (feature), protected (numeric, protected), cluster
/// (binary label).
Dataset fig5_fixture(std::uint64_t seed, std::int32_t n_per_cluster);

}  // namespace fairforest
