#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fairforest/dataset.hpp"

namespace fairforest {

enum class SplitKind { categorical_multiway, numeric_threshold };

/// A candidate partition of a node's rows. Categorical splits have one branch
/// per schema category code (absent codes give empty branches); threshold
/// splits have exactly two branches: value < t, value >= t.
struct SplitSpec {
  int feature = -1;
  SplitKind kind = SplitKind::numeric_threshold;
  double threshold = 0.0;
  std::vector<SubsetView> branches;
};

SplitSpec make_categorical_split(const SubsetView& parent, int feature_col);
SplitSpec make_threshold_split(const SubsetView& parent, int feature_col, double threshold);

/// Scored quality of a split: label gain, protected-attribute gain, and
/// their difference. fair_gain == label_gain - protected_gain exactly.
struct GainScore {
  double label_gain = 0.0;
  double protected_gain = 0.0;
  double fair_gain = 0.0;
};

/// Gain definition for numeric attributes. `drift` is the capped mean-shift
/// magnitude; `variance` is the classic weighted-variance reduction, kept as
/// the alternative the mean-drift criterion replaces.
enum class NumericCriterion { drift, variance };

struct CriterionConfig {
  NumericCriterion label_numeric = NumericCriterion::drift;
  NumericCriterion protected_numeric = NumericCriterion::drift;
  bool fairness_enabled = false;
  double drift_cap = 3.0;
  // Orientation switch: when true, drift gain is reported as printed
  // (1 at zero drift) instead of as the drift magnitude (0 at zero drift).
  // Comparison only; induction uses the magnitude form.
  bool drift_as_printed = false;
};

// Impurities and gains. Categorical attributes always use (normalized) Gini;
// numeric attributes use drift or variance gain per the config. All outputs
// lie in the documented ranges; see each function for edge-case conventions.

/// Eq-style Gini impurity: 1 - sum((|T_i|/|T|)^2) over category
/// sub-populations of `attribute`. Throws std::domain_error on an empty view
/// and std::invalid_argument for a numeric attribute.
double gini(const SubsetView& view, int attribute);

/// Gini divided by its maximum 1 - 1/arity (schema-declared arity), in
/// [0, 1]. Arity-1 attributes score 0 by convention.
double normalized_gini(const SubsetView& view, int attribute);

/// Normalized-Gini information gain of a partition with respect to a
/// categorical attribute. Empty branches contribute 0.
double categorical_gain(const SubsetView& parent, const SplitSpec& split, int attribute);

/// Capped mean-drift of a numeric attribute across a partition, normalized to
/// [0, 1]: (1/cap) * sum w_i * min(|mu_T - mu_Ti| / sigma_T, cap). The parent
/// standard deviation is used for every branch. Zero parent deviation scores
/// 0 (a constant attribute carries no information). With as_printed, returns
/// one minus the magnitude.
double drift_gain(const SubsetView& parent, const SplitSpec& split, int attribute,
                  double cap = 3.0, bool as_printed = false);

/// Weighted-variance reduction of a numeric attribute, in [0, 1]:
/// 1 - sum w_i * var_Ti / var_T. Zero parent variance scores 0.
double variance_gain(const SubsetView& parent, const SplitSpec& split, int attribute);

/// Combined fair gain (label gain minus protected gain) for a split, with
/// criteria chosen by each attribute's kind and the config. protected_col < 0
/// or fairness disabled gives protected_gain = 0.
GainScore fair_gain(const SubsetView& parent, const SplitSpec& split, int label_col,
                    int protected_col, const CriterionConfig& cfg);

/// Scans thresholds at midpoints between consecutive distinct sorted values
/// of `feature_col` and returns the split maximizing fair gain, ties to the
/// smaller threshold. Fewer than two distinct values gives a no-split result
/// ({}, all-zero gain).
std::pair<SplitSpec, GainScore> best_numeric_threshold(const SubsetView& parent, int feature_col,
                                                       int label_col, int protected_col,
                                                       const CriterionConfig& cfg);

namespace detail {

// Row-span variants used by tree induction, where node row lists may carry
// bootstrap duplicates and therefore cannot be SubsetViews. The public
// SubsetView operations above delegate to these.

double gini_rows(const Dataset& ds, std::span<const std::int32_t> rows, int attribute);
double normalized_gini_rows(const Dataset& ds, std::span<const std::int32_t> rows, int attribute);

double categorical_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                             std::span<const std::vector<std::int32_t>> branches, int attribute);
double drift_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                       std::span<const std::vector<std::int32_t>> branches, int attribute,
                       double cap, bool as_printed);
double variance_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                          std::span<const std::vector<std::int32_t>> branches, int attribute);
GainScore fair_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                         std::span<const std::vector<std::int32_t>> branches, int label_col,
                         int protected_col, const CriterionConfig& cfg);

// Partitions rows by category code (arity branches) / by threshold.
std::vector<std::vector<std::int32_t>> partition_by_code(const Dataset& ds,
                                                         std::span<const std::int32_t> rows,
                                                         int feature_col);
std::vector<std::vector<std::int32_t>> partition_by_threshold(const Dataset& ds,
                                                              std::span<const std::int32_t> rows,
                                                              int feature_col, double threshold);

struct ThresholdScan {
  bool found = false;
  double threshold = 0.0;
  GainScore gain;
};

// Single sorted pass over candidate thresholds; incremental prefix
// statistics. Equivalent to evaluating fair_gain_rows at every midpoint
// (a property the tests pin down), ties to the smaller threshold. Branches
// must both have at least min_leaf rows to qualify.
ThresholdScan scan_thresholds(const Dataset& ds, std::span<const std::int32_t> rows,
                              int feature_col, int label_col, int protected_col,
                              const CriterionConfig& cfg, std::int32_t min_leaf = 1);

}  // namespace detail

}  // namespace fairforest
