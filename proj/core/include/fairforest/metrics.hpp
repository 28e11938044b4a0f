#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairforest/dataset.hpp"

namespace fairforest {

// -- utility metrics ---------------------------------------------------------

double accuracy(std::span<const std::int32_t> predicted, std::span<const std::int32_t> truth);
double rmse(std::span<const double> predicted, std::span<const double> truth);

// -- group fairness ----------------------------------------------------------

/// |mean(yhat | group 1) - mean(yhat | group 0)|. Both groups must be
/// non-empty (std::domain_error otherwise).
double discrimination_binary(std::span<const double> yhat, std::span<const std::int32_t> group);

/// (2/k) * sum over groups of |global mean - group mean|, where k counts the
/// groups actually present (absent codes are skipped). Requires arity >= 2.
/// Equals discrimination_binary when exactly two groups are present.
double discrimination_kway(std::span<const double> yhat, std::span<const std::int32_t> group,
                           int arity);

struct MaxDiscrimination {
  double value = 0.0;
  double threshold = 0.0;
};

/// Maximum binary discrimination over thresholds at midpoints between
/// consecutive distinct protected values (both sides non-empty); the lowest
/// achieving threshold on ties. Constant protected column: std::domain_error.
MaxDiscrimination max_discrimination(std::span<const double> yhat,
                                     std::span<const double> protected_values);

// -- individual fairness -----------------------------------------------------

struct KnnConfig {
  int k = 5;
  bool include_protected = true;
};

/// Row-major standardized feature matrix for neighbor queries: z-scored
/// numeric columns and one-of-k indicators for categorical columns, over all
/// columns with role `feature` (plus `protected` unless excluded). Built once
/// per evaluation; queries are read-only and thread-safe.
class FeatureSpace {
 public:
  FeatureSpace(const Dataset& ds, bool include_protected = true);

  std::int32_t row_count() const { return rows_; }
  int dim() const { return dim_; }

  /// Indices of the k nearest rows to row i (self excluded), Euclidean
  /// distance, ties broken by lower row index.
  std::vector<std::int32_t> nearest(std::int32_t i, int k) const;

 private:
  std::vector<float> cells_;
  std::int32_t rows_ = 0;
  int dim_ = 0;
};

/// (1/N) * sum_i |yhat_i - mean of yhat over i's k nearest neighbors|.
/// Requires N > k.
double inconsistency(std::span<const double> yhat, const FeatureSpace& space, int k,
                     int threads = 0);

// -- report ------------------------------------------------------------------

/// All metrics for one evaluation run, plus the protocol choices that
/// produced them.
struct FairnessReport {
  bool classification = true;
  double utility = 0.0;  // accuracy (classification) or RMSE (regression)
  std::optional<double> discrimination;
  std::optional<double> kway_discrimination;
  std::optional<MaxDiscrimination> max_disc;
  std::optional<double> inconsistency;
  std::optional<double> delta;  // accuracy - discrimination

  // protocol echo
  int folds = 0;
  std::uint64_t seed = 0;
  int knn_k = 0;
  bool knn_includes_protected = true;
  bool hard_label_metrics = true;
  std::string protected_desc;
  std::vector<std::string> notes;

  // per-fold breakdown (cross-validated runs)
  std::vector<double> fold_utility;
  std::vector<std::int32_t> fold_size;
};

}  // namespace fairforest
