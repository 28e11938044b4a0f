#include "fairforest/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairforest/error.hpp"

namespace fairforest {

namespace {

// Counts per category code over a row span (rows may repeat).
std::vector<std::int64_t> code_counts(const Dataset& ds, std::span<const std::int32_t> rows,
                                      int attribute) {
  std::span<const std::int32_t> codes = ds.codes(attribute);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(ds.schema(attribute).arity()), 0);
  for (std::int32_t r : rows) ++counts[static_cast<std::size_t>(codes[static_cast<std::size_t>(r)])];
  return counts;
}

double gini_from_counts(const std::vector<std::int64_t>& counts, std::int64_t total) {
  double sum = 0.0;
  for (std::int64_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

double normalized_gini_from_counts(const std::vector<std::int64_t>& counts, std::int64_t total,
                                   int arity) {
  if (total == 0) return 0.0;
  if (arity < 2) return 0.0;
  return gini_from_counts(counts, total) / (1.0 - 1.0 / static_cast<double>(arity));
}

struct NumericMoments {
  double mean = 0.0;
  double variance = 0.0;  // population
  std::int64_t count = 0;
};

NumericMoments numeric_moments(const Dataset& ds, std::span<const std::int32_t> rows,
                               int attribute) {
  std::span<const double> vals = ds.values(attribute);
  NumericMoments m;
  m.count = static_cast<std::int64_t>(rows.size());
  if (m.count == 0) return m;
  double sum = 0.0;
  for (std::int32_t r : rows) sum += vals[static_cast<std::size_t>(r)];
  m.mean = sum / static_cast<double>(m.count);
  double ss = 0.0;
  for (std::int32_t r : rows) {
    double d = vals[static_cast<std::size_t>(r)] - m.mean;
    ss += d * d;
  }
  m.variance = ss / static_cast<double>(m.count);
  return m;
}

void require_partition(const SubsetView& parent, const SplitSpec& split) {
  std::vector<std::int32_t> merged;
  std::size_t total = 0;
  for (const auto& b : split.branches) total += static_cast<std::size_t>(b.size());
  if (total != static_cast<std::size_t>(parent.size())) {
    throw std::invalid_argument("split branches do not partition the parent view");
  }
  merged.reserve(total);
  for (const auto& b : split.branches) {
    merged.insert(merged.end(), b.rows().begin(), b.rows().end());
  }
  std::sort(merged.begin(), merged.end());
  if (!std::equal(merged.begin(), merged.end(), parent.rows().begin())) {
    throw std::invalid_argument("split branches do not partition the parent view");
  }
}

std::vector<std::vector<std::int32_t>> branch_rows(const SplitSpec& split) {
  std::vector<std::vector<std::int32_t>> out;
  out.reserve(split.branches.size());
  for (const auto& b : split.branches) {
    out.emplace_back(b.rows().begin(), b.rows().end());
  }
  return out;
}

}  // namespace

// -- split construction --------------------------------------------------------

SplitSpec make_categorical_split(const SubsetView& parent, int feature_col) {
  const Dataset& ds = parent.data();
  if (!ds.is_categorical(feature_col)) {
    throw std::invalid_argument("make_categorical_split on numeric column " +
                                ds.schema(feature_col).name);
  }
  SplitSpec spec;
  spec.feature = feature_col;
  spec.kind = SplitKind::categorical_multiway;
  auto parts = detail::partition_by_code(ds, parent.rows(), feature_col);
  spec.branches.reserve(parts.size());
  for (auto& p : parts) spec.branches.emplace_back(ds, std::move(p));
  return spec;
}

SplitSpec make_threshold_split(const SubsetView& parent, int feature_col, double threshold) {
  const Dataset& ds = parent.data();
  if (ds.is_categorical(feature_col)) {
    throw std::invalid_argument("make_threshold_split on categorical column " +
                                ds.schema(feature_col).name);
  }
  SplitSpec spec;
  spec.feature = feature_col;
  spec.kind = SplitKind::numeric_threshold;
  spec.threshold = threshold;
  auto parts = detail::partition_by_threshold(ds, parent.rows(), feature_col, threshold);
  spec.branches.reserve(2);
  for (auto& p : parts) spec.branches.emplace_back(ds, std::move(p));
  return spec;
}

// -- public criteria -------------------------------------------------------------

double gini(const SubsetView& view, int attribute) {
  if (view.empty()) throw std::domain_error("gini of an empty view");
  return detail::gini_rows(view.data(), view.rows(), attribute);
}

double normalized_gini(const SubsetView& view, int attribute) {
  if (view.empty()) throw std::domain_error("normalized_gini of an empty view");
  return detail::normalized_gini_rows(view.data(), view.rows(), attribute);
}

double categorical_gain(const SubsetView& parent, const SplitSpec& split, int attribute) {
  require_partition(parent, split);
  return detail::categorical_gain_rows(parent.data(), parent.rows(), branch_rows(split),
                                       attribute);
}

double drift_gain(const SubsetView& parent, const SplitSpec& split, int attribute, double cap,
                  bool as_printed) {
  require_partition(parent, split);
  return detail::drift_gain_rows(parent.data(), parent.rows(), branch_rows(split), attribute, cap,
                                 as_printed);
}

double variance_gain(const SubsetView& parent, const SplitSpec& split, int attribute) {
  require_partition(parent, split);
  return detail::variance_gain_rows(parent.data(), parent.rows(), branch_rows(split), attribute);
}

GainScore fair_gain(const SubsetView& parent, const SplitSpec& split, int label_col,
                    int protected_col, const CriterionConfig& cfg) {
  require_partition(parent, split);
  return detail::fair_gain_rows(parent.data(), parent.rows(), branch_rows(split), label_col,
                                protected_col, cfg);
}

std::pair<SplitSpec, GainScore> best_numeric_threshold(const SubsetView& parent, int feature_col,
                                                       int label_col, int protected_col,
                                                       const CriterionConfig& cfg) {
  detail::ThresholdScan scan =
      detail::scan_thresholds(parent.data(), parent.rows(), feature_col, label_col, protected_col,
                              cfg, 1);
  if (!scan.found) {
    return {SplitSpec{}, GainScore{}};
  }
  return {make_threshold_split(parent, feature_col, scan.threshold), scan.gain};
}

// -- detail -----------------------------------------------------------------------

namespace detail {

double gini_rows(const Dataset& ds, std::span<const std::int32_t> rows, int attribute) {
  if (!ds.is_categorical(attribute)) {
    throw std::invalid_argument("gini on numeric column " + ds.schema(attribute).name);
  }
  if (rows.empty()) throw std::domain_error("gini of an empty row set");
  return gini_from_counts(code_counts(ds, rows, attribute),
                          static_cast<std::int64_t>(rows.size()));
}

double normalized_gini_rows(const Dataset& ds, std::span<const std::int32_t> rows, int attribute) {
  if (!ds.is_categorical(attribute)) {
    throw std::invalid_argument("normalized_gini on numeric column " + ds.schema(attribute).name);
  }
  if (rows.empty()) throw std::domain_error("normalized_gini of an empty row set");
  return normalized_gini_from_counts(code_counts(ds, rows, attribute),
                                     static_cast<std::int64_t>(rows.size()),
                                     ds.schema(attribute).arity());
}

double categorical_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                             std::span<const std::vector<std::int32_t>> branches, int attribute) {
  const int arity = ds.schema(attribute).arity();
  const std::int64_t n = static_cast<std::int64_t>(parent.size());
  double parent_impurity =
      normalized_gini_from_counts(code_counts(ds, parent, attribute), n, arity);
  double children = 0.0;
  for (const auto& b : branches) {
    if (b.empty()) continue;
    double w = static_cast<double>(b.size()) / static_cast<double>(n);
    children += w * normalized_gini_from_counts(code_counts(ds, b, attribute),
                                                static_cast<std::int64_t>(b.size()), arity);
  }
  return parent_impurity - children;
}

double drift_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                       std::span<const std::vector<std::int32_t>> branches, int attribute,
                       double cap, bool as_printed) {
  NumericMoments p = numeric_moments(ds, parent, attribute);
  double sigma = std::sqrt(p.variance);
  if (sigma <= 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& b : branches) {
    if (b.empty()) continue;
    NumericMoments m = numeric_moments(ds, b, attribute);
    double w = static_cast<double>(b.size()) / static_cast<double>(parent.size());
    acc += w * std::min(std::abs(p.mean - m.mean) / sigma, cap);
  }
  double magnitude = acc / cap;
  return as_printed ? 1.0 - magnitude : magnitude;
}

double variance_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                          std::span<const std::vector<std::int32_t>> branches, int attribute) {
  NumericMoments p = numeric_moments(ds, parent, attribute);
  if (p.variance <= 0.0) return 0.0;
  double weighted = 0.0;
  for (const auto& b : branches) {
    if (b.empty()) continue;
    NumericMoments m = numeric_moments(ds, b, attribute);
    double w = static_cast<double>(b.size()) / static_cast<double>(parent.size());
    weighted += w * (m.variance / p.variance);
  }
  return std::clamp(1.0 - weighted, 0.0, 1.0);
}

GainScore fair_gain_rows(const Dataset& ds, std::span<const std::int32_t> parent,
                         std::span<const std::vector<std::int32_t>> branches, int label_col,
                         int protected_col, const CriterionConfig& cfg) {
  GainScore score;
  if (ds.is_categorical(label_col)) {
    score.label_gain = categorical_gain_rows(ds, parent, branches, label_col);
  } else if (cfg.label_numeric == NumericCriterion::drift) {
    score.label_gain =
        drift_gain_rows(ds, parent, branches, label_col, cfg.drift_cap, cfg.drift_as_printed);
  } else {
    score.label_gain = variance_gain_rows(ds, parent, branches, label_col);
  }

  if (cfg.fairness_enabled && protected_col >= 0) {
    if (ds.is_categorical(protected_col)) {
      score.protected_gain = categorical_gain_rows(ds, parent, branches, protected_col);
    } else if (cfg.protected_numeric == NumericCriterion::drift) {
      score.protected_gain = drift_gain_rows(ds, parent, branches, protected_col, cfg.drift_cap,
                                             cfg.drift_as_printed);
    } else {
      score.protected_gain = variance_gain_rows(ds, parent, branches, protected_col);
    }
  }
  score.fair_gain = score.label_gain - score.protected_gain;
  return score;
}

std::vector<std::vector<std::int32_t>> partition_by_code(const Dataset& ds,
                                                         std::span<const std::int32_t> rows,
                                                         int feature_col) {
  std::span<const std::int32_t> codes = ds.codes(feature_col);
  std::vector<std::vector<std::int32_t>> parts(
      static_cast<std::size_t>(ds.schema(feature_col).arity()));
  for (std::int32_t r : rows) {
    parts[static_cast<std::size_t>(codes[static_cast<std::size_t>(r)])].push_back(r);
  }
  return parts;
}

std::vector<std::vector<std::int32_t>> partition_by_threshold(const Dataset& ds,
                                                              std::span<const std::int32_t> rows,
                                                              int feature_col, double threshold) {
  std::span<const double> vals = ds.values(feature_col);
  std::vector<std::vector<std::int32_t>> parts(2);
  for (std::int32_t r : rows) {
    parts[vals[static_cast<std::size_t>(r)] < threshold ? 0 : 1].push_back(r);
  }
  return parts;
}

namespace {

// Incremental statistics for one attribute during a threshold sweep.
struct AttributeSweep {
  bool categorical = false;
  int arity = 0;
  // categorical
  std::vector<std::int64_t> parent_counts;
  std::vector<std::int64_t> left_counts;
  double parent_impurity = 0.0;
  // numeric
  std::vector<double> cell;   // per sorted row: attribute value
  double parent_mean = 0.0;
  double parent_sigma = 0.0;  // population
  double parent_variance = 0.0;
  double left_sum = 0.0;
  double left_sumsq = 0.0;
  std::vector<std::int32_t> codes_sorted;  // categorical per sorted row
};

AttributeSweep prepare_sweep(const Dataset& ds, std::span<const std::int32_t> sorted_rows,
                             int attribute) {
  AttributeSweep sw;
  sw.categorical = ds.is_categorical(attribute);
  if (sw.categorical) {
    sw.arity = ds.schema(attribute).arity();
    std::span<const std::int32_t> codes = ds.codes(attribute);
    sw.codes_sorted.reserve(sorted_rows.size());
    sw.parent_counts.assign(static_cast<std::size_t>(sw.arity), 0);
    for (std::int32_t r : sorted_rows) {
      std::int32_t c = codes[static_cast<std::size_t>(r)];
      sw.codes_sorted.push_back(c);
      ++sw.parent_counts[static_cast<std::size_t>(c)];
    }
    sw.left_counts.assign(static_cast<std::size_t>(sw.arity), 0);
    sw.parent_impurity = normalized_gini_from_counts(
        sw.parent_counts, static_cast<std::int64_t>(sorted_rows.size()), sw.arity);
  } else {
    std::span<const double> vals = ds.values(attribute);
    sw.cell.reserve(sorted_rows.size());
    double sum = 0.0;
    for (std::int32_t r : sorted_rows) {
      double v = vals[static_cast<std::size_t>(r)];
      sw.cell.push_back(v);
      sum += v;
    }
    double n = static_cast<double>(sorted_rows.size());
    sw.parent_mean = sum / n;
    double ss = 0.0;
    for (double v : sw.cell) {
      double d = v - sw.parent_mean;
      ss += d * d;
    }
    sw.parent_variance = ss / n;
    sw.parent_sigma = std::sqrt(sw.parent_variance);
  }
  return sw;
}

void sweep_push(AttributeSweep& sw, std::size_t sorted_index) {
  if (sw.categorical) {
    ++sw.left_counts[static_cast<std::size_t>(sw.codes_sorted[sorted_index])];
  } else {
    double v = sw.cell[sorted_index];
    sw.left_sum += v;
    sw.left_sumsq += v * v;
  }
}

// Gain of the current left/right partition for this attribute under the
// given numeric criterion (ignored for categorical attributes).
double sweep_gain(const AttributeSweep& sw, std::int64_t n_left, std::int64_t n_total,
                  NumericCriterion crit, double cap, bool as_printed) {
  const std::int64_t n_right = n_total - n_left;
  const double wl = static_cast<double>(n_left) / static_cast<double>(n_total);
  const double wr = static_cast<double>(n_right) / static_cast<double>(n_total);
  if (sw.categorical) {
    double left = 0.0;
    double right = 0.0;
    if (n_left > 0) {
      double sum = 0.0;
      for (std::int64_t c : sw.left_counts) {
        double p = static_cast<double>(c) / static_cast<double>(n_left);
        sum += p * p;
      }
      double g = 1.0 - sum;
      left = sw.arity < 2 ? 0.0 : g / (1.0 - 1.0 / static_cast<double>(sw.arity));
    }
    if (n_right > 0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < sw.parent_counts.size(); ++i) {
        double p = static_cast<double>(sw.parent_counts[i] - sw.left_counts[i]) /
                   static_cast<double>(n_right);
        sum += p * p;
      }
      double g = 1.0 - sum;
      right = sw.arity < 2 ? 0.0 : g / (1.0 - 1.0 / static_cast<double>(sw.arity));
    }
    return sw.parent_impurity - wl * left - wr * right;
  }

  if (crit == NumericCriterion::drift) {
    if (sw.parent_sigma <= 0.0) return 0.0;
    double acc = 0.0;
    if (n_left > 0) {
      double mean = sw.left_sum / static_cast<double>(n_left);
      acc += wl * std::min(std::abs(sw.parent_mean - mean) / sw.parent_sigma, cap);
    }
    if (n_right > 0) {
      double total_sum = sw.parent_mean * static_cast<double>(n_total);
      double mean = (total_sum - sw.left_sum) / static_cast<double>(n_right);
      acc += wr * std::min(std::abs(sw.parent_mean - mean) / sw.parent_sigma, cap);
    }
    double magnitude = acc / cap;
    return as_printed ? 1.0 - magnitude : magnitude;
  }

  // variance
  if (sw.parent_variance <= 0.0) return 0.0;
  double total_sum = sw.parent_mean * static_cast<double>(n_total);
  double total_sumsq =
      (sw.parent_variance + sw.parent_mean * sw.parent_mean) * static_cast<double>(n_total);
  double weighted = 0.0;
  if (n_left > 0) {
    double mean = sw.left_sum / static_cast<double>(n_left);
    double var = std::max(0.0, sw.left_sumsq / static_cast<double>(n_left) - mean * mean);
    weighted += wl * (var / sw.parent_variance);
  }
  if (n_right > 0) {
    double sum = total_sum - sw.left_sum;
    double sumsq = total_sumsq - sw.left_sumsq;
    double mean = sum / static_cast<double>(n_right);
    double var = std::max(0.0, sumsq / static_cast<double>(n_right) - mean * mean);
    weighted += wr * (var / sw.parent_variance);
  }
  return std::clamp(1.0 - weighted, 0.0, 1.0);
}

}  // namespace

ThresholdScan scan_thresholds(const Dataset& ds, std::span<const std::int32_t> rows,
                              int feature_col, int label_col, int protected_col,
                              const CriterionConfig& cfg, std::int32_t min_leaf) {
  ThresholdScan best;
  if (ds.is_categorical(feature_col)) {
    throw std::invalid_argument("scan_thresholds on categorical column " +
                                ds.schema(feature_col).name);
  }
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (n < 2) return best;

  std::span<const double> vals = ds.values(feature_col);
  // sort row positions by feature value; equal values keep span order so the
  // sweep is fully deterministic
  std::vector<std::int32_t> order(rows.begin(), rows.end());
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return vals[static_cast<std::size_t>(a)] < vals[static_cast<std::size_t>(b)];
  });

  if (vals[static_cast<std::size_t>(order.front())] ==
      vals[static_cast<std::size_t>(order.back())]) {
    return best;  // constant feature
  }

  AttributeSweep label_sweep = prepare_sweep(ds, order, label_col);
  bool use_protected = cfg.fairness_enabled && protected_col >= 0;
  AttributeSweep prot_sweep;
  if (use_protected) prot_sweep = prepare_sweep(ds, order, protected_col);

  for (std::int64_t i = 0; i < n - 1; ++i) {
    sweep_push(label_sweep, static_cast<std::size_t>(i));
    if (use_protected) sweep_push(prot_sweep, static_cast<std::size_t>(i));

    double lo = vals[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    double hi = vals[static_cast<std::size_t>(order[static_cast<std::size_t>(i + 1)])];
    if (lo == hi) continue;  // cut only between distinct values

    std::int64_t n_left = i + 1;
    std::int64_t n_right = n - n_left;
    if (n_left < min_leaf || n_right < min_leaf) continue;

    double t = lo + 0.5 * (hi - lo);
    if (!(t > lo)) t = hi;  // midpoint rounded down to lo; use hi as the cut

    GainScore g;
    g.label_gain = sweep_gain(label_sweep, n_left, n, cfg.label_numeric, cfg.drift_cap,
                              cfg.drift_as_printed);
    if (use_protected) {
      g.protected_gain = sweep_gain(prot_sweep, n_left, n, cfg.protected_numeric, cfg.drift_cap,
                                    cfg.drift_as_printed);
    }
    g.fair_gain = g.label_gain - g.protected_gain;

    if (!best.found || g.fair_gain > best.gain.fair_gain) {
      best.found = true;
      best.threshold = t;
      best.gain = g;
    }
  }
  return best;
}

}  // namespace detail

}  // namespace fairforest
