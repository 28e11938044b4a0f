#include "fairforest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairforest/error.hpp"
#include "fairforest/parallel.hpp"

namespace fairforest {

double accuracy(std::span<const std::int32_t> predicted, std::span<const std::int32_t> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  if (predicted.empty()) throw std::invalid_argument("accuracy of an empty set");
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  if (predicted.empty()) throw std::invalid_argument("rmse of an empty set");
  double ss = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    double d = predicted[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double discrimination_binary(std::span<const double> yhat,
                             std::span<const std::int32_t> group) {
  if (yhat.size() != group.size()) {
    throw std::invalid_argument("discrimination: length mismatch");
  }
  double sum[2] = {0.0, 0.0};
  std::int64_t count[2] = {0, 0};
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    std::int32_t g = group[i];
    if (g < 0 || g > 1) throw std::invalid_argument("discrimination_binary: group code not 0/1");
    sum[g] += yhat[i];
    ++count[g];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw std::domain_error("discrimination undefined: a protected group is empty");
  }
  return std::abs(sum[1] / static_cast<double>(count[1]) -
                  sum[0] / static_cast<double>(count[0]));
}

double discrimination_kway(std::span<const double> yhat, std::span<const std::int32_t> group,
                           int arity) {
  if (yhat.size() != group.size()) {
    throw std::invalid_argument("discrimination: length mismatch");
  }
  if (arity < 2) throw std::invalid_argument("discrimination_kway: arity must be >= 2");
  if (yhat.empty()) throw std::domain_error("discrimination of an empty set");
  std::vector<double> sum(static_cast<std::size_t>(arity), 0.0);
  std::vector<std::int64_t> count(static_cast<std::size_t>(arity), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    std::int32_t g = group[i];
    if (g < 0 || g >= arity) throw std::invalid_argument("discrimination_kway: code out of range");
    sum[static_cast<std::size_t>(g)] += yhat[i];
    ++count[static_cast<std::size_t>(g)];
    total += yhat[i];
  }
  double global_mean = total / static_cast<double>(yhat.size());
  // absent groups are skipped and k reduced accordingly
  int present = 0;
  double acc = 0.0;
  for (int g = 0; g < arity; ++g) {
    if (count[static_cast<std::size_t>(g)] == 0) continue;
    ++present;
    acc += std::abs(global_mean - sum[static_cast<std::size_t>(g)] /
                                      static_cast<double>(count[static_cast<std::size_t>(g)]));
  }
  if (present < 2) return 0.0;
  return 2.0 / static_cast<double>(present) * acc;
}

MaxDiscrimination max_discrimination(std::span<const double> yhat,
                                     std::span<const double> protected_values) {
  if (yhat.size() != protected_values.size()) {
    throw std::invalid_argument("max_discrimination: length mismatch");
  }
  const std::size_t n = yhat.size();
  if (n < 2) throw std::domain_error("max_discrimination needs at least two rows");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return protected_values[a] < protected_values[b];
  });
  if (protected_values[order.front()] == protected_values[order.back()]) {
    throw std::domain_error("max_discrimination undefined for a constant protected column");
  }

  double total = 0.0;
  for (double v : yhat) total += v;

  MaxDiscrimination best;
  bool found = false;
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_sum += yhat[order[i]];
    double lo = protected_values[order[i]];
    double hi = protected_values[order[i + 1]];
    if (lo == hi) continue;
    double t = lo + 0.5 * (hi - lo);
    if (!(t > lo)) t = hi;
    double left_mean = left_sum / static_cast<double>(i + 1);
    double right_mean = (total - left_sum) / static_cast<double>(n - i - 1);
    double disc = std::abs(left_mean - right_mean);
    if (!found || disc > best.value) {
      found = true;
      best.value = disc;
      best.threshold = t;
    }
  }
  return best;
}

// -- FeatureSpace ----------------------------------------------------------------

FeatureSpace::FeatureSpace(const Dataset& ds, bool include_protected) {
  rows_ = ds.row_count();
  std::vector<int> cols;
  for (int c = 0; c < ds.column_count(); ++c) {
    FeatureRole role = ds.schema(c).role;
    if (role == FeatureRole::feature ||
        (role == FeatureRole::protected_attr && include_protected)) {
      cols.push_back(c);
    }
  }
  dim_ = 0;
  for (int c : cols) dim_ += ds.is_categorical(c) ? ds.schema(c).arity() : 1;
  cells_.assign(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(dim_), 0.0f);

  int offset = 0;
  for (int c : cols) {
    if (ds.is_categorical(c)) {
      std::span<const std::int32_t> codes = ds.codes(c);
      for (std::int32_t r = 0; r < rows_; ++r) {
        cells_[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) +
               static_cast<std::size_t>(offset + codes[static_cast<std::size_t>(r)])] = 1.0f;
      }
      offset += ds.schema(c).arity();
    } else {
      std::span<const double> vals = ds.values(c);
      double sum = 0.0;
      for (std::int32_t r = 0; r < rows_; ++r) sum += vals[static_cast<std::size_t>(r)];
      double mean = sum / static_cast<double>(rows_);
      double ss = 0.0;
      for (std::int32_t r = 0; r < rows_; ++r) {
        double d = vals[static_cast<std::size_t>(r)] - mean;
        ss += d * d;
      }
      double sigma = std::sqrt(ss / static_cast<double>(rows_));
      for (std::int32_t r = 0; r < rows_; ++r) {
        double z = sigma > 0.0 ? (vals[static_cast<std::size_t>(r)] - mean) / sigma : 0.0;
        cells_[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) +
               static_cast<std::size_t>(offset)] = static_cast<float>(z);
      }
      offset += 1;
    }
  }
}

std::vector<std::int32_t> FeatureSpace::nearest(std::int32_t i, int k) const {
  if (k < 1 || k >= rows_) throw std::invalid_argument("nearest: need 1 <= k < N");
  const float* query = cells_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_);

  // fixed-size worst-first heap replacement; scanning in ascending row order
  // with strict < keeps the lower row index on distance ties
  std::vector<std::pair<double, std::int32_t>> best;
  best.reserve(static_cast<std::size_t>(k));
  double worst = 0.0;
  auto worst_it = best.begin();
  for (std::int32_t j = 0; j < rows_; ++j) {
    if (j == i) continue;
    const float* other =
        cells_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(dim_);
    double d = 0.0;
    for (int c = 0; c < dim_; ++c) {
      double diff = static_cast<double>(query[c]) - static_cast<double>(other[c]);
      d += diff * diff;
    }
    if (static_cast<int>(best.size()) < k) {
      best.emplace_back(d, j);
      if (static_cast<int>(best.size()) == k) {
        worst_it = std::max_element(best.begin(), best.end());
        worst = worst_it->first;
      }
    } else if (d < worst) {
      *worst_it = {d, j};
      worst_it = std::max_element(best.begin(), best.end());
      worst = worst_it->first;
    }
  }
  std::sort(best.begin(), best.end());
  std::vector<std::int32_t> out;
  out.reserve(best.size());
  for (const auto& [d, j] : best) out.push_back(j);
  return out;
}

double inconsistency(std::span<const double> yhat, const FeatureSpace& space, int k,
                     int threads) {
  const std::int32_t n = space.row_count();
  if (static_cast<std::size_t>(n) != yhat.size()) {
    throw std::invalid_argument("inconsistency: length mismatch");
  }
  if (n <= k) throw std::invalid_argument("inconsistency requires N > k");

  std::vector<double> contrib(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, threads, [&](std::int64_t i) {
    std::vector<std::int32_t> nn = space.nearest(static_cast<std::int32_t>(i), k);
    double sum = 0.0;
    for (std::int32_t j : nn) sum += yhat[static_cast<std::size_t>(j)];
    contrib[static_cast<std::size_t>(i)] =
        std::abs(yhat[static_cast<std::size_t>(i)] - sum / static_cast<double>(k));
  });
  double total = 0.0;
  for (double c : contrib) total += c;  // fixed order: deterministic across thread counts
  return total / static_cast<double>(n);
}

}  // namespace fairforest
