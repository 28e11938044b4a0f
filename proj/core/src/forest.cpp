#include "fairforest/forest.hpp"

#include <algorithm>
#include <cmath>

#include "fairforest/error.hpp"
#include "fairforest/parallel.hpp"
#include "fairforest/rng.hpp"

namespace fairforest {

ForestModel::ForestModel(std::vector<DecisionTree> trees, ForestConfig cfg)
    : trees_(std::move(trees)), cfg_(cfg) {
  if (trees_.empty()) throw std::invalid_argument("forest with no trees");
  for (const auto& t : trees_) {
    if (t.schema_fingerprint() != trees_.front().schema_fingerprint()) {
      throw ModelError("forest trees disagree on schema fingerprint");
    }
  }
}

std::uint64_t ForestModel::schema_fingerprint() const {
  return trees_.front().schema_fingerprint();
}

bool ForestModel::classification() const { return trees_.front().classification(); }

int ForestModel::n_classes() const { return trees_.front().n_classes(); }

void ForestModel::check_compatible(const Dataset& ds) const {
  if (ds.schema_fingerprint() != schema_fingerprint()) {
    throw ModelError("dataset schema does not match the model's schema fingerprint");
  }
}

ForestModel fit_forest(const SubsetView& train, int label_col, int protected_col,
                       const ForestConfig& cfg) {
  if (cfg.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (train.empty()) throw std::invalid_argument("fit_forest on an empty training view");

  const Dataset& ds = train.data();
  TreeConfig tree_cfg = cfg.tree;
  if (tree_cfg.feature_subsample == 0 && cfg.auto_subsample) {
    int candidates = 0;
    for (int col = 0; col < ds.column_count(); ++col) {
      if (col == label_col) continue;
      FeatureRole role = ds.schema(col).role;
      bool eligible = role == FeatureRole::feature || role == FeatureRole::protected_attr;
      if (col == protected_col && !tree_cfg.protected_is_candidate) eligible = false;
      if (eligible) ++candidates;
    }
    tree_cfg.feature_subsample =
        std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(candidates)))));
  }

  const std::int64_t n = train.size();
  std::vector<DecisionTree> trees(static_cast<std::size_t>(cfg.n_trees));
  parallel_for(cfg.n_trees, cfg.threads, [&](std::int64_t i) {
    std::uint64_t tree_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<std::int32_t> rows;
    rows.reserve(static_cast<std::size_t>(n));
    if (cfg.bootstrap) {
      Rng boot(mix_seed(tree_seed, 0xb007ULL));
      std::span<const std::int32_t> base = train.rows();
      for (std::int64_t d = 0; d < n; ++d) {
        rows.push_back(base[static_cast<std::size_t>(boot.bounded(static_cast<std::uint64_t>(n)))]);
      }
      std::sort(rows.begin(), rows.end());
    } else {
      rows.assign(train.rows().begin(), train.rows().end());
    }
    trees[static_cast<std::size_t>(i)] =
        induce_rows(ds, std::move(rows), label_col, protected_col, tree_cfg,
                    mix_seed(tree_seed, 0x17eeULL));
  });

  ForestConfig echo = cfg;
  echo.tree = tree_cfg;
  return ForestModel(std::move(trees), echo);
}

Prediction predict_forest(const ForestModel& model, const Dataset& ds, std::int32_t row,
                          std::vector<double>* score_buffer, bool average_scores) {
  const auto& trees = model.trees();
  Prediction out;
  if (model.classification()) {
    const int k = model.n_classes();
    std::vector<double> acc(static_cast<std::size_t>(k), 0.0);
    for (const auto& t : trees) {
      Prediction p = t.predict(ds, row);
      if (average_scores) {
        for (int c = 0; c < k; ++c) acc[static_cast<std::size_t>(c)] += p.scores[static_cast<std::size_t>(c)];
      } else {
        acc[static_cast<std::size_t>(p.cls)] += 1.0;
      }
    }
    for (int c = 0; c < k; ++c) acc[static_cast<std::size_t>(c)] /= static_cast<double>(trees.size());
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (acc[static_cast<std::size_t>(c)] > acc[static_cast<std::size_t>(best)]) best = c;
    }
    out.cls = best;
    out.value = static_cast<double>(best);
    if (score_buffer) {
      *score_buffer = std::move(acc);
      out.scores = *score_buffer;
    }
  } else {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(ds, row).value;
    out.value = sum / static_cast<double>(trees.size());
  }
  return out;
}

std::vector<double> importance(const ForestModel& model, int column_count) {
  std::vector<double> mean(static_cast<std::size_t>(column_count), 0.0);
  for (const auto& t : model.trees()) {
    std::vector<double> c = mdi_contributions(t, column_count);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += c[i];
  }
  for (double& v : mean) v /= static_cast<double>(model.trees().size());
  double top = 0.0;
  for (double v : mean) top = std::max(top, v);
  if (top > 0.0) {
    for (double& v : mean) v /= top;
  }
  return mean;
}

}  // namespace fairforest
