#include "fairforest/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "fairforest/error.hpp"
#include "fairforest/rng.hpp"

namespace fairforest {

namespace {

TreeConfig tree_config_for(const ExperimentSpec& spec, bool fairness) {
  TreeConfig cfg = spec.model == ModelKind::tree ? spec.tree : spec.forest.tree;
  cfg.criterion.fairness_enabled = fairness;
  return cfg;
}

std::string format_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

}  // namespace

PreparedExperiment prepare_experiment(const Dataset& raw, const ExperimentSpec& spec) {
  std::string prot_name = spec.protected_feature;
  if (prot_name.empty() && raw.protected_column() >= 0) {
    prot_name = raw.schema(raw.protected_column()).name;
  }

  PreparedExperiment prep{raw, -1, -1, false, -1, -1, {}, {}, ""};
  if (prot_name.empty()) {
    if (spec.protect != ProtectMode::none) {
      throw std::invalid_argument("no protected feature designated");
    }
    prep.label_col = prep.data.label_column();
    prep.protected_desc = "(none)";
    return prep;
  }

  int prot = raw.find_column(prot_name);
  if (prot < 0) throw std::invalid_argument("no such protected feature: " + prot_name);

  bool numeric = !raw.is_categorical(prot);
  if (spec.protect == ProtectMode::continuous && !numeric) {
    throw std::invalid_argument("continuous protection requires a numeric protected column");
  }

  if (numeric && spec.protected_threshold && spec.protect != ProtectMode::continuous) {
    // train and group on the binarized column; keep the raw values for MaxD
    BinarizeRecipe recipe;
    recipe.source_feature = prot_name;
    recipe.threshold = *spec.protected_threshold;
    recipe.below_name = prot_name + "<" + format_threshold(*spec.protected_threshold);
    recipe.at_or_above_name = prot_name + ">=" + format_threshold(*spec.protected_threshold);
    prep.data = binarize(raw, recipe);
    prep.applied_recipe = recipe;
    prep.protected_col = prep.data.require_column(prot_name);
    prep.group_col = prep.protected_col;
    prep.numeric_col = prep.data.require_column(prot_name + "_original");
    prep.protected_desc = prot_name + " binarized at " + format_threshold(recipe.threshold);
  } else if (numeric) {
    prep.protected_col = prot;
    prep.numeric_col = prot;
    prep.group_threshold = spec.protected_threshold;
    prep.protected_desc = prot_name + " (numeric)";
    if (spec.protect == ProtectMode::binary && !spec.protected_threshold) {
      throw std::invalid_argument("binary protection of a numeric column needs a threshold");
    }
  } else {
    prep.protected_col = prot;
    prep.group_col = prot;
    prep.protected_desc = prot_name + " (categorical)";
  }

  prep.label_col = prep.data.label_column();
  prep.fairness = spec.protect != ProtectMode::none;
  return prep;
}

CvPredictions run_cross_validation(const PreparedExperiment& prep, const ExperimentSpec& spec) {
  const Dataset& ds = prep.data;
  const std::int32_t n = ds.row_count();
  CvPredictions out;
  out.classification = ds.is_categorical(prep.label_col);
  out.hard.assign(static_cast<std::size_t>(n), -1);
  out.value.assign(static_cast<std::size_t>(n), 0.0);

  if (spec.score_predictions && out.classification &&
      ds.schema(prep.label_col).arity() != 2) {
    throw std::invalid_argument("score predictions are defined for binary labels");
  }

  std::vector<FoldPair> folds = make_folds(ds, spec.folds, spec.seed);
  std::vector<double> scores;

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const FoldPair& fold = folds[f];
    std::uint64_t fold_seed = mix_seed(spec.seed, 0xf01dULL + f);

    std::int64_t hits = 0;
    double ss = 0.0;
    auto record = [&](std::int32_t row, const Prediction& p) {
      if (out.classification) {
        out.hard[static_cast<std::size_t>(row)] = p.cls;
        double v = static_cast<double>(p.cls);
        if (spec.score_predictions && !p.scores.empty()) v = p.scores[1];
        out.value[static_cast<std::size_t>(row)] = v;
        hits += p.cls == ds.codes(prep.label_col)[static_cast<std::size_t>(row)];
      } else {
        out.value[static_cast<std::size_t>(row)] = p.value;
        double d = p.value - ds.values(prep.label_col)[static_cast<std::size_t>(row)];
        ss += d * d;
      }
    };

    if (spec.model == ModelKind::tree) {
      TreeConfig cfg = tree_config_for(spec, prep.fairness, prep.numeric_col >= 0);
      DecisionTree tree = induce(fold.train, prep.label_col, prep.protected_col, cfg, fold_seed);
      for (std::int32_t row : fold.test.rows()) record(row, tree.predict(ds, row));
    } else {
      ForestConfig cfg = spec.forest;
      cfg.tree = tree_config_for(spec, prep.fairness, prep.numeric_col >= 0);
      cfg.seed = fold_seed;
      cfg.threads = spec.threads;
      ForestModel forest = fit_forest(fold.train, prep.label_col, prep.protected_col, cfg);
      for (std::int32_t row : fold.test.rows()) {
        if (spec.score_predictions) {
          Prediction p = predict_forest(forest, ds, row, &scores, true);
          record(row, p);
        } else {
          record(row, predict_forest(forest, ds, row));
        }
      }
    }

    double fold_n = static_cast<double>(fold.test.size());
    out.fold_size.push_back(fold.test.size());
    out.fold_utility.push_back(out.classification ? static_cast<double>(hits) / fold_n
                                                  : std::sqrt(ss / fold_n));
  }
  return out;
}

namespace {

// Discrimination of pooled predictions against one column of the prepared
// dataset: k-way for categorical columns, MaxD for numeric ones.
double column_discrimination(const Dataset& ds, int col, std::span<const double> yhat) {
  if (ds.is_categorical(col)) {
    return discrimination_kway(yhat, ds.codes(col), ds.schema(col).arity());
  }
  return max_discrimination(yhat, ds.values(col)).value;
}

FairnessReport report_from_predictions(const PreparedExperiment& prep,
                                       const ExperimentSpec& spec, const CvPredictions& preds,
                                       double utility) {
  const Dataset& ds = prep.data;
  FairnessReport report;
  report.classification = preds.classification;
  report.utility = utility;
  report.folds = spec.folds;
  report.seed = spec.seed;
  report.knn_k = spec.knn.k;
  report.knn_includes_protected = spec.knn.include_protected;
  report.hard_label_metrics = !spec.score_predictions;
  report.protected_desc = prep.protected_desc;

  std::vector<double> yhat = preds.value;

  if (prep.group_col >= 0) {
    int arity = ds.schema(prep.group_col).arity();
    report.kway_discrimination = discrimination_kway(yhat, ds.codes(prep.group_col), arity);
    if (arity == 2) {
      report.discrimination = discrimination_binary(yhat, ds.codes(prep.group_col));
    } else {
      report.discrimination = report.kway_discrimination;
      report.notes.push_back("discrimination is k-way (protected arity > 2)");
    }
  } else if (prep.numeric_col >= 0 && prep.group_threshold) {
    std::span<const double> values = ds.values(prep.numeric_col);
    std::vector<std::int32_t> groups(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      groups[i] = values[i] < *prep.group_threshold ? 0 : 1;
    }
    report.discrimination = discrimination_binary(yhat, groups);
    report.kway_discrimination = discrimination_kway(yhat, groups, 2);
    report.notes.push_back("groups from threshold on " + ds.schema(prep.numeric_col).name);
  }

  if (prep.numeric_col >= 0) {
    report.max_disc = max_discrimination(yhat, ds.values(prep.numeric_col));
  }

  if (spec.compute_inconsistency) {
    FeatureSpace space(ds, spec.knn.include_protected);
    report.inconsistency = inconsistency(yhat, space, spec.knn.k, spec.threads);
  }

  if (report.classification && report.discrimination) {
    report.delta = report.utility - *report.discrimination;
  }

  report.fold_utility = preds.fold_utility;
  report.fold_size = preds.fold_size;
  return report;
}

}  // namespace

FairnessReport cross_validate(const Dataset& raw, const ExperimentSpec& spec) {
  PreparedExperiment prep = prepare_experiment(raw, spec);
  CvPredictions preds = run_cross_validation(prep, spec);

  double utility;
  if (preds.classification) {
    utility = accuracy(preds.hard, prep.data.codes(prep.label_col));
  } else {
    utility = rmse(preds.value, prep.data.values(prep.label_col));
  }
  return report_from_predictions(prep, spec, preds, utility);
}

FairnessReport evaluate_model(const SavedModel& model, const Dataset& prepared,
                              const ExperimentSpec& spec) {
  const std::int32_t n = prepared.row_count();
  CvPredictions preds;
  preds.classification = model.trees.front().classification();
  preds.hard.assign(static_cast<std::size_t>(n), -1);
  preds.value.assign(static_cast<std::size_t>(n), 0.0);

  int label_col = prepared.require_column(model.label);
  ForestModel forest(std::vector<DecisionTree>(model.trees), model.config);
  forest.check_compatible(prepared);
  std::vector<double> scores;
  for (std::int32_t row = 0; row < n; ++row) {
    Prediction p;
    if (model.kind == ModelKind::tree) {
      p = model.trees.front().predict(prepared, row);
    } else if (spec.score_predictions) {
      p = predict_forest(forest, prepared, row, &scores, true);
    } else {
      p = predict_forest(forest, prepared, row);
    }
    if (preds.classification) {
      preds.hard[static_cast<std::size_t>(row)] = p.cls;
      double v = static_cast<double>(p.cls);
      if (spec.score_predictions && !p.scores.empty()) v = p.scores[1];
      preds.value[static_cast<std::size_t>(row)] = v;
    } else {
      preds.value[static_cast<std::size_t>(row)] = p.value;
    }
  }

  // reconstruct group/maxd designation against the prepared dataset
  PreparedExperiment prep{prepared, label_col, -1, false, -1, -1, {}, {}, "(none)"};
  if (!model.protected_feature.empty()) {
    int prot = prepared.require_column(model.protected_feature);
    prep.protected_col = prot;
    prep.protected_desc = model.protected_feature;
    if (prepared.is_categorical(prot)) {
      prep.group_col = prot;
      if (model.recipe && model.recipe->source_feature == model.protected_feature) {
        int orig = prepared.find_column(model.protected_feature + "_original");
        if (orig >= 0) prep.numeric_col = orig;
      }
    } else {
      prep.numeric_col = prot;
      prep.group_threshold = spec.protected_threshold;
    }
  }

  double utility;
  if (preds.classification) {
    utility = accuracy(preds.hard, prepared.codes(label_col));
  } else {
    utility = rmse(preds.value, prepared.values(label_col));
  }
  FairnessReport report = report_from_predictions(prep, spec, preds, utility);
  report.folds = 0;
  report.notes.push_back("hold-out evaluation of a saved model");
  return report;
}

SweepResult protect_all_features_sweep(const Dataset& raw, const ExperimentSpec& spec) {
  if (spec.model != ModelKind::forest) {
    throw std::invalid_argument("the protection sweep is defined for forests");
  }

  // baseline: same data transform, no fairness penalty
  ExperimentSpec base_spec = spec;
  base_spec.protect = ProtectMode::none;
  PreparedExperiment base = prepare_experiment(raw, base_spec);
  base.fairness = false;
  CvPredictions base_preds = run_cross_validation(base, base_spec);
  std::vector<double> base_yhat =
      fairness_yhat(base_preds, spec.score_predictions, base_preds.value);

  const Dataset& ds = base.data;
  std::vector<int> features;
  for (int col = 0; col < ds.column_count(); ++col) {
    FeatureRole role = ds.schema(col).role;
    if (role == FeatureRole::feature || role == FeatureRole::protected_attr) {
      features.push_back(col);
    }
  }

  SweepResult result;
  for (int col : features) {
    SweepRow row;
    row.feature = ds.schema(col).name;
    row.raw_discrimination = column_discrimination(ds, col, base_yhat);

    ExperimentSpec fair_spec = spec;
    fair_spec.protect =
        ds.is_categorical(col) ? ProtectMode::binary : ProtectMode::continuous;
    PreparedExperiment prep{ds, base.label_col, col, true, -1, -1, {}, {}, row.feature};
    CvPredictions fair_preds = run_cross_validation(prep, fair_spec);
    std::vector<double> fair_yhat =
        fairness_yhat(fair_preds, spec.score_predictions, fair_preds.value);

    row.protected_discrimination = column_discrimination(ds, col, fair_yhat);
    row.protected_accuracy = accuracy(fair_preds.hard, ds.codes(base.label_col));
    result.rows.push_back(std::move(row));
  }

  auto mean_std = [](const std::vector<SweepRow>& rows, auto getter, double& mu, double& sigma) {
    double sum = 0.0;
    for (const auto& r : rows) sum += getter(r);
    mu = sum / static_cast<double>(rows.size());
    double ss = 0.0;
    for (const auto& r : rows) {
      double d = getter(r) - mu;
      ss += d * d;
    }
    sigma = std::sqrt(ss / static_cast<double>(rows.size()));
  };
  mean_std(result.rows, [](const SweepRow& r) { return r.raw_discrimination; }, result.raw_mean,
           result.raw_std);
  mean_std(result.rows, [](const SweepRow& r) { return r.protected_discrimination; },
           result.protected_mean, result.protected_std);
  mean_std(result.rows, [](const SweepRow& r) { return r.protected_accuracy; },
           result.accuracy_mean, result.accuracy_std);
  return result;
}

Dataset fig5_fixture(std::uint64_t seed, std::int32_t n_per_cluster) {
  if (n_per_cluster < 2) throw std::invalid_argument("n_per_cluster must be >= 2");
  Rng rng(mix_seed(seed, 0xf165ULL));

  const std::int32_t n = 2 * n_per_cluster;
  std::vector<double> split_axis(static_cast<std::size_t>(n));
  std::vector<double> protected_vals(static_cast<std::size_t>(n));
  std::vector<std::int32_t> cluster(static_cast<std::size_t>(n));

  // wide cluster above the cut, narrow cluster below; both protected means 0
  for (std::int32_t i = 0; i < n_per_cluster; ++i) {
    split_axis[static_cast<std::size_t>(i)] = 0.6 + 0.3 * rng.uniform();
    protected_vals[static_cast<std::size_t>(i)] = rng.normal();
    cluster[static_cast<std::size_t>(i)] = 1;
  }
  for (std::int32_t i = n_per_cluster; i < n; ++i) {
    split_axis[static_cast<std::size_t>(i)] = 0.1 + 0.3 * rng.uniform();
    protected_vals[static_cast<std::size_t>(i)] = 0.1 * rng.normal();
    cluster[static_cast<std::size_t>(i)] = 0;
  }

  std::vector<FeatureSchema> schema(3);
  schema[0].name = "split_axis";
  schema[0].kind = FeatureKind::numeric;
  schema[0].role = FeatureRole::feature;
  schema[1].name = "protected";
  schema[1].kind = FeatureKind::numeric;
  schema[1].role = FeatureRole::protected_attr;
  schema[2].name = "cluster";
  schema[2].kind = FeatureKind::categorical;
  schema[2].role = FeatureRole::label;
  schema[2].categories = {"low", "high"};

  std::vector<Dataset::Column> columns;
  columns.emplace_back(std::move(split_axis));
  columns.emplace_back(std::move(protected_vals));
  columns.emplace_back(std::move(cluster));
  return Dataset(std::move(schema), std::move(columns));
}

}  // namespace fairforest
