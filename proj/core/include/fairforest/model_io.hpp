#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairforest/dataset.hpp"
#include "fairforest/forest.hpp"

namespace fairforest {

enum class ModelKind { tree, forest };

/// Versioned on-disk model: the pre-transform schema (with frozen category
/// dictionaries), the binarize recipe applied before training (if any), the
/// transformed-schema fingerprint, a config echo, and the trees in pre-order.
/// load(save(m)) predicts identically to m on every row.
struct SavedModel {
  int format_version = 1;
  ModelKind kind = ModelKind::forest;
  std::vector<FeatureSchema> original_schema;
  std::optional<BinarizeRecipe> recipe;
  std::uint64_t fingerprint = 0;
  std::string label;                 // column names in the transformed schema
  std::string protected_feature;     // empty = none
  ForestConfig config;               // kind == tree uses config.tree, n_trees == 1
  std::vector<DecisionTree> trees;

  /// Schema after applying the recipe (what the trees were trained against).
  std::vector<FeatureSchema> trained_schema() const;
};

std::string serialize_model(const SavedModel& model);
SavedModel deserialize_model(const std::string& text, const std::string& origin = "<model>");

void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);

/// Loads a raw CSV with the model's frozen schema and applies its recipe, so
/// codes align with training; throws ModelError when the resulting schema
/// fingerprint does not match.
Dataset load_data_for_model(const SavedModel& model, const std::string& csv_path);

}  // namespace fairforest
