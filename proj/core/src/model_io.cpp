#include "fairforest/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairforest/error.hpp"

namespace fairforest {

namespace {

using nlohmann::json;

constexpr const char* kFormatName = "fairforest-model";
constexpr int kFormatVersion = 1;

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

std::uint64_t fingerprint_from_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

json schema_to_json(const std::vector<FeatureSchema>& schema) {
  json out = json::array();
  for (const auto& s : schema) {
    json c;
    c["name"] = s.name;
    c["kind"] = to_string(s.kind);
    c["role"] = to_string(s.role);
    if (s.kind == FeatureKind::categorical) c["categories"] = s.categories;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<FeatureSchema> schema_from_json(const json& j) {
  std::vector<FeatureSchema> out;
  for (const auto& c : j) {
    FeatureSchema s;
    s.name = c.at("name").get<std::string>();
    s.kind = feature_kind_from_string(c.at("kind").get<std::string>());
    s.role = feature_role_from_string(c.at("role").get<std::string>());
    if (c.contains("categories")) {
      s.categories = c["categories"].get<std::vector<std::string>>();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string numeric_criterion_name(NumericCriterion c) {
  return c == NumericCriterion::drift ? "drift" : "variance";
}

NumericCriterion numeric_criterion_from_name(const std::string& s) {
  if (s == "drift") return NumericCriterion::drift;
  if (s == "variance") return NumericCriterion::variance;
  throw ModelError("unknown numeric criterion: " + s);
}

json config_to_json(const ForestConfig& cfg) {
  json t;
  t["max_depth"] = cfg.tree.max_depth;
  t["min_samples_split"] = cfg.tree.min_samples_split;
  t["min_samples_leaf"] = cfg.tree.min_samples_leaf;
  t["feature_subsample"] = cfg.tree.feature_subsample;
  t["protected_is_candidate"] = cfg.tree.protected_is_candidate;
  json crit;
  crit["label_numeric"] = numeric_criterion_name(cfg.tree.criterion.label_numeric);
  crit["protected_numeric"] = numeric_criterion_name(cfg.tree.criterion.protected_numeric);
  crit["fairness_enabled"] = cfg.tree.criterion.fairness_enabled;
  crit["drift_cap"] = cfg.tree.criterion.drift_cap;
  crit["drift_as_printed"] = cfg.tree.criterion.drift_as_printed;
  t["criterion"] = std::move(crit);

  json out;
  out["n_trees"] = cfg.n_trees;
  out["bootstrap"] = cfg.bootstrap;
  out["auto_subsample"] = cfg.auto_subsample;
  out["seed"] = cfg.seed;
  out["threads"] = cfg.threads;
  out["tree"] = std::move(t);
  return out;
}

ForestConfig config_from_json(const json& j) {
  ForestConfig cfg;
  cfg.n_trees = j.at("n_trees").get<int>();
  cfg.bootstrap = j.at("bootstrap").get<bool>();
  cfg.auto_subsample = j.at("auto_subsample").get<bool>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.threads = j.at("threads").get<int>();
  const json& t = j.at("tree");
  cfg.tree.max_depth = t.at("max_depth").get<int>();
  cfg.tree.min_samples_split = t.at("min_samples_split").get<int>();
  cfg.tree.min_samples_leaf = t.at("min_samples_leaf").get<int>();
  cfg.tree.feature_subsample = t.at("feature_subsample").get<int>();
  cfg.tree.protected_is_candidate = t.at("protected_is_candidate").get<bool>();
  const json& c = t.at("criterion");
  cfg.tree.criterion.label_numeric =
      numeric_criterion_from_name(c.at("label_numeric").get<std::string>());
  cfg.tree.criterion.protected_numeric =
      numeric_criterion_from_name(c.at("protected_numeric").get<std::string>());
  cfg.tree.criterion.fairness_enabled = c.at("fairness_enabled").get<bool>();
  cfg.tree.criterion.drift_cap = c.at("drift_cap").get<double>();
  cfg.tree.criterion.drift_as_printed = c.at("drift_as_printed").get<bool>();
  return cfg;
}

json node_to_json(const TreeNode& node, bool classification) {
  json n;
  n["f"] = node.feature;
  n["n"] = node.support;
  n["w"] = node.weight;
  if (classification) {
    n["p"] = node.distribution;
  } else {
    n["p"] = node.mean;
  }
  if (!node.is_leaf()) {
    n["k"] = node.kind == SplitKind::numeric_threshold ? "num" : "cat";
    if (node.kind == SplitKind::numeric_threshold) n["t"] = node.threshold;
    n["ch"] = node.children;
    n["g"] = node.label_gain;
  }
  return n;
}

TreeNode node_from_json(const json& j, bool classification) {
  TreeNode node;
  node.feature = j.at("f").get<int>();
  node.support = j.at("n").get<std::int64_t>();
  node.weight = j.at("w").get<double>();
  if (classification) {
    node.distribution = j.at("p").get<std::vector<double>>();
  } else {
    node.mean = j.at("p").get<double>();
  }
  if (!node.is_leaf()) {
    std::string kind = j.at("k").get<std::string>();
    node.kind = kind == "num" ? SplitKind::numeric_threshold : SplitKind::categorical_multiway;
    if (node.kind == SplitKind::numeric_threshold) node.threshold = j.at("t").get<double>();
    node.children = j.at("ch").get<std::vector<std::int32_t>>();
    node.label_gain = j.at("g").get<double>();
  }
  return node;
}

}  // namespace

std::vector<FeatureSchema> SavedModel::trained_schema() const {
  if (recipe) return binarized_schema(original_schema, *recipe);
  return original_schema;
}

std::string serialize_model(const SavedModel& model) {
  json j;
  j["format"] = kFormatName;
  j["format_version"] = kFormatVersion;
  j["kind"] = model.kind == ModelKind::tree ? "tree" : "forest";
  j["schema"] = schema_to_json(model.original_schema);
  if (model.recipe) {
    json r;
    r["feature"] = model.recipe->source_feature;
    r["threshold"] = model.recipe->threshold;
    r["below"] = model.recipe->below_name;
    r["at_or_above"] = model.recipe->at_or_above_name;
    j["binarize"] = std::move(r);
  }
  j["schema_fingerprint"] = fingerprint_hex(model.fingerprint);
  j["label"] = model.label;
  j["protected"] = model.protected_feature;
  j["config"] = config_to_json(model.config);

  bool classification = model.trees.front().classification();
  j["task"] = classification ? "classification" : "regression";
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes()) nodes.push_back(node_to_json(node, classification));
    json t;
    t["nodes"] = std::move(nodes);
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

SavedModel deserialize_model(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(origin + ": not a model file: " + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kFormatName) {
      throw ModelError(origin + ": not a " + std::string(kFormatName) + " file");
    }
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ModelError(origin + ": unsupported format version " +
                       std::to_string(j.at("format_version").get<int>()));
    }
    SavedModel model;
    model.format_version = kFormatVersion;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "tree") {
      model.kind = ModelKind::tree;
    } else if (kind == "forest") {
      model.kind = ModelKind::forest;
    } else {
      throw ModelError(origin + ": unknown model kind " + kind);
    }
    model.original_schema = schema_from_json(j.at("schema"));
    if (j.contains("binarize")) {
      BinarizeRecipe r;
      r.source_feature = j["binarize"].at("feature").get<std::string>();
      r.threshold = j["binarize"].at("threshold").get<double>();
      r.below_name = j["binarize"].at("below").get<std::string>();
      r.at_or_above_name = j["binarize"].at("at_or_above").get<std::string>();
      model.recipe = std::move(r);
    }
    model.fingerprint = fingerprint_from_hex(j.at("schema_fingerprint").get<std::string>());
    model.label = j.at("label").get<std::string>();
    model.protected_feature = j.at("protected").get<std::string>();
    model.config = config_from_json(j.at("config"));

    bool classification = j.at("task").get<std::string>() == "classification";
    std::vector<FeatureSchema> trained = model.trained_schema();
    int label_col = -1;
    int protected_col = -1;
    int n_classes = 0;
    for (std::size_t i = 0; i < trained.size(); ++i) {
      if (trained[i].name == model.label) label_col = static_cast<int>(i);
      if (!model.protected_feature.empty() && trained[i].name == model.protected_feature) {
        protected_col = static_cast<int>(i);
      }
    }
    if (label_col < 0) throw ModelError(origin + ": label column not in schema");
    if (classification) n_classes = trained[static_cast<std::size_t>(label_col)].arity();

    for (const auto& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& n : t.at("nodes")) nodes.push_back(node_from_json(n, classification));
      if (nodes.empty()) throw ModelError(origin + ": tree with no nodes");
      model.trees.emplace_back(std::move(nodes), model.config.tree, model.fingerprint, label_col,
                               protected_col, classification, n_classes);
    }
    if (model.trees.empty()) throw ModelError(origin + ": model with no trees");
    return model;
  } catch (const json::exception& e) {
    throw ModelError(origin + ": malformed model file: " + e.what());
  }
}

void save_model(const std::string& path, const SavedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << serialize_model(model);
  out << '\n';
  if (!out) throw DataError("failed writing " + path);
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), path);
}

Dataset load_data_for_model(const SavedModel& model, const std::string& csv_path) {
  SchemaSpec spec;
  spec.columns = model.original_schema;
  Dataset raw = load_csv(csv_path, spec);
  Dataset prepared = model.recipe ? binarize(raw, *model.recipe) : std::move(raw);
  if (prepared.schema_fingerprint() != model.fingerprint) {
    throw ModelError(csv_path + ": schema fingerprint does not match the model");
  }
  return prepared;
}

}  // namespace fairforest
