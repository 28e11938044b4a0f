#include "fairforest/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fairforest/error.hpp"
#include "fairforest/rng.hpp"

namespace fairforest {

namespace {

// Guard against growing on float noise around a mathematically zero gain.
constexpr double kGainEpsilon = 1e-12;

struct Inducer {
  const Dataset& ds;
  int label_col;
  int protected_col;
  const TreeConfig& cfg;
  Rng node_rng;
  std::vector<int> candidates;  // ascending column ids
  std::vector<TreeNode> nodes;
  double root_size = 0.0;
  bool classification = true;
  int n_classes = 0;

  Inducer(const Dataset& d, int label, int prot, const TreeConfig& c, std::uint64_t seed)
      : ds(d), label_col(label), protected_col(prot), cfg(c), node_rng(mix_seed(seed, 0x7ee5ULL)) {
    classification = ds.is_categorical(label_col);
    n_classes = classification ? ds.schema(label_col).arity() : 0;
    for (int col = 0; col < ds.column_count(); ++col) {
      if (col == label_col) continue;
      FeatureRole role = ds.schema(col).role;
      bool eligible = role == FeatureRole::feature || role == FeatureRole::protected_attr;
      if (col == protected_col && !cfg.protected_is_candidate) eligible = false;
      if (eligible) candidates.push_back(col);
    }
  }

  void fill_payload(TreeNode& node, std::span<const std::int32_t> rows) {
    node.support = static_cast<std::int64_t>(rows.size());
    node.weight = static_cast<double>(rows.size()) / root_size;
    if (classification) {
      std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
      std::span<const std::int32_t> codes = ds.codes(label_col);
      for (std::int32_t r : rows) ++counts[static_cast<std::size_t>(codes[static_cast<std::size_t>(r)])];
      node.distribution.resize(static_cast<std::size_t>(n_classes));
      for (int c = 0; c < n_classes; ++c) {
        node.distribution[static_cast<std::size_t>(c)] =
            static_cast<double>(counts[static_cast<std::size_t>(c)]) /
            static_cast<double>(rows.size());
      }
    } else {
      std::span<const double> vals = ds.values(label_col);
      double sum = 0.0;
      for (std::int32_t r : rows) sum += vals[static_cast<std::size_t>(r)];
      node.mean = sum / static_cast<double>(rows.size());
    }
  }

  bool label_pure(std::span<const std::int32_t> rows) const {
    if (classification) {
      std::span<const std::int32_t> codes = ds.codes(label_col);
      std::int32_t first = codes[static_cast<std::size_t>(rows.front())];
      for (std::int32_t r : rows) {
        if (codes[static_cast<std::size_t>(r)] != first) return false;
      }
    } else {
      std::span<const double> vals = ds.values(label_col);
      double first = vals[static_cast<std::size_t>(rows.front())];
      for (std::int32_t r : rows) {
        if (vals[static_cast<std::size_t>(r)] != first) return false;
      }
    }
    return true;
  }

  std::vector<int> node_candidates() {
    int k = cfg.feature_subsample;
    if (k <= 0 || k >= static_cast<int>(candidates.size())) return candidates;
    std::vector<std::int32_t> picks = node_rng.sample_without_replacement(
        static_cast<std::int32_t>(candidates.size()), static_cast<std::int32_t>(k));
    std::vector<int> out;
    out.reserve(picks.size());
    for (std::int32_t p : picks) out.push_back(candidates[static_cast<std::size_t>(p)]);
    return out;
  }

  struct BestSplit {
    bool found = false;
    GainScore gain;
    int feature = -1;
    SplitKind kind = SplitKind::numeric_threshold;
    double threshold = 0.0;
    std::vector<std::vector<std::int32_t>> branches;
  };

  BestSplit best_split(std::span<const std::int32_t> rows) {
    BestSplit best;
    for (int f : node_candidates()) {
      if (ds.is_categorical(f)) {
        auto parts = detail::partition_by_code(ds, rows, f);
        int non_empty = 0;
        bool leaf_ok = true;
        for (const auto& p : parts) {
          if (p.empty()) continue;
          ++non_empty;
          if (static_cast<std::int32_t>(p.size()) < cfg.min_samples_leaf) leaf_ok = false;
        }
        if (non_empty < 2 || !leaf_ok) continue;
        GainScore g = detail::fair_gain_rows(ds, rows, parts, label_col, protected_col,
                                             cfg.criterion);
        if (!best.found || g.fair_gain > best.gain.fair_gain) {
          best.found = true;
          best.gain = g;
          best.feature = f;
          best.kind = SplitKind::categorical_multiway;
          best.branches = std::move(parts);
        }
      } else {
        detail::ThresholdScan scan = detail::scan_thresholds(
            ds, rows, f, label_col, protected_col, cfg.criterion,
            static_cast<std::int32_t>(cfg.min_samples_leaf));
        if (!scan.found) continue;
        if (!best.found || scan.gain.fair_gain > best.gain.fair_gain) {
          best.found = true;
          best.gain = scan.gain;
          best.feature = f;
          best.kind = SplitKind::numeric_threshold;
          best.threshold = scan.threshold;
          best.branches.clear();  // materialized lazily below
        }
      }
    }
    if (best.found && best.kind == SplitKind::numeric_threshold) {
      best.branches = detail::partition_by_threshold(ds, rows, best.feature, best.threshold);
    }
    return best;
  }

  std::int32_t build(std::vector<std::int32_t> rows, int depth) {
    std::int32_t id = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    fill_payload(nodes[static_cast<std::size_t>(id)], rows);

    bool stop = label_pure(rows) ||
                static_cast<std::int32_t>(rows.size()) < cfg.min_samples_split ||
                (cfg.max_depth >= 0 && depth >= cfg.max_depth);
    if (!stop) {
      BestSplit best = best_split(rows);
      if (best.found && best.gain.fair_gain > kGainEpsilon) {
        rows.clear();
        rows.shrink_to_fit();
        TreeNode& node = nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.kind = best.kind;
        node.threshold = best.threshold;
        node.label_gain = best.gain.label_gain;
        node.children.assign(best.branches.size(), -1);
        for (std::size_t b = 0; b < best.branches.size(); ++b) {
          if (best.branches[b].empty()) continue;
          std::int32_t child = build(std::move(best.branches[b]), depth + 1);
          nodes[static_cast<std::size_t>(id)].children[b] = child;
        }
        return id;
      }
    }
    return id;
  }
};

}  // namespace

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, TreeConfig config,
                           std::uint64_t fingerprint, int label_col, int protected_col,
                           bool classification, int n_classes)
    : nodes_(std::move(nodes)),
      config_(config),
      fingerprint_(fingerprint),
      label_col_(label_col),
      protected_col_(protected_col),
      classification_(classification),
      n_classes_(n_classes) {}

int DecisionTree::leaf_count() const {
  int n = 0;
  for (const auto& node : nodes_) n += node.is_leaf();
  return n;
}

int DecisionTree::internal_count() const { return static_cast<int>(nodes_.size()) - leaf_count(); }

int DecisionTree::depth() const {
  // pre-order walk with explicit depths
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    for (std::int32_t c : nodes_[static_cast<std::size_t>(id)].children) {
      if (c >= 0) stack.emplace_back(c, d + 1);
    }
  }
  return deepest;
}

void DecisionTree::check_compatible(const Dataset& ds) const {
  if (ds.schema_fingerprint() != fingerprint_) {
    throw ModelError("dataset schema does not match the model's schema fingerprint");
  }
}

std::int32_t DecisionTree::route(const Dataset& ds, std::int32_t row) const {
  std::int32_t id = 0;
  for (;;) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) return id;
    std::int32_t next = -1;
    if (node.kind == SplitKind::numeric_threshold) {
      double v = ds.values(node.feature)[static_cast<std::size_t>(row)];
      next = node.children[v < node.threshold ? 0 : 1];
    } else {
      std::int32_t code = ds.codes(node.feature)[static_cast<std::size_t>(row)];
      next = node.children[static_cast<std::size_t>(code)];
    }
    if (next < 0) return id;  // absent training branch: answer from this node
    id = next;
  }
}

Prediction DecisionTree::predict(const Dataset& ds, std::int32_t row) const {
  const TreeNode& node = nodes_[static_cast<std::size_t>(route(ds, row))];
  Prediction p;
  if (classification_) {
    int best = 0;
    for (int c = 1; c < n_classes_; ++c) {
      if (node.distribution[static_cast<std::size_t>(c)] >
          node.distribution[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    p.cls = best;
    p.value = static_cast<double>(best);
    p.scores = node.distribution;
  } else {
    p.value = node.mean;
  }
  return p;
}

DecisionTree induce(const SubsetView& train, int label_col, int protected_col,
                    const TreeConfig& cfg, std::uint64_t rng_seed) {
  return induce_rows(train.data(),
                     std::vector<std::int32_t>(train.rows().begin(), train.rows().end()),
                     label_col, protected_col, cfg, rng_seed);
}

DecisionTree induce_rows(const Dataset& ds, std::vector<std::int32_t> rows, int label_col,
                         int protected_col, const TreeConfig& cfg, std::uint64_t rng_seed) {
  if (rows.empty()) throw std::invalid_argument("induce on an empty training view");
  if (cfg.min_samples_leaf > cfg.min_samples_split) {
    throw std::invalid_argument("min_samples_leaf exceeds min_samples_split");
  }
  if (cfg.min_samples_leaf < 1 || cfg.min_samples_split < 2) {
    throw std::invalid_argument("invalid sample limits");
  }
  if (cfg.max_depth == 0 || cfg.max_depth < -1) {
    throw std::invalid_argument("max_depth must be positive or -1 (unlimited)");
  }
  if (label_col < 0 || label_col >= ds.column_count()) {
    throw std::invalid_argument("label column out of range");
  }
  if (protected_col >= ds.column_count()) {
    throw std::invalid_argument("protected column out of range");
  }

  Inducer inducer(ds, label_col, protected_col, cfg, rng_seed);
  inducer.root_size = static_cast<double>(rows.size());
  inducer.build(std::move(rows), 0);
  return DecisionTree(std::move(inducer.nodes), cfg, ds.schema_fingerprint(), label_col,
                      protected_col, inducer.classification, inducer.n_classes);
}

namespace {

void format_double(std::ostringstream& out, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  out << buf;
}

void print_node(const DecisionTree& tree, std::span<const FeatureSchema> schema, std::int32_t id,
                int indent, const std::string& branch, std::ostringstream& out) {
  const TreeNode& node = tree.nodes()[static_cast<std::size_t>(id)];
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
  if (!branch.empty()) out << branch << " ";
  if (node.is_leaf()) {
    out << "leaf:";
    if (tree.classification()) {
      out << " p=(";
      for (std::size_t c = 0; c < node.distribution.size(); ++c) {
        if (c) out << ", ";
        format_double(out, node.distribution[c]);
      }
      out << ")";
    } else {
      out << " mean=";
      format_double(out, node.mean);
    }
    out << " support=" << node.support << "\n";
    return;
  }
  const FeatureSchema& fs = schema[static_cast<std::size_t>(node.feature)];
  out << "split: " << fs.name;
  if (node.kind == SplitKind::numeric_threshold) {
    out << " < ";
    format_double(out, node.threshold);
  } else {
    out << " (multiway)";
  }
  out << " support=" << node.support << " gain=";
  format_double(out, node.label_gain);
  out << "\n";

  if (node.kind == SplitKind::numeric_threshold) {
    print_node(tree, schema, node.children[0], indent + 1, "[<]", out);
    print_node(tree, schema, node.children[1], indent + 1, "[>=]", out);
  } else {
    for (std::size_t code = 0; code < node.children.size(); ++code) {
      if (node.children[code] < 0) continue;  // absent code routes to this node
      print_node(tree, schema, node.children[code], indent + 1, "[= " + fs.categories[code] + "]",
                 out);
    }
  }
}

}  // namespace

std::string print_tree(const DecisionTree& tree, std::span<const FeatureSchema> schema) {
  std::ostringstream out;
  print_node(tree, schema, 0, 0, "", out);
  return out.str();
}

std::vector<double> mdi_contributions(const DecisionTree& tree, int column_count) {
  std::vector<double> out(static_cast<std::size_t>(column_count), 0.0);
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) continue;
    out[static_cast<std::size_t>(node.feature)] += node.weight * node.label_gain;
  }
  return out;
}

}  // namespace fairforest
