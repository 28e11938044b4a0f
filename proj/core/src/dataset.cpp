#include "fairforest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "fairforest/csv.hpp"
#include "fairforest/error.hpp"
#include "fairforest/rng.hpp"

namespace fairforest {

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::categorical ? "categorical" : "numeric";
}

std::string to_string(FeatureRole role) {
  switch (role) {
    case FeatureRole::feature: return "feature";
    case FeatureRole::label: return "label";
    case FeatureRole::protected_attr: return "protected";
    case FeatureRole::ignored: return "ignored";
  }
  return "?";
}

FeatureKind feature_kind_from_string(std::string_view s) {
  if (s == "categorical") return FeatureKind::categorical;
  if (s == "numeric") return FeatureKind::numeric;
  throw SchemaError("unknown feature kind: " + std::string(s));
}

FeatureRole feature_role_from_string(std::string_view s) {
  if (s == "feature") return FeatureRole::feature;
  if (s == "label") return FeatureRole::label;
  if (s == "protected") return FeatureRole::protected_attr;
  if (s == "ignored") return FeatureRole::ignored;
  throw SchemaError("unknown feature role: " + std::string(s));
}

// -- Dataset -----------------------------------------------------------------

Dataset::Dataset(std::vector<FeatureSchema> schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (schema_.size() != columns_.size()) {
    throw SchemaError("schema/column count mismatch");
  }
  std::size_t rows = columns_.empty()
                         ? 0
                         : std::visit([](const auto& c) { return c.size(); }, columns_[0]);
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    const auto& s = schema_[i];
    std::size_t len = std::visit([](const auto& c) { return c.size(); }, columns_[i]);
    if (len != rows) throw SchemaError("column " + s.name + " has inconsistent length");

    bool is_cat = std::holds_alternative<std::vector<std::int32_t>>(columns_[i]);
    if (is_cat != (s.kind == FeatureKind::categorical)) {
      throw SchemaError("column " + s.name + " storage does not match its kind");
    }
    if (s.kind == FeatureKind::categorical) {
      if (s.arity() < 1) throw SchemaError("column " + s.name + " has arity 0");
      for (std::int32_t code : std::get<std::vector<std::int32_t>>(columns_[i])) {
        if (code < 0 || code >= s.arity()) {
          throw SchemaError("column " + s.name + " has code out of range");
        }
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (schema_[j].name == s.name) throw SchemaError("duplicate column name: " + s.name);
    }
    if (s.role == FeatureRole::label) {
      if (label_col_ >= 0) throw SchemaError("more than one label column");
      label_col_ = static_cast<int>(i);
    }
    if (s.role == FeatureRole::protected_attr) {
      if (protected_col_ >= 0) throw SchemaError("more than one protected column");
      protected_col_ = static_cast<int>(i);
    }
  }
  if (label_col_ < 0) throw SchemaError("schema declares no label column");
  rows_ = static_cast<std::int32_t>(rows);
}

int Dataset::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Dataset::require_column(std::string_view name) const {
  int col = find_column(name);
  if (col < 0) throw std::invalid_argument("no such column: " + std::string(name));
  return col;
}

std::span<const std::int32_t> Dataset::codes(int col) const {
  const auto* v = std::get_if<std::vector<std::int32_t>>(&columns_[static_cast<std::size_t>(col)]);
  if (!v) throw std::invalid_argument("column " + schema(col).name + " is not categorical");
  return *v;
}

std::span<const double> Dataset::values(int col) const {
  const auto* v = std::get_if<std::vector<double>>(&columns_[static_cast<std::size_t>(col)]);
  if (!v) throw std::invalid_argument("column " + schema(col).name + " is not numeric");
  return *v;
}

std::uint64_t Dataset::schema_fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& s : schema_) {
    mix(s.name);
    mix(to_string(s.kind));
    mix(to_string(s.role));
    for (const auto& c : s.categories) mix(c);
  }
  return h;
}

SubsetView Dataset::all() const { return SubsetView(*this); }

// -- SubsetView ---------------------------------------------------------------

SubsetView::SubsetView(const Dataset& ds) : ds_(&ds) {
  std::vector<std::int32_t> rows(static_cast<std::size_t>(ds.row_count()));
  for (std::int32_t i = 0; i < ds.row_count(); ++i) rows[static_cast<std::size_t>(i)] = i;
  rows_ = std::make_shared<const std::vector<std::int32_t>>(std::move(rows));
}

SubsetView::SubsetView(const Dataset& ds, std::vector<std::int32_t> rows) : ds_(&ds) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= ds.row_count()) {
      throw std::invalid_argument("view index out of range");
    }
    if (i > 0 && rows[i] <= rows[i - 1]) {
      throw std::invalid_argument("view indices must be strictly increasing");
    }
  }
  rows_ = std::make_shared<const std::vector<std::int32_t>>(std::move(rows));
}

SubsetView SubsetView::subset(std::span<const std::int32_t> local_positions) const {
  std::vector<std::int32_t> out;
  out.reserve(local_positions.size());
  for (std::int32_t p : local_positions) {
    if (p < 0 || p >= size()) throw std::invalid_argument("subset position out of range");
    out.push_back((*rows_)[static_cast<std::size_t>(p)]);
  }
  return SubsetView(*ds_, std::move(out));
}

// -- schema sidecar -----------------------------------------------------------

namespace {

using nlohmann::json;

SchemaSpec schema_from_json(const json& j, const std::string& origin) {
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array()) {
    throw SchemaError(origin + ": expected an object with a \"columns\" array");
  }
  SchemaSpec spec;
  for (const auto& c : j["columns"]) {
    FeatureSchema s;
    s.name = c.at("name").get<std::string>();
    s.kind = feature_kind_from_string(c.at("kind").get<std::string>());
    s.role = c.contains("role") ? feature_role_from_string(c["role"].get<std::string>())
                                : FeatureRole::feature;
    if (c.contains("categories")) {
      if (s.kind != FeatureKind::categorical) {
        throw SchemaError(origin + ": column " + s.name + " is numeric but lists categories");
      }
      for (const auto& cat : c["categories"]) s.categories.push_back(cat.get<std::string>());
    }
    spec.columns.push_back(std::move(s));
  }
  if (j.contains("binarize")) {
    for (const auto& b : j["binarize"]) {
      BinarizeRecipe r;
      r.source_feature = b.at("feature").get<std::string>();
      r.threshold = b.at("threshold").get<double>();
      r.below_name = b.contains("below") ? b["below"].get<std::string>()
                                         : r.source_feature + "<t";
      r.at_or_above_name = b.contains("at_or_above") ? b["at_or_above"].get<std::string>()
                                                     : r.source_feature + ">=t";
      spec.recipes.push_back(std::move(r));
    }
  }
  return spec;
}

}  // namespace

SchemaSpec parse_schema(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  try {
    return schema_from_json(j, origin);
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

SchemaSpec load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str(), path);
}

// -- CSV loading --------------------------------------------------------------

namespace {

Dataset build_from_table(const csv::Table& table, const SchemaSpec& schema,
                         const std::string& origin) {
  const std::size_t ncols = schema.columns.size();
  if (table.header.size() != ncols) {
    throw DataError(origin + ": CSV has " + std::to_string(table.header.size()) +
                    " columns, schema declares " + std::to_string(ncols));
  }
  // header name -> csv position
  std::vector<int> csv_pos(ncols, -1);
  for (std::size_t s = 0; s < ncols; ++s) {
    const std::string& want = schema.columns[s].name;
    for (std::size_t h = 0; h < table.header.size(); ++h) {
      if (table.header[h] == want) {
        csv_pos[s] = static_cast<int>(h);
        break;
      }
    }
    if (csv_pos[s] < 0) throw DataError(origin + ": CSV is missing column " + want);
  }

  std::vector<FeatureSchema> out_schema = schema.columns;
  std::vector<Dataset::Column> columns(ncols);
  std::vector<std::unordered_map<std::string, std::int32_t>> dict(ncols);

  for (std::size_t s = 0; s < ncols; ++s) {
    if (out_schema[s].kind == FeatureKind::categorical) {
      columns[s] = std::vector<std::int32_t>();
      for (std::size_t c = 0; c < out_schema[s].categories.size(); ++c) {
        dict[s][out_schema[s].categories[c]] = static_cast<std::int32_t>(c);
      }
    } else {
      columns[s] = std::vector<double>();
    }
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t s = 0; s < ncols; ++s) {
      const FeatureSchema& fs = out_schema[s];
      const std::string& cell = row[static_cast<std::size_t>(csv_pos[s])];
      auto coords = [&] {
        return origin + ": row " + std::to_string(r + 2) + ", column \"" + fs.name + "\"";
      };
      if (fs.kind == FeatureKind::numeric) {
        auto& col = std::get<std::vector<double>>(columns[s]);
        if (cell.empty()) {
          if (fs.role == FeatureRole::ignored) {
            col.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
          }
          throw DataError(coords() + ": missing value");
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
          throw DataError(coords() + ": cannot parse \"" + cell + "\" as a number");
        }
        col.push_back(v);
      } else {
        auto& col = std::get<std::vector<std::int32_t>>(columns[s]);
        if (cell.empty() && fs.role != FeatureRole::ignored) {
          throw DataError(coords() + ": missing value");
        }
        auto it = dict[s].find(cell);
        if (it == dict[s].end()) {
          if (!schema.columns[s].categories.empty()) {
            throw DataError(coords() + ": category \"" + cell +
                            "\" is not in the declared dictionary");
          }
          std::int32_t code = static_cast<std::int32_t>(out_schema[s].categories.size());
          out_schema[s].categories.push_back(cell);
          it = dict[s].emplace(cell, code).first;
        }
        col.push_back(it->second);
      }
    }
  }

  // a categorical column that never saw a value still needs arity >= 1
  for (std::size_t s = 0; s < ncols; ++s) {
    if (out_schema[s].kind == FeatureKind::categorical && out_schema[s].categories.empty()) {
      throw DataError(origin + ": column " + out_schema[s].name +
                      " has no declared or discovered categories");
    }
  }
  return Dataset(std::move(out_schema), std::move(columns));
}

}  // namespace

Dataset load_csv(const std::string& data_path, const SchemaSpec& schema) {
  return build_from_table(csv::read_file(data_path), schema, data_path);
}

Dataset load_csv(const std::string& data_path, const std::string& schema_path) {
  return load_csv(data_path, load_schema(schema_path));
}

Dataset load_csv_text(const std::string& csv_text, const SchemaSpec& schema,
                      const std::string& origin) {
  return build_from_table(csv::read_string(csv_text, origin), schema, origin);
}

// -- binarize -----------------------------------------------------------------

std::vector<FeatureSchema> binarized_schema(const std::vector<FeatureSchema>& schema,
                                            const BinarizeRecipe& recipe) {
  int src = -1;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == recipe.source_feature) src = static_cast<int>(i);
    if (schema[i].name == recipe.source_feature + "_original") {
      throw SchemaError("binarize: column " + schema[i].name + " already exists");
    }
  }
  if (src < 0) throw SchemaError("binarize: no such column: " + recipe.source_feature);
  if (schema[static_cast<std::size_t>(src)].kind != FeatureKind::numeric) {
    throw SchemaError("binarize: column " + recipe.source_feature + " is not numeric");
  }

  std::vector<FeatureSchema> out = schema;
  FeatureSchema& s = out[static_cast<std::size_t>(src)];
  s.kind = FeatureKind::categorical;
  s.categories = {recipe.below_name.empty() ? recipe.source_feature + "<t" : recipe.below_name,
                  recipe.at_or_above_name.empty() ? recipe.source_feature + ">=t"
                                                  : recipe.at_or_above_name};
  FeatureSchema derived;
  derived.name = recipe.source_feature + "_original";
  derived.kind = FeatureKind::numeric;
  derived.role = FeatureRole::ignored;
  out.push_back(std::move(derived));
  return out;
}

Dataset binarize(const Dataset& ds, const BinarizeRecipe& recipe) {
  std::vector<FeatureSchema> schema = binarized_schema(ds.schema(), recipe);
  int src = ds.find_column(recipe.source_feature);

  std::span<const double> vals = ds.values(src);
  std::vector<std::int32_t> binary(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    binary[i] = vals[i] < recipe.threshold ? 0 : 1;
  }

  std::vector<Dataset::Column> columns;
  columns.reserve(schema.size());
  for (int c = 0; c < ds.column_count(); ++c) {
    if (c == src) {
      columns.emplace_back(std::move(binary));
    } else if (ds.is_categorical(c)) {
      columns.emplace_back(std::vector<std::int32_t>(ds.codes(c).begin(), ds.codes(c).end()));
    } else {
      columns.emplace_back(std::vector<double>(ds.values(c).begin(), ds.values(c).end()));
    }
  }
  columns.emplace_back(std::vector<double>(vals.begin(), vals.end()));

  return Dataset(std::move(schema), std::move(columns));
}

// -- folds ---------------------------------------------------------------------

std::vector<FoldPair> make_folds(const Dataset& ds, int folds, std::uint64_t seed) {
  const std::int32_t n = ds.row_count();
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (folds > n) throw std::invalid_argument("folds exceeds the number of rows");

  std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(mix_seed(seed, 0x0f01d5ULL));
  rng.shuffle(std::span<std::int32_t>(perm));

  std::vector<FoldPair> out;
  out.reserve(static_cast<std::size_t>(folds));
  std::int32_t base = n / folds;
  std::int32_t extra = n % folds;
  std::int32_t start = 0;
  std::vector<char> in_test(static_cast<std::size_t>(n));
  for (int f = 0; f < folds; ++f) {
    std::int32_t len = base + (f < extra ? 1 : 0);
    std::vector<std::int32_t> test(perm.begin() + start, perm.begin() + start + len);
    start += len;
    std::sort(test.begin(), test.end());
    std::fill(in_test.begin(), in_test.end(), 0);
    for (std::int32_t r : test) in_test[static_cast<std::size_t>(r)] = 1;
    std::vector<std::int32_t> train;
    train.reserve(static_cast<std::size_t>(n - len));
    for (std::int32_t r = 0; r < n; ++r) {
      if (!in_test[static_cast<std::size_t>(r)]) train.push_back(r);
    }
    out.push_back(FoldPair{SubsetView(ds, std::move(train)), SubsetView(ds, std::move(test))});
  }
  return out;
}

// -- moments --------------------------------------------------------------------

MomentSummary moments(const SubsetView& view, int col) {
  if (view.empty()) throw std::domain_error("moments of an empty view");
  std::span<const double> vals = view.data().values(col);
  double sum = 0.0;
  for (std::int32_t r : view.rows()) sum += vals[static_cast<std::size_t>(r)];
  const double n = static_cast<double>(view.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (std::int32_t r : view.rows()) {
    double d = vals[static_cast<std::size_t>(r)] - mean;
    ss += d * d;
  }
  MomentSummary m;
  m.mean = mean;
  m.std_dev = std::sqrt(ss / n);
  m.count = view.size();
  return m;
}

MomentSummary moments(const SubsetView& view, std::string_view feature) {
  return moments(view, view.data().require_column(feature));
}

}  // namespace fairforest
