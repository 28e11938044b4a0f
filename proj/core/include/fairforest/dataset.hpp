#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairforest {

enum class FeatureKind { categorical, numeric };
enum class FeatureRole { feature, label, protected_attr, ignored };

std::string to_string(FeatureKind kind);
std::string to_string(FeatureRole role);
FeatureKind feature_kind_from_string(std::string_view s);
FeatureRole feature_role_from_string(std::string_view s);

/// Per-column schema entry. Categorical columns carry their category
/// dictionary; arity is the dictionary size and codes index into it.
struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  FeatureRole role = FeatureRole::feature;
  std::vector<std::string> categories;  // categorical only

  int arity() const { return static_cast<int>(categories.size()); }
};

/// Replaces a numeric column by the arity-2 categorical `value >= threshold`.
struct BinarizeRecipe {
  std::string source_feature;
  double threshold = 0.0;
  std::string below_name;        // category for value <  threshold (code 0)
  std::string at_or_above_name;  // category for value >= threshold (code 1)
};

/// Parsed schema sidecar: column declarations plus optional binarize recipes.
/// Columns without a declared category list discover categories in load order.
struct SchemaSpec {
  std::vector<FeatureSchema> columns;
  std::vector<BinarizeRecipe> recipes;
};

struct MomentSummary {
  double mean = 0.0;
  double std_dev = 0.0;  // population (divide-by-n)
  std::int64_t count = 0;
};

class SubsetView;

/// Immutable column store. Categorical columns hold small-integer codes into
/// their category dictionary, numeric columns hold doubles. Never mutated
/// after construction; safe to share across threads.
class Dataset {
 public:
  using Column = std::variant<std::vector<std::int32_t>, std::vector<double>>;

  Dataset(std::vector<FeatureSchema> schema, std::vector<Column> columns);

  std::int32_t row_count() const { return rows_; }
  int column_count() const { return static_cast<int>(schema_.size()); }
  const FeatureSchema& schema(int col) const { return schema_[static_cast<std::size_t>(col)]; }
  const std::vector<FeatureSchema>& schema() const { return schema_; }

  int find_column(std::string_view name) const;      // -1 when absent
  int require_column(std::string_view name) const;   // throws std::invalid_argument

  bool is_categorical(int col) const { return schema(col).kind == FeatureKind::categorical; }
  std::span<const std::int32_t> codes(int col) const;
  std::span<const double> values(int col) const;

  int label_column() const { return label_col_; }
  int protected_column() const { return protected_col_; }  // -1 when absent

  /// FNV-1a over names, kinds, roles and category dictionaries.
  std::uint64_t schema_fingerprint() const;

  SubsetView all() const;

 private:
  std::vector<FeatureSchema> schema_;
  std::vector<Column> columns_;
  std::int32_t rows_ = 0;
  int label_col_ = -1;
  int protected_col_ = -1;
};

/// A strictly-increasing list of row indices into a root Dataset. Views are
/// cheap to copy (rows are shared) and a view of a view resolves to root
/// indices.
class SubsetView {
 public:
  explicit SubsetView(const Dataset& ds);  // all rows
  SubsetView(const Dataset& ds, std::vector<std::int32_t> rows);

  const Dataset& data() const { return *ds_; }
  std::span<const std::int32_t> rows() const { return *rows_; }
  std::int32_t size() const { return static_cast<std::int32_t>(rows_->size()); }
  bool empty() const { return rows_->empty(); }

  /// local positions into this view -> view over root indices
  SubsetView subset(std::span<const std::int32_t> local_positions) const;

 private:
  const Dataset* ds_;
  std::shared_ptr<const std::vector<std::int32_t>> rows_;
};

// -- schema sidecar ---------------------------------------------------------

SchemaSpec load_schema(const std::string& path);
SchemaSpec parse_schema(const std::string& json_text, const std::string& origin = "<schema>");

// -- loading ---------------------------------------------------------------

/// Loads an RFC-4180 CSV against a schema. CSV columns are matched to schema
/// entries by header name (all schema columns must be present; order in the
/// file does not matter). Unparseable or missing cells raise DataError with
/// row/column coordinates, except in `ignored` columns where missing numeric
/// cells become NaN and missing categorical cells the empty-string category.
Dataset load_csv(const std::string& data_path, const SchemaSpec& schema);
Dataset load_csv(const std::string& data_path, const std::string& schema_path);
Dataset load_csv_text(const std::string& csv_text, const SchemaSpec& schema,
                      const std::string& origin = "<csv>");

// -- transforms ------------------------------------------------------------

/// Applies a BinarizeRecipe: the source column becomes categorical(2) with
/// code 0 = below threshold, code 1 = at-or-above; role is preserved. The
/// original numeric values are appended as `<name>_original` with role
/// `ignored` so threshold-free metrics can still see them.
Dataset binarize(const Dataset& ds, const BinarizeRecipe& recipe);

/// The schema binarize() would produce, without data.
std::vector<FeatureSchema> binarized_schema(const std::vector<FeatureSchema>& schema,
                                            const BinarizeRecipe& recipe);

// -- folds and moments -------------------------------------------------------

struct FoldPair {
  SubsetView train;
  SubsetView test;
};

/// Seeded shuffle, then contiguous slices; fold sizes differ by at most one.
/// The permutation depends only on `seed`.
std::vector<FoldPair> make_folds(const Dataset& ds, int folds, std::uint64_t seed);

/// Mean and population standard deviation of a numeric feature over a view.
MomentSummary moments(const SubsetView& view, int col);
MomentSummary moments(const SubsetView& view, std::string_view feature);

}  // namespace fairforest
