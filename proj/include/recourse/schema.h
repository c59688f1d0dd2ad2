/*
 * Copyright 2026 The Recourse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RECOURSE_SCHEMA_H_
#define RECOURSE_SCHEMA_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace recourse {

enum class FeatureKind { kContinuous, kOrdinal, kCategorical };

// Who may change a feature. Conditionally-mutable features are mutable only
// for instances satisfying the feature's condition clauses.
enum class Mutability { kImmutable, kConditionallyMutable, kActionable };

enum class Direction { kFree, kIncreaseOnly, kDecreaseOnly };

enum class Comparison {
  kLess,
  kLessEqual,
  kGreater,
  kGreaterEqual,
  kEqual,
  kNotEqual,
};

// A threshold test on one feature, e.g. `dti >= 10`. Categorical values are
// stored as category indices.
struct Clause {
  std::size_t feature = 0;
  Comparison op = Comparison::kEqual;
  double value = 0.0;
};

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  double lo = 0.0;
  double hi = 0.0;
  std::string unit;
  Mutability mutability = Mutability::kActionable;
  Direction direction = Direction::kFree;

  // Ordinal: the sorted admissible values.
  std::vector<double> levels;
  // Ordinal: optional display label per level. Categorical: category names.
  std::vector<std::string> labels;

  // Spacing of the search grid for continuous features.
  double step = 0.0;
  // Decimals used when printing values of this feature.
  int precision = 0;
  // Human-readable name used in explanation text. Defaults to `name`.
  std::string display_name;
  // For kConditionallyMutable: all clauses must hold for the instance.
  std::vector<Clause> condition;

  std::size_t num_categories() const { return labels.size(); }
};

// Feature values in schema order. Categorical values are category indices.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> values)
      : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> values_;
};

class FeatureSchema {
 public:
  // Throws RecourseError(kInvalidInput) when a spec is malformed.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const { return features_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws kInvalidInput for unknown names.
  std::size_t index_of(std::string_view name) const;

  // Throws kInvalidInput naming the first offending feature.
  void validate(const FeatureVector& x) const;
  bool conforms(const FeatureVector& x) const;
  bool value_admissible(std::size_t feature, double value) const;

  bool has_mutable_feature() const;
  // Mutability class plus the conditional clauses evaluated on `x`.
  bool is_mutable_for(std::size_t feature, const FeatureVector& x) const;

  // Width of the one-hot encoded design row.
  std::size_t encoded_width() const { return encoded_width_; }
  std::size_t encoded_offset(std::size_t feature) const {
    return offsets_[feature];
  }
  void encode(const FeatureVector& x, std::span<double> out) const;

  // Candidate values for search: the level set for ordinal features, every
  // category for categorical ones and lo, lo+step, ... <= hi otherwise.
  std::vector<double> grid_values(std::size_t feature) const;
  std::vector<double> grid_values(std::size_t feature, double step) const;

  // Printable value with unit decoration: "$42000", "33%", "C".
  std::string format_value(std::size_t feature, double value) const;

 private:
  std::vector<FeatureSpec> features_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<std::size_t> offsets_;
  std::size_t encoded_width_ = 0;
};

bool holds(const Clause& clause, const FeatureVector& x);
bool holds_all(std::span<const Clause> clauses, const FeatureVector& x);

std::string_view to_string(FeatureKind kind);
std::string_view to_string(Mutability mutability);
std::string_view to_string(Direction direction);
std::string_view to_string(Comparison op);
FeatureKind parse_feature_kind(std::string_view text);
Mutability parse_mutability(std::string_view text);
Direction parse_direction(std::string_view text);
Comparison parse_comparison(std::string_view text);

}  // namespace recourse

#endif  // RECOURSE_SCHEMA_H_
