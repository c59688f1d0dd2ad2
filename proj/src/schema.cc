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

#include "recourse/schema.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "recourse/error.h"

namespace recourse {
namespace {

constexpr double kLevelTolerance = 1e-9;

bool near(double a, double b) {
  return std::abs(a - b) <= kLevelTolerance * std::max(1.0, std::abs(b));
}

std::string fixed(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  std::string text(buffer);
  // "-0" and "-0.00" print as zero.
  if (text.front() == '-' &&
      text.find_first_not_of("-0.") == std::string::npos) {
    text.erase(0, 1);
  }
  return text;
}

void check_spec(const FeatureSpec& spec) {
  if (spec.name.empty()) throw_invalid("feature with empty name");
  if (!(spec.lo <= spec.hi)) {
    throw_invalid("feature '" + spec.name + "': bounds lo > hi");
  }
  switch (spec.kind) {
    case FeatureKind::kContinuous:
      if (spec.step < 0.0) {
        throw_invalid("feature '" + spec.name + "': negative step");
      }
      break;
    case FeatureKind::kOrdinal:
      if (spec.levels.empty()) {
        throw_invalid("ordinal feature '" + spec.name + "' has no levels");
      }
      if (!std::is_sorted(spec.levels.begin(), spec.levels.end()) ||
          std::adjacent_find(spec.levels.begin(), spec.levels.end()) !=
              spec.levels.end()) {
        throw_invalid("ordinal feature '" + spec.name +
                      "': levels must be strictly increasing");
      }
      if (spec.levels.front() < spec.lo || spec.levels.back() > spec.hi) {
        throw_invalid("ordinal feature '" + spec.name +
                      "': levels outside bounds");
      }
      if (!spec.labels.empty() && spec.labels.size() != spec.levels.size()) {
        throw_invalid("ordinal feature '" + spec.name +
                      "': labels must match levels one to one");
      }
      break;
    case FeatureKind::kCategorical:
      if (spec.labels.empty()) {
        throw_invalid("categorical feature '" + spec.name +
                      "' has no categories");
      }
      break;
  }
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features)
    : features_(std::move(features)) {
  if (features_.empty()) throw_invalid("schema has no features");
  for (std::size_t i = 0; i < features_.size(); ++i) {
    FeatureSpec& spec = features_[i];
    check_spec(spec);
    if (spec.kind == FeatureKind::kCategorical) {
      spec.lo = 0.0;
      spec.hi = static_cast<double>(spec.labels.size() - 1);
    }
    if (spec.display_name.empty()) spec.display_name = spec.name;
    if (!by_name_.emplace(spec.name, i).second) {
      throw_invalid("duplicate feature name '" + spec.name + "'");
    }
    offsets_.push_back(encoded_width_);
    encoded_width_ += spec.kind == FeatureKind::kCategorical
                          ? spec.labels.size()
                          : 1;
  }
  for (const FeatureSpec& spec : features_) {
    for (const Clause& clause : spec.condition) {
      if (clause.feature >= features_.size()) {
        throw_invalid("feature '" + spec.name +
                      "': condition refers to an unknown feature");
      }
    }
  }
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  auto index = find(name);
  if (!index) throw_invalid("unknown feature '" + std::string(name) + "'");
  return *index;
}

bool FeatureSchema::value_admissible(std::size_t feature, double value) const {
  const FeatureSpec& spec = features_[feature];
  if (!std::isfinite(value)) return false;
  switch (spec.kind) {
    case FeatureKind::kContinuous:
      return value >= spec.lo && value <= spec.hi;
    case FeatureKind::kOrdinal:
      return std::any_of(spec.levels.begin(), spec.levels.end(),
                         [&](double level) { return near(value, level); });
    case FeatureKind::kCategorical:
      return value >= 0.0 && value == std::floor(value) &&
             value < static_cast<double>(spec.labels.size());
  }
  return false;
}

void FeatureSchema::validate(const FeatureVector& x) const {
  if (x.size() != features_.size()) {
    throw_invalid("feature vector has " + std::to_string(x.size()) +
                  " values, schema has " + std::to_string(features_.size()));
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!value_admissible(i, x[i])) {
      throw_invalid("feature '" + features_[i].name + "': value " +
                    fixed(x[i], 6) + " is outside its admissible set");
    }
  }
}

bool FeatureSchema::conforms(const FeatureVector& x) const {
  if (x.size() != features_.size()) return false;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!value_admissible(i, x[i])) return false;
  }
  return true;
}

bool FeatureSchema::has_mutable_feature() const {
  return std::any_of(features_.begin(), features_.end(),
                     [](const FeatureSpec& spec) {
                       return spec.mutability != Mutability::kImmutable;
                     });
}

bool FeatureSchema::is_mutable_for(std::size_t feature,
                                   const FeatureVector& x) const {
  const FeatureSpec& spec = features_[feature];
  switch (spec.mutability) {
    case Mutability::kImmutable:
      return false;
    case Mutability::kActionable:
      return true;
    case Mutability::kConditionallyMutable:
      return !spec.condition.empty() && holds_all(spec.condition, x);
  }
  return false;
}

void FeatureSchema::encode(const FeatureVector& x,
                           std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].kind == FeatureKind::kCategorical) {
      out[offsets_[i] + static_cast<std::size_t>(x[i])] = 1.0;
    } else {
      out[offsets_[i]] = x[i];
    }
  }
}

std::vector<double> FeatureSchema::grid_values(std::size_t feature) const {
  return grid_values(feature, features_[feature].step);
}

std::vector<double> FeatureSchema::grid_values(std::size_t feature,
                                               double step) const {
  const FeatureSpec& spec = features_[feature];
  std::vector<double> values;
  switch (spec.kind) {
    case FeatureKind::kOrdinal:
      return spec.levels;
    case FeatureKind::kCategorical:
      for (std::size_t c = 0; c < spec.labels.size(); ++c) {
        values.push_back(static_cast<double>(c));
      }
      return values;
    case FeatureKind::kContinuous:
      break;
  }
  if (step <= 0.0) step = (spec.hi - spec.lo) / 100.0;
  if (step <= 0.0) return {spec.lo};
  const auto count = static_cast<std::size_t>(
      std::floor((spec.hi - spec.lo) / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) {
    values.push_back(spec.lo + static_cast<double>(k) * step);
  }
  return values;
}

std::string FeatureSchema::format_value(std::size_t feature,
                                        double value) const {
  const FeatureSpec& spec = features_[feature];
  if (spec.kind == FeatureKind::kCategorical) {
    const auto index = static_cast<std::size_t>(std::lround(value));
    return index < spec.labels.size() ? spec.labels[index] : fixed(value, 0);
  }
  if (spec.kind == FeatureKind::kOrdinal && !spec.labels.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < spec.levels.size(); ++k) {
      if (std::abs(spec.levels[k] - value) <
          std::abs(spec.levels[best] - value)) {
        best = k;
      }
    }
    return spec.labels[best];
  }
  const std::string number = fixed(value, spec.precision);
  if (spec.unit == "$") return "$" + number;
  if (spec.unit == "%") return number + "%";
  return number;
}

bool holds(const Clause& clause, const FeatureVector& x) {
  const double v = x[clause.feature];
  switch (clause.op) {
    case Comparison::kLess:
      return v < clause.value;
    case Comparison::kLessEqual:
      return v <= clause.value;
    case Comparison::kGreater:
      return v > clause.value;
    case Comparison::kGreaterEqual:
      return v >= clause.value;
    case Comparison::kEqual:
      return v == clause.value;
    case Comparison::kNotEqual:
      return v != clause.value;
  }
  return false;
}

bool holds_all(std::span<const Clause> clauses, const FeatureVector& x) {
  return std::all_of(clauses.begin(), clauses.end(),
                     [&](const Clause& clause) { return holds(clause, x); });
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous:
      return "continuous";
    case FeatureKind::kOrdinal:
      return "ordinal";
    case FeatureKind::kCategorical:
      return "categorical";
  }
  return "?";
}

std::string_view to_string(Mutability mutability) {
  switch (mutability) {
    case Mutability::kImmutable:
      return "immutable";
    case Mutability::kConditionallyMutable:
      return "conditionally-mutable";
    case Mutability::kActionable:
      return "actionable";
  }
  return "?";
}

std::string_view to_string(Direction direction) {
  switch (direction) {
    case Direction::kFree:
      return "free";
    case Direction::kIncreaseOnly:
      return "increase-only";
    case Direction::kDecreaseOnly:
      return "decrease-only";
  }
  return "?";
}

std::string_view to_string(Comparison op) {
  switch (op) {
    case Comparison::kLess:
      return "<";
    case Comparison::kLessEqual:
      return "<=";
    case Comparison::kGreater:
      return ">";
    case Comparison::kGreaterEqual:
      return ">=";
    case Comparison::kEqual:
      return "==";
    case Comparison::kNotEqual:
      return "!=";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "continuous") return FeatureKind::kContinuous;
  if (text == "ordinal") return FeatureKind::kOrdinal;
  if (text == "categorical") return FeatureKind::kCategorical;
  throw_invalid("unknown feature kind '" + std::string(text) + "'");
}

Mutability parse_mutability(std::string_view text) {
  if (text == "immutable") return Mutability::kImmutable;
  if (text == "conditionally-mutable") {
    return Mutability::kConditionallyMutable;
  }
  if (text == "actionable") return Mutability::kActionable;
  throw_invalid("unknown mutability '" + std::string(text) + "'");
}

Direction parse_direction(std::string_view text) {
  if (text == "free") return Direction::kFree;
  if (text == "increase-only") return Direction::kIncreaseOnly;
  if (text == "decrease-only") return Direction::kDecreaseOnly;
  throw_invalid("unknown direction '" + std::string(text) + "'");
}

Comparison parse_comparison(std::string_view text) {
  if (text == "<") return Comparison::kLess;
  if (text == "<=") return Comparison::kLessEqual;
  if (text == ">") return Comparison::kGreater;
  if (text == ">=") return Comparison::kGreaterEqual;
  if (text == "==") return Comparison::kEqual;
  if (text == "!=") return Comparison::kNotEqual;
  throw_invalid("unknown comparison '" + std::string(text) + "'");
}

}  // namespace recourse
