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

#ifndef RECOURSE_IO_H_
#define RECOURSE_IO_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recourse/counterfactual.h"
#include "recourse/explainer.h"
#include "recourse/model.h"
#include "recourse/planner.h"
#include "recourse/schema.h"

namespace recourse {

using Json = nlohmann::ordered_json;

// Throws kInvalidInput with the path in the message.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

FeatureSchema schema_from_json(const Json& j);
Json schema_to_json(const FeatureSchema& schema);

// "approve"/"deny", "positive"/"negative" or 1/0.
Label label_from_json(const Json& j);
std::string_view decision_word(Label label);

// Object keyed by feature name; every feature is required. Categorical and
// labelled ordinal features accept their label strings.
FeatureVector profile_from_json(const FeatureSchema& schema, const Json& j);
Json profile_to_json(const FeatureSchema& schema, const FeatureVector& x);
// Copy of `x` with the named features overwritten.
FeatureVector apply_changes(const FeatureSchema& schema, const FeatureVector& x,
                            const Json& changes);

struct ModelBundle {
  std::shared_ptr<const FeatureSchema> schema;
  std::shared_ptr<const LinearModel> model;
  MadWeights weights;
};

// Model files embed their schema; "mad" is optional and defaults to unit
// weights.
ModelBundle model_from_json(const Json& j);
Json model_to_json(const LinearModel& model, const MadWeights& weights);

ActionCatalog catalog_from_json(const FeatureSchema& schema, const Json& j);
Json catalog_to_json(const FeatureSchema& schema, const ActionCatalog& catalog);

ActionGrid action_grid_from_json(const FeatureSchema& schema, const Json& j);

TemplateSet templates_from_json(const Json& j);

std::vector<std::size_t> features_from_json(const FeatureSchema& schema,
                                            const Json& names);

// A customer profile file: {"scenario", "desired", "focus", "profile"}.
struct ProfileFile {
  FeatureVector x;
  std::string scenario;
  std::optional<Label> desired;
  std::vector<std::size_t> focus;
};

ProfileFile profile_file_from_json(const FeatureSchema& schema, const Json& j);

// CSV with a header naming every schema feature plus a "label" column.
// Errors carry the 1-based line number and the column name.
Dataset read_dataset_csv(const FeatureSchema& schema,
                         const std::filesystem::path& path);

Json counterfactual_to_json(const FeatureSchema& schema,
                            const Counterfactual& c);
Json flipset_to_json(const FeatureSchema& schema, const FeatureVector& x,
                     const FlipSet& flipset);
Json plan_step_to_json(const PlanStep& step);
Json explanation_to_json(const ExplanationText& text);

}  // namespace recourse

#endif  // RECOURSE_IO_H_
