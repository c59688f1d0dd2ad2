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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "recourse/engine.h"
#include "recourse/error.h"
#include "recourse/io.h"

namespace recourse {
namespace {

namespace fs = std::filesystem;

const fs::path kDemo = RECOURSE_DEMO_DIR;

Json small_schema() {
  return Json::parse(R"({"features": [
    {"name": "income", "kind": "continuous", "lo": 0, "hi": 100, "step": 10,
     "unit": "$"},
    {"name": "grade", "kind": "ordinal", "levels": [1, 2, 3],
     "labels": ["A", "B", "C"], "direction": "decrease-only"},
    {"name": "cards", "kind": "ordinal", "levels": [0, 1, 2, 3],
     "mutability": "conditionally-mutable",
     "condition": [{"feature": "cards", "op": ">=", "value": 1}]},
    {"name": "purpose", "kind": "categorical", "labels": ["car", "home"],
     "mutability": "immutable"}]})");
}

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const RecourseError& e) {
    return e.what();
  }
  return "";
}

TEST(SchemaJson, ParsesAndRoundTrips) {
  const FeatureSchema schema = schema_from_json(small_schema());
  ASSERT_EQ(schema.size(), 4u);
  EXPECT_EQ(schema[1].direction, Direction::kDecreaseOnly);
  EXPECT_DOUBLE_EQ(schema[1].lo, 1);
  EXPECT_DOUBLE_EQ(schema[1].hi, 3);
  EXPECT_EQ(schema[2].condition.size(), 1u);
  EXPECT_EQ(schema[3].mutability, Mutability::kImmutable);
  const FeatureSchema again = schema_from_json(schema_to_json(schema));
  EXPECT_EQ(schema_to_json(again), schema_to_json(schema));
}

TEST(SchemaJson, RejectsUnknownKinds) {
  Json j = small_schema();
  j["features"][0]["kind"] = "fuzzy";
  EXPECT_THROW(schema_from_json(j), RecourseError);
  EXPECT_THROW(schema_from_json(Json::object()), RecourseError);
}

TEST(ProfileJson, AcceptsLabelsForCategories) {
  const FeatureSchema schema = schema_from_json(small_schema());
  const FeatureVector x = profile_from_json(
      schema, Json::parse(R"({"income": 30, "grade": "B", "cards": 2,
                              "purpose": "home"})"));
  EXPECT_EQ(x, FeatureVector({30, 2, 2, 1}));
  const Json back = profile_to_json(schema, x);
  EXPECT_EQ(back["purpose"], "home");
  EXPECT_EQ(profile_from_json(schema, back), x);
  EXPECT_NE(message_of([&] {
              profile_from_json(schema, Json::parse(R"({"income": 30})"));
            }).find("grade"),
            std::string::npos);
  EXPECT_THROW(profile_from_json(schema, Json::parse(R"({"income": 30,
      "grade": "Z", "cards": 2, "purpose": "home"})")),
               RecourseError);
}

TEST(ProfileJson, AppliesChanges) {
  const FeatureSchema schema = schema_from_json(small_schema());
  const FeatureVector x({30, 2, 2, 1});
  EXPECT_EQ(apply_changes(schema, x, Json::parse(R"({"income": 60})")),
            FeatureVector({60, 2, 2, 1}));
  EXPECT_THROW(apply_changes(schema, x, Json::parse(R"({"wealth": 60})")),
               RecourseError);
  EXPECT_THROW(apply_changes(schema, x, Json::parse(R"({"income": 600})")),
               RecourseError);
}

TEST(LabelJson, AcceptsWordsAndNumbers) {
  EXPECT_EQ(label_from_json("approve"), Label::kPositive);
  EXPECT_EQ(label_from_json("deny"), Label::kNegative);
  EXPECT_EQ(label_from_json(1), Label::kPositive);
  EXPECT_THROW(label_from_json("maybe"), RecourseError);
  EXPECT_EQ(decision_word(Label::kNegative), "deny");
}

TEST(ModelJson, RoundTripsCoefficientsAndMad) {
  const Json j = read_json_file(kDemo / "model.json");
  const ModelBundle bundle = model_from_json(j);
  EXPECT_EQ(bundle.schema->size(), 13u);
  const std::size_t income = bundle.schema->index_of("income");
  EXPECT_DOUBLE_EQ(bundle.model->coefficient(income), 8e-05);
  EXPECT_DOUBLE_EQ(bundle.weights.mad[income], 35000);
  const ModelBundle again = model_from_json(model_to_json(*bundle.model, bundle.weights));
  EXPECT_EQ(model_fingerprint(*again.model), model_fingerprint(*bundle.model));
  EXPECT_EQ(again.weights.mad, bundle.weights.mad);
}

TEST(CatalogJson, ReadsDeterministicAndStochasticActions) {
  const FeatureSchema schema = schema_from_json(small_schema());
  const Json j = Json::parse(R"({"actions": [
    {"name": "raise", "class": "earn more", "cost": 1,
     "effects": {"income": 10}},
    {"name": "gamble", "cost": 2, "outcomes": [
      {"probability": 0.25, "effects": {"income": 30}},
      {"probability": 0.75, "effects": {"income": 0}}],
     "preconditions": [{"feature": "income", "op": "<", "value": 70}]}]})");
  const ActionCatalog catalog = catalog_from_json(schema, j);
  ASSERT_EQ(catalog.size(), 2u);
  EXPECT_EQ(catalog[0].class_tag, "earn more");
  EXPECT_EQ(catalog[1].outcome_probs, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(catalog[1].preconditions[0].op, Comparison::kLess);
  const ActionCatalog again =
      catalog_from_json(schema, catalog_to_json(schema, catalog));
  EXPECT_EQ(catalog_to_json(schema, again), catalog_to_json(schema, catalog));

  Json immutable = j;
  immutable["actions"][0]["effects"] = {{"purpose", 1}};
  EXPECT_THROW(catalog_from_json(schema, immutable), RecourseError);
}

TEST(CatalogJson, DemoCatalogLoads) {
  const ModelBundle bundle = model_from_json(read_json_file(kDemo / "model.json"));
  const ActionCatalog catalog =
      catalog_from_json(*bundle.schema, read_json_file(kDemo / "catalog.json"));
  EXPECT_EQ(catalog.size(), 15u);
  for (const Action& action : catalog.actions()) {
    EXPECT_FALSE(action.class_tag.empty()) << action.name;
  }
}

TEST(TemplatesJson, DemoTemplatesCoverScenarios) {
  const TemplateSet templates =
      templates_from_json(read_json_file(kDemo / "templates.json"));
  EXPECT_EQ(templates.scenarios.size(), 15u);
  EXPECT_TRUE(templates.generic_positive.has_value());
  EXPECT_TRUE(templates.generic_negative.has_value());
  EXPECT_FALSE(templates.features.empty());
}

TEST(DatasetCsv, ReadsRowsAndLabels) {
  const FeatureSchema schema = schema_from_json(small_schema());
  const fs::path path = temp_file(
      "recourse_ok.csv",
      "purpose,income,grade,cards,label\nhome,30,B,2,1\ncar,40,1,0,0\n");
  const Dataset d = read_dataset_csv(schema, path);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.rows[0], FeatureVector({30, 2, 2, 1}));
  EXPECT_EQ(d.labels[1], Label::kNegative);
}

TEST(DatasetCsv, ErrorsNameLineAndColumn) {
  const FeatureSchema schema = schema_from_json(small_schema());
  const fs::path bad_value = temp_file(
      "recourse_bad.csv", "income,grade,cards,purpose,label\n30,B,2,home,1\n"
                          "x,B,2,home,1\n");
  const std::string message =
      message_of([&] { read_dataset_csv(schema, bad_value); });
  EXPECT_NE(message.find(":3"), std::string::npos) << message;
  EXPECT_NE(message.find("income"), std::string::npos) << message;
  const fs::path no_label =
      temp_file("recourse_nolabel.csv", "income,grade,cards,purpose\n30,B,2,home\n");
  EXPECT_NE(message_of([&] { read_dataset_csv(schema, no_label); }).find("label"),
            std::string::npos);
  EXPECT_THROW(read_dataset_csv(schema, "/nonexistent/file.csv"), RecourseError);
}

TEST(Config, ResolvesPathsAgainstFile) {
  const EngineConfig config = load_config(kDemo / "config.json");
  EXPECT_EQ(config.model_path, kDemo / "model.json");
  EXPECT_DOUBLE_EQ(config.discount, 0.95);
  EXPECT_EQ(config.seed, 42u);
  const Json bad = Json::parse(R"({"discount": 1.5})");
  EXPECT_THROW(config_from_json(bad, kDemo), RecourseError);
  EXPECT_THROW(read_json_file(kDemo / "missing.json"), RecourseError);
}

}  // namespace
}  // namespace recourse
