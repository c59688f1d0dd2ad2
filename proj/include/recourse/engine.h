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

#ifndef RECOURSE_ENGINE_H_
#define RECOURSE_ENGINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recourse/counterfactual.h"
#include "recourse/explainer.h"
#include "recourse/io.h"
#include "recourse/model.h"
#include "recourse/planner.h"

namespace recourse {

struct EngineConfig {
  std::filesystem::path model_path;
  std::filesystem::path catalog_path;
  std::filesystem::path templates_path;
  std::filesystem::path dataset_path;
  std::filesystem::path session_log;
  double discount = 0.95;
  double epsilon = 1e-6;
  std::uint64_t seed = 42;
  // Continuous step overrides for the counterfactual grid, by feature name.
  std::map<std::string, double> grid_steps;
  std::size_t state_cap = 100000;
  std::string bind = "127.0.0.1:8080";

  // Throws kInvalidInput for values outside their valid ranges.
  void validate() const;
};

// Reads a config JSON; relative paths resolve against the file's directory.
EngineConfig config_from_json(const Json& j, const std::filesystem::path& base);
EngineConfig load_config(const std::filesystem::path& path);

enum class Solver { kValueIteration, kQLearning };
Solver parse_solver(std::string_view text);

struct PlanRequest {
  FeatureVector x;
  std::optional<Label> desired;
  Solver solver = Solver::kValueIteration;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> focus;
};

struct PlanResult {
  Label target = Label::kPositive;
  std::shared_ptr<const RecourseMdp> mdp;
  Policy policy;
  double reachability = 0.0;
  PolicyCost cost;
  std::vector<PlanStep> steps;
};

struct ExplainRequest {
  FeatureVector x;
  std::optional<Label> desired;
  // Empty means all three kinds, length-balanced.
  std::optional<ExplanationKind> kind;
  std::string scenario;
  std::vector<std::size_t> focus;
};

struct ExplainResult {
  DirectiveExplanation tuple;
  std::string introduction;
  std::vector<ExplanationText> texts;
  // Directive kinds were requested but no plan reaches the goal.
  bool directive_unavailable = false;
};

// Immutable after construction; safe to share across threads.
class Engine {
 public:
  Engine(ModelBundle bundle, ActionCatalog catalog, TemplateSet templates,
         EngineConfig config);
  static Engine load(const EngineConfig& config);

  const FeatureSchema& schema() const { return *bundle_.schema; }
  const LinearModel& model() const { return *bundle_.model; }
  const MadWeights& weights() const { return bundle_.weights; }
  const ActionCatalog& catalog() const { return catalog_; }
  const TemplateSet& templates() const { return templates_; }
  const EngineConfig& config() const { return config_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const std::shared_ptr<const FeatureSchema>& schema_ptr() const {
    return bundle_.schema;
  }

  // The label a query aims for: `desired` unless x already has it, in which
  // case the opposite label (a boundary explanation).
  Label target_label(const FeatureVector& x, std::optional<Label> desired) const;

  SearchGrid counterfactual_grid(const std::vector<std::size_t>& focus,
                                 const std::map<std::string, double>& steps) const;

  std::vector<Counterfactual> counterfactuals(
      const FeatureVector& x, std::optional<Label> desired, std::size_t k,
      const std::vector<std::size_t>& focus,
      const std::map<std::string, double>& steps) const;

  // Without an explicit grid every mutable numeric feature may move to any
  // of its grid values at a unit cost equal to its MAD weight.
  ActionGrid default_action_grid(const FeatureVector& x) const;
  std::optional<FlipSet> flipset(const FeatureVector& x,
                                 std::optional<Label> desired, double budget,
                                 const std::optional<ActionGrid>& grid) const;

  PlanResult plan(const PlanRequest& request) const;
  ExplainResult explain(const ExplainRequest& request) const;

 private:
  ModelBundle bundle_;
  ActionCatalog catalog_;
  TemplateSet templates_;
  EngineConfig config_;
  std::string fingerprint_;
};

}  // namespace recourse

#endif  // RECOURSE_ENGINE_H_
