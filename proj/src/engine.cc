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

#include "recourse/engine.h"

#include <cmath>

#include "recourse/error.h"

namespace recourse {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

void EngineConfig::validate() const {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw_invalid("discount must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw_invalid("epsilon must be positive");
  if (state_cap == 0) throw_invalid("state cap must be positive");
  for (const auto& [name, step] : grid_steps) {
    if (!(step > 0.0)) throw_invalid("grid step for '" + name + "' must be positive");
  }
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size()) {
    throw_invalid("bind address must look like host:port");
  }
}

EngineConfig config_from_json(const Json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw_invalid("config must be an object");
  EngineConfig config;
  auto path = [&](const char* key, std::filesystem::path& out) {
    if (auto it = j.find(key); it != j.end()) {
      out = resolve(base, it->get<std::string>());
    }
  };
  path("model", config.model_path);
  path("catalog", config.catalog_path);
  path("templates", config.templates_path);
  path("dataset", config.dataset_path);
  path("session_log", config.session_log);
  config.discount = j.value("discount", config.discount);
  config.epsilon = j.value("epsilon", config.epsilon);
  config.seed = j.value("seed", config.seed);
  config.state_cap = j.value("state_cap", config.state_cap);
  config.bind = j.value("bind", config.bind);
  if (auto it = j.find("grid_steps"); it != j.end()) {
    for (const auto& [name, step] : it->items()) {
      config.grid_steps[name] = step.get<double>();
    }
  }
  config.validate();
  return config;
}

EngineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

Solver parse_solver(std::string_view text) {
  if (text == "vi" || text == "value-iteration") return Solver::kValueIteration;
  if (text == "q" || text == "q-learning") return Solver::kQLearning;
  throw_invalid("solver must be vi or q");
}

Engine::Engine(ModelBundle bundle, ActionCatalog catalog, TemplateSet templates,
               EngineConfig config)
    : bundle_(std::move(bundle)),
      catalog_(std::move(catalog)),
      templates_(std::move(templates)),
      config_(std::move(config)) {
  config_.validate();
  for (const auto& [name, step] : config_.grid_steps) schema().index_of(name);
  fingerprint_ = model_fingerprint(model());
}

Engine Engine::load(const EngineConfig& config) {
  if (config.model_path.empty()) throw_invalid("no model file given");
  ModelBundle bundle = model_from_json(read_json_file(config.model_path));
  if (!config.dataset_path.empty()) {
    bundle.weights = mad_weights(*bundle.schema,
                                 read_dataset_csv(*bundle.schema, config.dataset_path));
  }
  ActionCatalog catalog;
  if (!config.catalog_path.empty()) {
    catalog = catalog_from_json(*bundle.schema, read_json_file(config.catalog_path));
  }
  TemplateSet templates;
  if (!config.templates_path.empty()) {
    templates = templates_from_json(read_json_file(config.templates_path));
  }
  return Engine(std::move(bundle), std::move(catalog), std::move(templates), config);
}

Label Engine::target_label(const FeatureVector& x,
                           std::optional<Label> desired) const {
  const Label wanted = desired.value_or(Label::kPositive);
  return classify(model(), x) == wanted ? flip(wanted) : wanted;
}

SearchGrid Engine::counterfactual_grid(
    const std::vector<std::size_t>& focus,
    const std::map<std::string, double>& steps) const {
  std::vector<std::size_t> features = focus;
  if (features.empty()) {
    for (std::size_t i = 0; i < schema().size(); ++i) {
      if (schema()[i].mutability != Mutability::kImmutable) features.push_back(i);
    }
  }
  for (const auto& [name, step] : steps) schema().index_of(name);
  SearchGrid grid;
  grid.values.resize(schema().size());
  for (std::size_t f : features) {
    if (f >= schema().size()) throw_invalid("grid feature out of range");
    const FeatureSpec& spec = schema()[f];
    double step = 0.0;
    if (auto it = steps.find(spec.name); it != steps.end()) {
      step = it->second;
    } else if (auto c = config_.grid_steps.find(spec.name); c != config_.grid_steps.end()) {
      step = c->second;
    }
    grid.values[f] = step > 0.0 && spec.kind == FeatureKind::kContinuous
                         ? schema().grid_values(f, step)
                         : schema().grid_values(f);
  }
  return grid;
}

std::vector<Counterfactual> Engine::counterfactuals(
    const FeatureVector& x, std::optional<Label> desired, std::size_t k,
    const std::vector<std::size_t>& focus,
    const std::map<std::string, double>& steps) const {
  schema().validate(x);
  if (k == 0) throw_invalid("k must be at least 1");
  const Label wanted = desired.value_or(Label::kPositive);
  return diverse_counterfactuals(model(), x, wanted,
                                 counterfactual_grid(focus, steps), weights(), k);
}

ActionGrid Engine::default_action_grid(const FeatureVector& x) const {
  ActionGrid grid;
  for (std::size_t i = 0; i < schema().size(); ++i) {
    const FeatureSpec& spec = schema()[i];
    if (spec.kind == FeatureKind::kCategorical ||
        spec.mutability == Mutability::kImmutable || weights().excluded[i] ||
        !schema().is_mutable_for(i, x)) {
      continue;
    }
    ActionGridEntry entry;
    entry.feature = i;
    entry.unit_cost = weights().weight[i];
    std::vector<double> values = spec.kind == FeatureKind::kContinuous &&
                                         config_.grid_steps.count(spec.name)
                                     ? schema().grid_values(i, config_.grid_steps.at(spec.name))
                                     : schema().grid_values(i);
    for (double v : values) {
      const double delta = v - x[i];
      if (delta == 0.0) continue;
      if (spec.direction == Direction::kIncreaseOnly && delta < 0.0) continue;
      if (spec.direction == Direction::kDecreaseOnly && delta > 0.0) continue;
      entry.deltas.push_back(delta);
    }
    if (!entry.deltas.empty()) grid.push_back(std::move(entry));
  }
  return grid;
}

std::optional<FlipSet> Engine::flipset(const FeatureVector& x,
                                       std::optional<Label> desired,
                                       double budget,
                                       const std::optional<ActionGrid>& grid) const {
  schema().validate(x);
  const ActionGrid actions = grid ? *grid : default_action_grid(x);
  return min_cost_flipset(model(), x, desired.value_or(Label::kPositive),
                          actions, budget);
}

PlanResult Engine::plan(const PlanRequest& request) const {
  schema().validate(request.x);
  PlanResult result;
  result.target = target_label(request.x, request.desired);
  MdpBuildOptions options;
  options.discount = config_.discount;
  options.state_cap = config_.state_cap;
  options.focus = request.focus;
  auto mdp = std::make_shared<RecourseMdp>(build_recourse_mdp(
      schema(), catalog_, model(), request.x, result.target, options));
  if (request.solver == Solver::kValueIteration) {
    result.policy = value_iteration(*mdp, config_.epsilon);
  } else {
    QLearningConfig q;
    q.seed = request.seed.value_or(config_.seed);
    result.policy = q_learning(*mdp, q);
  }
  result.reachability = reachability(*mdp, result.policy);
  try {
    result.cost = policy_cost(*mdp, result.policy);
  } catch (const RecourseError&) {
    result.cost = {std::nan(""), false};
  }
  for (const TrajectoryStep& step : extract_plan(*mdp, result.policy)) {
    result.steps.push_back({mdp->action_name(step.action),
                            mdp->class_tags[step.action],
                            mdp->action_cost(step.action),
                            mdp->state_key(step.state),
                            mdp->state_key(step.next)});
  }
  result.mdp = std::move(mdp);
  return result;
}

ExplainResult Engine::explain(const ExplainRequest& request) const {
  schema().validate(request.x);
  const Label wanted = request.desired.value_or(Label::kPositive);
  const Label target = target_label(request.x, wanted);
  const auto c = nearest_counterfactual(
      model(), request.x, target,
      counterfactual_grid(request.focus, config_.grid_steps), weights());
  if (!c) throw_infeasible("no grid point reaches the " +
                           std::string(decision_word(target)) + " decision");

  const bool directive = request.kind != ExplanationKind::kNonDirective;
  std::optional<PlanResult> planned;
  Provenance provenance{"schema grid", config_.catalog_path.filename().string(),
                        "value-iteration"};
  if (directive) {
    try {
      PlanRequest pr;
      pr.x = request.x;
      pr.desired = wanted;
      pr.focus = request.focus;
      planned = plan(pr);
    } catch (const RecourseError& e) {
      if (e.code() != ErrorCode::kInfeasible) throw;
    }
  }
  ExplainResult result;
  result.tuple = planned ? assemble(model(), request.x, *c, wanted, planned->mdp.get(),
                                    &planned->policy, provenance)
                         : assemble(model(), request.x, *c, wanted, nullptr,
                                    nullptr, provenance);
  if (directive && !planned) result.tuple.unreachable = true;
  const bool reachable = planned && !result.tuple.unreachable &&
                         !result.tuple.plan.empty();

  if (request.kind) {
    result.texts.push_back(render(result.tuple, schema(), *request.kind,
                                  templates_, request.scenario));
  } else {
    ExplanationText nd = render(result.tuple, schema(), ExplanationKind::kNonDirective,
                                templates_, request.scenario);
    if (reachable) {
      ExplanationText ds = render(result.tuple, schema(),
                                  ExplanationKind::kDirectiveSpecific, templates_,
                                  request.scenario);
      ExplanationText dg = render(result.tuple, schema(),
                                  ExplanationKind::kDirectiveGeneric, templates_,
                                  request.scenario);
      const std::vector<std::size_t> lengths{ds.word_count(), dg.word_count()};
      result.texts.push_back(balance_filler(std::move(nd), lengths));
      result.texts.push_back(std::move(ds));
      result.texts.push_back(std::move(dg));
    } else {
      result.texts.push_back(std::move(nd));
      result.directive_unavailable = true;
    }
  }
  result.introduction = result.texts.front().introduction();
  return result;
}

}  // namespace recourse
