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

// Command-line front end: training, single queries, explanations and the
// HTTP service.

#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "recourse/engine.h"
#include "recourse/error.h"
#include "recourse/io.h"
#include "recourse/service.h"

namespace {

using recourse::Json;

struct Options {
  std::string config;
  std::string model;
  std::string catalog;
  std::string templates;
  std::string dataset;
  std::string profile;
  std::string desired;
  std::string kind = "all";
  std::string scenario;
  std::string solver = "vi";
  std::string format = "text";
  std::string feature;
  std::string schema;
  std::string out;
  std::string grid;
  std::string bind;
  std::string session_log;
  std::vector<std::string> grid_steps;
  std::vector<std::string> focus;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> state_cap;
  std::size_t k = 1;
  std::size_t points = 101;
  double budget = std::numeric_limits<double>::infinity();
  int epochs = 2000;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

recourse::EngineConfig make_config(const Options& o) {
  recourse::EngineConfig config;
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv("RECOURSE_CONFIG")) path = env;
  }
  if (!path.empty()) config = recourse::load_config(path);
  if (!o.model.empty()) config.model_path = o.model;
  if (!o.catalog.empty()) config.catalog_path = o.catalog;
  if (!o.templates.empty()) config.templates_path = o.templates;
  if (!o.dataset.empty()) config.dataset_path = o.dataset;
  if (!o.session_log.empty()) config.session_log = o.session_log;
  if (!o.bind.empty()) config.bind = o.bind;
  if (o.seed) config.seed = *o.seed;
  if (o.state_cap) config.state_cap = *o.state_cap;
  for (const std::string& entry : o.grid_steps) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      recourse::throw_invalid("--grid-step expects feature=step, got '" + entry + "'");
    }
    try {
      config.grid_steps[entry.substr(0, eq)] = std::stod(entry.substr(eq + 1));
    } catch (const std::exception&) {
      recourse::throw_invalid("--grid-step: bad step in '" + entry + "'");
    }
  }
  config.validate();
  return config;
}

struct Query {
  recourse::ProfileFile file;
  std::optional<recourse::Label> desired;
  std::vector<std::size_t> focus;
};

Query load_query(const recourse::Engine& engine, const Options& o) {
  if (o.profile.empty()) recourse::throw_invalid("--profile is required");
  const Json j = recourse::read_json_file(o.profile);
  Query q;
  q.file = j.contains("profile")
               ? recourse::profile_file_from_json(engine.schema(), j)
               : recourse::ProfileFile{recourse::profile_from_json(engine.schema(), j),
                                       "", std::nullopt, {}};
  q.desired = q.file.desired;
  if (!o.desired.empty()) q.desired = recourse::label_from_json(Json(o.desired));
  q.focus = o.focus.empty() ? q.file.focus
                            : recourse::features_from_json(engine.schema(), Json(o.focus));
  return q;
}

void emit(const Options& o, const Json& json, const std::vector<std::string>& lines) {
  if (o.format == "json") {
    std::cout << json.dump(2) << '\n';
  } else {
    for (const std::string& line : lines) std::cout << line << '\n';
  }
}

int run_train(const Options& o) {
  if (o.schema.empty() || o.dataset.empty() || o.out.empty()) {
    recourse::throw_invalid("train needs --schema, --dataset and --out");
  }
  auto schema = std::make_shared<const recourse::FeatureSchema>(
      recourse::schema_from_json(recourse::read_json_file(o.schema)));
  const recourse::Dataset data = recourse::read_dataset_csv(*schema, o.dataset);
  recourse::TrainConfig config;
  config.epochs = o.epochs;
  config.learning_rate = o.learning_rate;
  config.l2 = o.l2;
  config.seed = o.seed.value_or(0);
  const recourse::LinearModel model = recourse::train_logistic(schema, data, config);
  const recourse::MadWeights weights = recourse::mad_weights(*schema, data);
  recourse::write_json_file(o.out, recourse::model_to_json(model, weights));
  const double acc = recourse::accuracy(model, data);
  emit(o, {{"model", o.out}, {"rows", data.size()}, {"accuracy", acc}},
       {"wrote " + o.out, "rows " + std::to_string(data.size()),
        "accuracy " + std::to_string(acc)});
  return 0;
}

int run_predict(const recourse::Engine& engine, const Options& o) {
  const Query q = load_query(engine, o);
  const auto label = recourse::classify(engine.model(), q.file.x);
  const double p = recourse::predict_proba(engine.model(), q.file.x);
  emit(o, {{"label", recourse::to_int(label)},
           {"decision", recourse::decision_word(label)},
           {"probability", p}},
       {std::string(recourse::decision_word(label)) + " " + std::to_string(p)});
  return 0;
}

int run_pdp(const recourse::Engine& engine, const Options& o) {
  const Query q = load_query(engine, o);
  const std::size_t f = engine.schema().index_of(o.feature);
  const auto threshold = recourse::pdp_threshold(engine.model(), q.file.x, f);
  const auto curve = recourse::pdp_curve(engine.model(), q.file.x, f, o.points);
  Json points = Json::array();
  std::vector<std::string> lines{
      "threshold " + (threshold ? std::to_string(*threshold) : std::string("none"))};
  for (const auto& p : curve) {
    points.push_back({{"value", p.value}, {"probability", p.probability}});
    lines.push_back(std::to_string(p.value) + " " + std::to_string(p.probability));
  }
  emit(o, {{"feature", o.feature},
           {"threshold", threshold ? Json(*threshold) : Json(nullptr)},
           {"points", points}},
       lines);
  return 0;
}

int run_counterfactuals(const recourse::Engine& engine, const Options& o) {
  const Query q = load_query(engine, o);
  const auto found = engine.counterfactuals(q.file.x, q.desired, o.k, q.focus, {});
  if (found.empty()) recourse::throw_infeasible("no counterfactual on the search grid");
  Json list = Json::array();
  std::vector<std::string> lines;
  for (const auto& c : found) {
    list.push_back(recourse::counterfactual_to_json(engine.schema(), c));
    std::string line = "distance " + std::to_string(c.distance) + ":";
    for (std::size_t f : c.changed) {
      line += " " + engine.schema()[f].name + "=" +
              engine.schema().format_value(f, c.target[f]);
    }
    lines.push_back(line);
  }
  emit(o, {{"counterfactuals", list}}, lines);
  return 0;
}

int run_flipset(const recourse::Engine& engine, const Options& o) {
  const Query q = load_query(engine, o);
  std::optional<recourse::ActionGrid> grid;
  if (!o.grid.empty()) {
    grid = recourse::action_grid_from_json(engine.schema(), recourse::read_json_file(o.grid));
  }
  const auto found = engine.flipset(q.file.x, q.desired, o.budget, grid);
  if (!found) recourse::throw_infeasible("no flipset within the budget");
  std::vector<std::string> lines{"cost " + std::to_string(found->total_cost)};
  for (const auto& [f, delta] : found->deltas) {
    lines.push_back(engine.schema()[f].name + " " + std::to_string(delta));
  }
  emit(o, recourse::flipset_to_json(engine.schema(), q.file.x, *found), lines);
  return 0;
}

int run_plan(const recourse::Engine& engine, const Options& o) {
  const Query q = load_query(engine, o);
  recourse::PlanRequest request;
  request.x = q.file.x;
  request.desired = q.desired;
  request.solver = recourse::parse_solver(o.solver);
  request.seed = o.seed;
  request.focus = q.focus;
  const recourse::PlanResult result = engine.plan(request);
  Json steps = Json::array();
  std::vector<std::string> lines{
      "states " + std::to_string(result.mdp->num_states()),
      "reachability " + std::to_string(result.reachability)};
  for (const auto& step : result.steps) {
    steps.push_back(recourse::plan_step_to_json(step));
    lines.push_back(step.from + " -> " + step.action + " -> " + step.to);
  }
  emit(o, {{"states", result.mdp->num_states()},
           {"reachability", result.reachability},
           {"bounded", result.cost.bounded},
           {"expected_cost", result.cost.bounded ? Json(result.cost.expected) : Json(nullptr)},
           {"steps", steps}},
       lines);
  return result.reachability > 0.0 ? 0 : static_cast<int>(recourse::ErrorCode::kInfeasible);
}

int run_explain(const recourse::Engine& engine, const Options& o) {
  const Query q = load_query(engine, o);
  recourse::ExplainRequest request;
  request.x = q.file.x;
  request.desired = q.desired;
  if (o.kind != "all") request.kind = recourse::parse_explanation_kind(o.kind);
  request.scenario = o.scenario.empty() ? q.file.scenario : o.scenario;
  request.focus = q.focus;
  const recourse::ExplainResult result = engine.explain(request);
  Json texts = Json::array();
  std::vector<std::string> lines;
  for (const auto& t : result.texts) {
    texts.push_back(recourse::explanation_to_json(t));
    lines.push_back(t.text());
  }
  emit(o, {{"introduction", result.introduction},
           {"boundary", result.tuple.boundary},
           {"unreachable", result.tuple.unreachable},
           {"explanations", texts}},
       lines);
  if (result.directive_unavailable) {
    std::cerr << "error: no plan of actions reaches the goal; only the "
                 "non-directive explanation is available\n";
    return static_cast<int>(recourse::ErrorCode::kInfeasible);
  }
  return 0;
}

int run_serve(const recourse::Engine& engine) {
  recourse::SessionStore sessions(engine.schema_ptr(), engine.fingerprint(),
                                  engine.config().session_log);
  std::cerr << "serving on " << engine.config().bind << '\n';
  recourse::serve(engine, sessions);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual recourse: predictions, counterfactuals, plans "
               "and explanations"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Engine config JSON (or $RECOURSE_CONFIG)");
  app.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  auto engine_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", o.model, "Model JSON");
    cmd->add_option("--catalog", o.catalog, "Action catalog JSON");
    cmd->add_option("--templates", o.templates, "Explanation templates JSON");
    cmd->add_option("--dataset", o.dataset, "CSV used for MAD weights");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--grid-step", o.grid_steps, "Continuous grid step, feature=step");
    cmd->add_option("--state-cap", o.state_cap, "Maximum MDP states");
  };
  auto query_flags = [&](CLI::App* cmd) {
    engine_flags(cmd);
    cmd->add_option("--profile", o.profile, "Profile JSON")->required();
    cmd->add_option("--desired", o.desired, "approve or deny");
    cmd->add_option("--focus", o.focus, "Restrict changes to these features");
  };

  auto* train = app.add_subcommand("train", "Fit a logistic model to a CSV dataset");
  train->add_option("--schema", o.schema, "Schema JSON")->required();
  train->add_option("--dataset", o.dataset, "CSV with a label column")->required();
  train->add_option("--out", o.out, "Model JSON to write")->required();
  train->add_option("--seed", o.seed, "Random seed");
  train->add_option("--epochs", o.epochs, "Gradient steps");
  train->add_option("--learning-rate", o.learning_rate, "Step size");
  train->add_option("--l2", o.l2, "L2 penalty");

  auto* predict = app.add_subcommand("predict", "Classify a profile");
  query_flags(predict);
  auto* pdp = app.add_subcommand("pdp", "Partial dependence curve and boundary");
  query_flags(pdp);
  pdp->add_option("--feature", o.feature)->required();
  pdp->add_option("--points", o.points);
  auto* cfs = app.add_subcommand("counterfactuals", "Nearest diverse counterfactuals");
  query_flags(cfs);
  cfs->add_option("--k", o.k, "Number of counterfactuals");
  auto* flip = app.add_subcommand("flipset", "Minimum-cost flipset");
  query_flags(flip);
  flip->add_option("--budget", o.budget);
  flip->add_option("--grid", o.grid, "Action grid JSON");
  auto* plan = app.add_subcommand("plan", "Plan actions towards the desired label");
  query_flags(plan);
  plan->add_option("--solver", o.solver)->check(CLI::IsMember({"vi", "q"}));
  auto* explain = app.add_subcommand("explain", "Render explanations");
  query_flags(explain);
  explain->add_option("--kind", o.kind)
      ->check(CLI::IsMember({"all", "non-directive", "directive-specific",
                             "directive-generic"}));
  explain->add_option("--scenario", o.scenario, "Scenario template id");
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  engine_flags(serve);
  serve->add_option("--bind", o.bind, "host:port");
  serve->add_option("--session-log", o.session_log, "NDJSON session log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(recourse::ErrorCode::kInvalidInput);
  }

  try {
    if (train->parsed()) return run_train(o);
    const recourse::Engine engine = recourse::Engine::load(make_config(o));
    if (predict->parsed()) return run_predict(engine, o);
    if (pdp->parsed()) return run_pdp(engine, o);
    if (cfs->parsed()) return run_counterfactuals(engine, o);
    if (flip->parsed()) return run_flipset(engine, o);
    if (plan->parsed()) return run_plan(engine, o);
    if (explain->parsed()) return run_explain(engine, o);
    return run_serve(engine);
  } catch (const recourse::RecourseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(recourse::ErrorCode::kInvalidInput);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return static_cast<int>(recourse::ErrorCode::kInternal);
  }
}
