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

#include "recourse/service.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <random>

#include "httplib.h"
#include "recourse/error.h"

namespace recourse {
namespace {

int status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return 400;
    case ErrorCode::kInfeasible:
      return 422;
    case ErrorCode::kCapExceeded:
      return 413;
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid_input";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kCapExceeded:
      return "cap_exceeded";
    case ErrorCode::kInternal:
      return "internal";
  }
  return "internal";
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code,
                 const std::string& message) {
  reply(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

// Runs a handler and maps exceptions onto error responses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const RecourseError& e) {
      reply_error(res, status_of(e.code()), code_name(e.code()), e.what());
    } catch (const Json::exception& e) {
      reply_error(res, 400, "invalid_input", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  };
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    Json body = Json::parse(req.body);
    if (!body.is_object()) throw_invalid("request body must be a JSON object");
    return body;
  } catch (const Json::parse_error& e) {
    throw_invalid(std::string("malformed JSON: ") + e.what());
  }
}

std::optional<Label> desired_of(const Json& body) {
  auto it = body.find("desired");
  if (it == body.end() || it->is_null()) return std::nullopt;
  return label_from_json(*it);
}

std::vector<std::size_t> focus_of(const Engine& engine, const Json& body) {
  auto it = body.find("focus");
  if (it == body.end() || it->is_null()) return {};
  return features_from_json(engine.schema(), *it);
}

FeatureVector profile_of(const Engine& engine, const SessionStore& sessions,
                         const Json& body) {
  if (auto it = body.find("session_id"); it != body.end()) {
    const auto snapshot = sessions.get(it->get<std::string>());
    if (!snapshot) throw_invalid("unknown session '" + it->get<std::string>() + "'");
    return snapshot->profile;
  }
  auto it = body.find("profile");
  if (it == body.end()) throw_invalid("request needs a profile or a session_id");
  return profile_from_json(engine.schema(), *it);
}

Json snapshot_to_json(const FeatureSchema& schema, const SessionSnapshot& s) {
  Json history = Json::array();
  for (const SessionEvent& e : s.history) {
    history.push_back({{"timestamp", e.timestamp},
                       {"kind", e.kind},
                       {"request", e.request},
                       {"digest", e.digest}});
  }
  return {{"id", s.id},
          {"model", s.model},
          {"profile", profile_to_json(schema, s.profile)},
          {"history", std::move(history)}};
}

Json number_or_null(double value) {
  return std::isfinite(value) ? Json(value) : Json(nullptr);
}

std::string random_id() {
  std::random_device device;
  std::uniform_int_distribution<unsigned long long> dist;
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", dist(device));
  return buffer;
}

}  // namespace

std::string now_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) %
                  1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buffer, static_cast<int>(ms.count()));
  return out;
}

std::string digest_of(const Json& value) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : value.dump()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

SessionStore::SessionStore(std::shared_ptr<const FeatureSchema> schema,
                           std::string model, std::filesystem::path log)
    : schema_(std::move(schema)), model_(std::move(model)), log_path_(std::move(log)) {
  if (log_path_.empty()) return;
  if (std::filesystem::exists(log_path_)) replay();
  log_.open(log_path_, std::ios::app);
  if (!log_) throw_invalid("cannot open session log " + log_path_.string());
}

void SessionStore::replay() {
  std::ifstream in(log_path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      // A torn final write leaves a partial line; everything before it holds.
      continue;
    }
    const std::string id = j.at("id").get<std::string>();
    const std::string op = j.at("op").get<std::string>();
    if (op == "create") {
      auto entry = std::make_shared<Entry>();
      entry->state.id = id;
      entry->state.model = j.value("model", "");
      entry->state.profile = profile_from_json(*schema_, j.at("profile"));
      sessions_[id] = std::move(entry);
    } else if (op == "commit") {
      auto it = sessions_.find(id);
      if (it == sessions_.end()) {
        throw_invalid(log_path_.string() + ":" + std::to_string(line_no) +
                      ": commit for unknown session");
      }
      it->second->state.profile = profile_from_json(*schema_, j.at("profile"));
      const Json& e = j.at("event");
      it->second->state.history.push_back(
          {e.at("timestamp"), e.at("kind"), e.at("request"), e.at("digest")});
    }
  }
}

void SessionStore::append(const Json& line) {
  if (log_path_.empty()) return;
  std::lock_guard lock(log_mutex_);
  log_ << line.dump() << '\n';
  log_.flush();
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(map_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

SessionSnapshot SessionStore::create(const FeatureVector& profile) {
  schema_->validate(profile);
  auto entry = std::make_shared<Entry>();
  entry->state.model = model_;
  entry->state.profile = profile;
  {
    std::lock_guard lock(map_mutex_);
    do {
      entry->state.id = random_id();
    } while (sessions_.count(entry->state.id) > 0);
    sessions_[entry->state.id] = entry;
  }
  append({{"op", "create"},
          {"id", entry->state.id},
          {"timestamp", now_timestamp()},
          {"model", model_},
          {"profile", profile_to_json(*schema_, profile)}});
  return entry->state;
}

std::optional<SessionSnapshot> SessionStore::get(const std::string& id) const {
  auto entry = find(id);
  if (!entry) return std::nullopt;
  std::lock_guard lock(entry->mutex);
  return entry->state;
}

SessionSnapshot SessionStore::commit(const std::string& id,
                                     const FeatureVector& profile,
                                     SessionEvent event) {
  schema_->validate(profile);
  auto entry = find(id);
  if (!entry) throw_invalid("unknown session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  append({{"op", "commit"},
          {"id", id},
          {"profile", profile_to_json(*schema_, profile)},
          {"event",
           {{"timestamp", event.timestamp},
            {"kind", event.kind},
            {"request", event.request},
            {"digest", event.digest}}}});
  entry->state.profile = profile;
  entry->state.history.push_back(std::move(event));
  return entry->state;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(map_mutex_);
  return sessions_.size();
}

void register_routes(httplib::Server& server, const Engine& engine,
                     SessionStore& sessions) {
  const FeatureSchema& schema = engine.schema();

  server.Post("/predict", guarded([&](const httplib::Request& req,
                                      httplib::Response& res) {
    const FeatureVector x = profile_of(engine, sessions, parse_body(req));
    const Label label = classify(engine.model(), x);
    reply(res, 200,
          {{"label", to_int(label)},
           {"decision", decision_word(label)},
           {"probability", predict_proba(engine.model(), x)},
           {"logit", engine.model().logit(x)}});
  }));

  server.Post("/whatif", guarded([&](const httplib::Request& req,
                                     httplib::Response& res) {
    const Json body = parse_body(req);
    const FeatureVector base = profile_of(engine, sessions, body);
    const Json changes = body.value("changes", Json::object());
    const FeatureVector x = apply_changes(schema, base, changes);
    const Label label = classify(engine.model(), x);
    Json out = {{"label", to_int(label)},
                {"decision", decision_word(label)},
                {"probability", predict_proba(engine.model(), x)},
                {"profile", profile_to_json(schema, x)},
                {"committed", false}};
    const bool commit = body.value("commit", false);
    if (auto it = body.find("session_id"); it != body.end()) {
      const std::string id = it->get<std::string>();
      if (commit) {
        const auto snapshot = sessions.commit(
            id, x, {now_timestamp(), "whatif", changes, digest_of(out)});
        out["committed"] = true;
        out["history_length"] = snapshot.history.size();
      } else {
        out["history_length"] = sessions.get(id)->history.size();
      }
      out["session_id"] = id;
    } else if (commit) {
      throw_invalid("commit needs a session_id");
    }
    reply(res, 200, out);
  }));

  server.Get("/pdp/:feature", guarded([&](const httplib::Request& req,
                                          httplib::Response& res) {
    const std::string name = req.path_params.at("feature");
    const auto feature = schema.find(name);
    if (!feature) {
      reply_error(res, 404, "not_found", "unknown feature '" + name + "'");
      return;
    }
    Json body = Json::object();
    if (req.has_param("session_id")) body["session_id"] = req.get_param_value("session_id");
    if (req.has_param("profile")) body["profile"] = Json::parse(req.get_param_value("profile"));
    const FeatureVector x = profile_of(engine, sessions, body);
    std::size_t points = 101;
    if (req.has_param("points")) {
      const long long n = std::stoll(req.get_param_value("points"));
      if (n < 2 || n > 100000) throw_invalid("points must lie in [2, 100000]");
      points = static_cast<std::size_t>(n);
    }
    const auto curve = pdp_curve(engine.model(), x, *feature, points);
    const auto threshold = pdp_threshold(engine.model(), x, *feature);
    Json list = Json::array();
    for (const PdpPoint& p : curve) {
      list.push_back({{"value", p.value},
                      {"probability", p.probability},
                      {"label", p.probability >= engine.model().threshold() ? 1 : 0}});
    }
    reply(res, 200,
          {{"feature", name},
           {"current", x[*feature]},
           {"threshold", threshold ? Json(*threshold) : Json(nullptr)},
           {"decision_threshold", engine.model().threshold()},
           {"points", std::move(list)}});
  }));

  server.Post("/counterfactuals", guarded([&](const httplib::Request& req,
                                              httplib::Response& res) {
    const Json body = parse_body(req);
    const FeatureVector x = profile_of(engine, sessions, body);
    std::map<std::string, double> steps;
    if (auto it = body.find("grid"); it != body.end()) {
      for (const auto& [key, step] : it->items()) steps[key] = step.get<double>();
    }
    const long long k = body.value("k", 1LL);
    if (k < 1 || k > 100) throw_invalid("k must lie in [1, 100]");
    const auto desired = desired_of(body);
    const auto found = engine.counterfactuals(x, desired, static_cast<std::size_t>(k),
                                              focus_of(engine, body), steps);
    Json list = Json::array();
    for (const Counterfactual& c : found) list.push_back(counterfactual_to_json(schema, c));
    reply(res, 200,
          {{"desired", to_int(desired.value_or(Label::kPositive))},
           {"counterfactuals", std::move(list)}});
  }));

  server.Post("/flipset", guarded([&](const httplib::Request& req,
                                      httplib::Response& res) {
    const Json body = parse_body(req);
    const FeatureVector x = profile_of(engine, sessions, body);
    double budget = std::numeric_limits<double>::infinity();
    if (auto it = body.find("budget"); it != body.end() && !it->is_null()) {
      budget = it->get<double>();
    }
    std::optional<ActionGrid> grid;
    if (auto it = body.find("grid"); it != body.end()) {
      grid = action_grid_from_json(schema, *it);
    }
    const auto found = engine.flipset(x, desired_of(body), budget, grid);
    reply(res, 200,
          {{"found", found.has_value()},
           {"flipset", found ? flipset_to_json(schema, x, *found) : Json(nullptr)}});
  }));

  server.Post("/plan", guarded([&](const httplib::Request& req,
                                   httplib::Response& res) {
    const Json body = parse_body(req);
    PlanRequest request;
    request.x = profile_of(engine, sessions, body);
    request.desired = desired_of(body);
    request.solver = parse_solver(body.value("solver", "vi"));
    if (auto it = body.find("seed"); it != body.end()) {
      request.seed = it->get<std::uint64_t>();
    }
    request.focus = focus_of(engine, body);
    const PlanResult result = engine.plan(request);
    Json steps = Json::array();
    for (const PlanStep& step : result.steps) steps.push_back(plan_step_to_json(step));
    reply(res, 200,
          {{"solver", request.solver == Solver::kValueIteration ? "vi" : "q"},
           {"target", to_int(result.target)},
           {"states", result.mdp->num_states()},
           {"initial_is_goal", result.mdp->is_goal(result.mdp->initial())},
           {"reachability", result.reachability},
           {"bounded", result.cost.bounded},
           {"expected_cost",
            result.cost.bounded ? number_or_null(result.cost.expected) : Json(nullptr)},
           {"iterations", result.policy.residuals.size()},
           {"steps", std::move(steps)}});
  }));

  server.Post("/explain", guarded([&](const httplib::Request& req,
                                      httplib::Response& res) {
    const Json body = parse_body(req);
    ExplainRequest request;
    request.x = profile_of(engine, sessions, body);
    request.desired = desired_of(body);
    const std::string kind = body.value("kind", "all");
    if (kind != "all") request.kind = parse_explanation_kind(kind);
    request.scenario = body.value("scenario", "");
    request.focus = focus_of(engine, body);
    const ExplainResult result = engine.explain(request);
    const DirectiveExplanation& de = result.tuple;
    Json texts = Json::array();
    for (const ExplanationText& t : result.texts) texts.push_back(explanation_to_json(t));
    Json plan = Json::array();
    for (const PlanStep& step : de.plan) plan.push_back(plan_step_to_json(step));
    reply(res, 200,
          {{"y", to_int(de.y)},
           {"y_prime", to_int(de.y_prime)},
           {"boundary", de.boundary},
           {"unreachable", de.unreachable},
           {"reachability", de.reachability ? Json(*de.reachability) : Json(nullptr)},
           {"counterfactual", counterfactual_to_json(schema, de.c)},
           {"introduction", result.introduction},
           {"explanations", std::move(texts)},
           {"plan", std::move(plan)}});
  }));

  server.Post("/sessions", guarded([&](const httplib::Request& req,
                                       httplib::Response& res) {
    const Json body = parse_body(req);
    const FeatureVector x = profile_from_json(schema, body.at("profile"));
    reply(res, 201, snapshot_to_json(schema, sessions.create(x)));
  }));

  server.Get("/sessions/:id", guarded([&](const httplib::Request& req,
                                          httplib::Response& res) {
    const auto snapshot = sessions.get(req.path_params.at("id"));
    if (!snapshot) {
      reply_error(res, 404, "not_found", "unknown session");
      return;
    }
    reply(res, 200, snapshot_to_json(schema, *snapshot));
  }));

  server.Get("/schema", guarded([&](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, schema_to_json(schema));
  }));
}

void serve(const Engine& engine, SessionStore& sessions) {
  httplib::Server server;
  register_routes(server, engine, sessions);
  const std::string& bind = engine.config().bind;
  const auto colon = bind.rfind(':');
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  if (!server.listen(host, port)) {
    throw_invalid("cannot bind " + bind);
  }
}

}  // namespace recourse
