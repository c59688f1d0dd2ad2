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

#include "recourse/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "recourse/error.h"

namespace recourse {
namespace {

const Json& require(const Json& j, const char* key, std::string_view where) {
  if (!j.is_object()) throw_invalid(std::string(where) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw_invalid(std::string(where) + ": missing field '" + key + "'");
  }
  return *it;
}

double number(const Json& j, std::string_view where) {
  if (!j.is_number()) throw_invalid(std::string(where) + ": expected a number");
  return j.get<double>();
}

std::string text(const Json& j, std::string_view where) {
  if (!j.is_string()) throw_invalid(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

double number_or(const Json& j, const char* key, double fallback,
                 std::string_view where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, std::string(where) + "." + key);
}

std::string text_or(const Json& j, const char* key, std::string fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : text(*it, key);
}

std::vector<std::string> strings(const Json& j, std::string_view where) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) throw_invalid(std::string(where) + ": expected strings");
  std::vector<std::string> out;
  for (const Json& item : j) out.push_back(text(item, where));
  return out;
}

std::vector<Clause> clauses_from_json(const FeatureSchema& schema,
                                      const Json& j, std::string_view where) {
  std::vector<Clause> clauses;
  if (j.is_null()) return clauses;
  if (!j.is_array()) throw_invalid(std::string(where) + ": expected a list of clauses");
  for (const Json& item : j) {
    Clause clause;
    clause.feature = schema.index_of(text(require(item, "feature", where), where));
    clause.op = parse_comparison(text(require(item, "op", where), where));
    clause.value = number(require(item, "value", where), where);
    clauses.push_back(clause);
  }
  return clauses;
}

Json clauses_to_json(const FeatureSchema& schema,
                     const std::vector<Clause>& clauses) {
  Json out = Json::array();
  for (const Clause& clause : clauses) {
    out.push_back({{"feature", schema[clause.feature].name},
                   {"op", to_string(clause.op)},
                   {"value", clause.value}});
  }
  return out;
}

double feature_value(const FeatureSchema& schema, std::size_t i,
                     const Json& j) {
  const FeatureSpec& spec = schema[i];
  if (j.is_string()) {
    const std::string label = j.get<std::string>();
    for (std::size_t k = 0; k < spec.labels.size(); ++k) {
      if (spec.labels[k] != label) continue;
      return spec.kind == FeatureKind::kCategorical ? static_cast<double>(k)
                                                    : spec.levels[k];
    }
    throw_invalid("feature '" + spec.name + "': unknown label '" + label + "'");
  }
  return number(j, "feature '" + spec.name + "'");
}

ScenarioTemplate scenario_template_from_json(const Json& j,
                                             const std::string& where) {
  ScenarioTemplate tpl;
  tpl.greeting = text_or(j, "greeting", "");
  tpl.global = text_or(j, "global", "");
  tpl.decision = text_or(j, "decision", "");
  const Json& nd = require(j, "non_directive", where);
  tpl.non_directive.counterfactual =
      text(require(nd, "counterfactual", where), where + ".non_directive");
  tpl.non_directive.tail = strings(require(nd, "filler", where), where);
  if (auto it = nd.find("elaborations"); it != nd.end()) {
    tpl.elaborations = strings(*it, where);
  }
  auto kind = [&](const char* key) {
    const Json& body = require(j, key, where);
    KindTemplate out;
    out.counterfactual = text(require(body, "counterfactual", where), where);
    out.tail = strings(require(body, "action", where), where);
    return out;
  };
  tpl.directive_specific = kind("directive_specific");
  tpl.directive_generic = kind("directive_generic");
  return tpl;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (ch == '"') {
      if (quoted && k + 1 < line.size() && line[k + 1] == '"') {
        cell += '"';
        ++k;
      } else {
        quoted = !quoted;
      }
    } else if (ch == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_invalid("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw_invalid(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw_invalid("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

FeatureSchema schema_from_json(const Json& j) {
  const Json& features = require(j, "features", "schema");
  if (!features.is_array()) throw_invalid("schema.features must be a list");
  std::vector<FeatureSpec> specs;
  for (const Json& item : features) {
    FeatureSpec spec;
    spec.name = text(require(item, "name", "schema feature"), "name");
    const std::string where = "feature '" + spec.name + "'";
    spec.kind = parse_feature_kind(text(require(item, "kind", where), where));
    spec.lo = number_or(item, "lo", 0.0, where);
    spec.hi = number_or(item, "hi", 0.0, where);
    spec.unit = text_or(item, "unit", "");
    spec.mutability = parse_mutability(text_or(item, "mutability", "actionable"));
    spec.direction = parse_direction(text_or(item, "direction", "free"));
    if (auto it = item.find("levels"); it != item.end()) {
      for (const Json& level : *it) spec.levels.push_back(number(level, where));
    }
    if (auto it = item.find("labels"); it != item.end()) {
      spec.labels = strings(*it, where);
    }
    if (spec.kind == FeatureKind::kOrdinal && !spec.levels.empty()) {
      const auto [lo, hi] = std::minmax_element(spec.levels.begin(), spec.levels.end());
      if (!item.contains("lo")) spec.lo = *lo;
      if (!item.contains("hi")) spec.hi = *hi;
    }
    spec.step = number_or(item, "step", 0.0, where);
    spec.precision = static_cast<int>(number_or(item, "precision", 0.0, where));
    spec.display_name = text_or(item, "display_name", "");
    specs.push_back(std::move(spec));
  }
  // Conditions name other features, so resolve them against a first pass.
  const FeatureSchema names(specs);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (auto it = features[i].find("condition"); it != features[i].end()) {
      specs[i].condition =
          clauses_from_json(names, *it, "feature '" + specs[i].name + "'");
    }
  }
  return FeatureSchema(std::move(specs));
}

Json schema_to_json(const FeatureSchema& schema) {
  Json features = Json::array();
  for (const FeatureSpec& spec : schema.features()) {
    Json item = {{"name", spec.name},
                 {"kind", to_string(spec.kind)},
                 {"lo", spec.lo},
                 {"hi", spec.hi}};
    if (!spec.unit.empty()) item["unit"] = spec.unit;
    item["mutability"] = to_string(spec.mutability);
    if (spec.direction != Direction::kFree) {
      item["direction"] = to_string(spec.direction);
    }
    if (!spec.levels.empty() && spec.kind == FeatureKind::kOrdinal) {
      item["levels"] = spec.levels;
    }
    if (!spec.labels.empty()) item["labels"] = spec.labels;
    if (spec.step > 0.0) item["step"] = spec.step;
    if (spec.precision != 0) item["precision"] = spec.precision;
    if (spec.display_name != spec.name) item["display_name"] = spec.display_name;
    if (!spec.condition.empty()) {
      item["condition"] = clauses_to_json(schema, spec.condition);
    }
    features.push_back(std::move(item));
  }
  return {{"features", std::move(features)}};
}

Label label_from_json(const Json& j) {
  if (j.is_number_integer()) return label_from_int(j.get<long long>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "approve" || s == "positive" || s == "1") return Label::kPositive;
    if (s == "deny" || s == "negative" || s == "0") return Label::kNegative;
  }
  throw_invalid("label must be approve, deny, 1 or 0");
}

std::string_view decision_word(Label label) {
  return label == Label::kPositive ? "approve" : "deny";
}

FeatureVector profile_from_json(const FeatureSchema& schema, const Json& j) {
  if (!j.is_object()) throw_invalid("profile must be an object keyed by feature");
  for (const auto& [key, value] : j.items()) {
    if (!schema.find(key)) throw_invalid("profile names unknown feature '" + key + "'");
  }
  std::vector<double> values(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    auto it = j.find(schema[i].name);
    if (it == j.end()) {
      throw_invalid("profile is missing feature '" + schema[i].name + "'");
    }
    values[i] = feature_value(schema, i, *it);
  }
  FeatureVector x(std::move(values));
  schema.validate(x);
  return x;
}

Json profile_to_json(const FeatureSchema& schema, const FeatureVector& x) {
  Json out = Json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == FeatureKind::kCategorical) {
      out[schema[i].name] = schema.format_value(i, x[i]);
    } else {
      out[schema[i].name] = x[i];
    }
  }
  return out;
}

FeatureVector apply_changes(const FeatureSchema& schema, const FeatureVector& x,
                            const Json& changes) {
  if (!changes.is_object()) throw_invalid("changes must be an object");
  FeatureVector out = x;
  for (const auto& [key, value] : changes.items()) {
    const auto i = schema.find(key);
    if (!i) throw_invalid("unknown feature '" + key + "'");
    out[*i] = feature_value(schema, *i, value);
  }
  schema.validate(out);
  return out;
}

ModelBundle model_from_json(const Json& j) {
  auto schema = std::make_shared<const FeatureSchema>(
      schema_from_json(require(j, "schema", "model")));
  const Json& coefficients = require(j, "coefficients", "model");
  std::vector<double> weights(schema->encoded_width(), 0.0);
  for (std::size_t i = 0; i < schema->size(); ++i) {
    const FeatureSpec& spec = (*schema)[i];
    const Json& w = require(coefficients, spec.name.c_str(), "model.coefficients");
    const std::size_t offset = schema->encoded_offset(i);
    if (spec.kind == FeatureKind::kCategorical) {
      for (std::size_t k = 0; k < spec.labels.size(); ++k) {
        weights[offset + k] = number(
            require(w, spec.labels[k].c_str(), "coefficients." + spec.name),
            spec.labels[k]);
      }
    } else {
      weights[offset] = number(w, "coefficients." + spec.name);
    }
  }
  ModelBundle bundle;
  bundle.schema = schema;
  bundle.model = std::make_shared<const LinearModel>(
      schema, std::move(weights), number(require(j, "bias", "model"), "bias"),
      number_or(j, "threshold", 0.5, "model"));
  if (auto it = j.find("mad"); it != j.end()) {
    std::vector<double> mad(schema->size(), 1.0);
    for (std::size_t i = 0; i < schema->size(); ++i) {
      if ((*schema)[i].kind == FeatureKind::kCategorical) continue;
      mad[i] = number(require(*it, (*schema)[i].name.c_str(), "model.mad"),
                      "mad." + (*schema)[i].name);
    }
    bundle.weights = MadWeights::from_mad(*schema, std::move(mad));
  } else {
    bundle.weights = MadWeights::uniform(*schema);
  }
  return bundle;
}

Json model_to_json(const LinearModel& model, const MadWeights& weights) {
  const FeatureSchema& schema = model.schema();
  Json coefficients = Json::object();
  Json mad = Json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const FeatureSpec& spec = schema[i];
    if (spec.kind == FeatureKind::kCategorical) {
      Json per = Json::object();
      for (std::size_t k = 0; k < spec.labels.size(); ++k) {
        per[spec.labels[k]] = model.coefficient(i, k);
      }
      coefficients[spec.name] = std::move(per);
    } else {
      coefficients[spec.name] = model.coefficient(i);
      if (i < weights.mad.size()) mad[spec.name] = weights.mad[i];
    }
  }
  return {{"schema", schema_to_json(schema)},
          {"coefficients", std::move(coefficients)},
          {"bias", model.bias()},
          {"threshold", model.threshold()},
          {"mad", std::move(mad)}};
}

ActionCatalog catalog_from_json(const FeatureSchema& schema, const Json& j) {
  const Json& items = require(j, "actions", "catalog");
  if (!items.is_array()) throw_invalid("catalog.actions must be a list");
  auto effects_of = [&](const Json& effects, const std::string& where) {
    std::vector<Effect> out;
    if (!effects.is_object()) throw_invalid(where + ": effects must be an object");
    for (const auto& [key, delta] : effects.items()) {
      out.push_back({schema.index_of(key), number(delta, where + "." + key)});
    }
    return out;
  };
  std::vector<Action> actions;
  for (const Json& item : items) {
    Action action;
    action.name = text(require(item, "name", "catalog action"), "name");
    const std::string where = "action '" + action.name + "'";
    action.class_tag = text_or(item, "class", "");
    action.cost = number(require(item, "cost", where), where);
    if (auto it = item.find("outcomes"); it != item.end()) {
      for (const Json& outcome : *it) {
        action.outcome_probs.push_back(
            number(require(outcome, "probability", where), where));
        action.outcomes.push_back(
            effects_of(require(outcome, "effects", where), where));
      }
    } else {
      action.outcomes.push_back(effects_of(require(item, "effects", where), where));
      action.outcome_probs.push_back(1.0);
    }
    if (auto it = item.find("preconditions"); it != item.end()) {
      action.preconditions = clauses_from_json(schema, *it, where);
    }
    actions.push_back(std::move(action));
  }
  return ActionCatalog(schema, std::move(actions));
}

Json catalog_to_json(const FeatureSchema& schema, const ActionCatalog& catalog) {
  Json actions = Json::array();
  for (const Action& action : catalog.actions()) {
    Json outcomes = Json::array();
    for (std::size_t o = 0; o < action.outcomes.size(); ++o) {
      Json effects = Json::object();
      for (const Effect& e : action.outcomes[o]) {
        effects[schema[e.feature].name] = e.delta;
      }
      outcomes.push_back(
          {{"probability", action.outcome_probs[o]}, {"effects", effects}});
    }
    Json item = {{"name", action.name},
                 {"class", action.class_tag},
                 {"cost", action.cost},
                 {"outcomes", std::move(outcomes)}};
    if (!action.preconditions.empty()) {
      item["preconditions"] = clauses_to_json(schema, action.preconditions);
    }
    actions.push_back(std::move(item));
  }
  return {{"actions", std::move(actions)}};
}

ActionGrid action_grid_from_json(const FeatureSchema& schema, const Json& j) {
  const Json& entries = j.is_array() ? j : require(j, "entries", "action grid");
  ActionGrid grid;
  for (const Json& item : entries) {
    ActionGridEntry entry;
    const std::string name = text(require(item, "feature", "action grid"), "feature");
    entry.feature = schema.index_of(name);
    for (const Json& delta : require(item, "deltas", name)) {
      entry.deltas.push_back(number(delta, name));
    }
    entry.unit_cost = number_or(item, "unit_cost", 1.0, name);
    if (auto it = item.find("condition"); it != item.end()) {
      entry.condition = clauses_from_json(schema, *it, name);
    }
    grid.push_back(std::move(entry));
  }
  return grid;
}

TemplateSet templates_from_json(const Json& j) {
  TemplateSet set;
  if (auto it = j.find("scenarios"); it != j.end()) {
    for (const auto& [id, body] : it->items()) {
      set.scenarios.emplace(id, scenario_template_from_json(body, "scenario " + id));
    }
  }
  if (auto it = j.find("features"); it != j.end()) {
    for (const auto& [name, body] : it->items()) {
      set.features.emplace(
          name, FeaturePhrases{text(require(body, "target", name), name),
                               text(require(body, "past", name), name)});
    }
  }
  if (auto it = j.find("generic"); it != j.end()) {
    if (auto g = it->find("approve"); g != it->end()) {
      set.generic_positive = scenario_template_from_json(*g, "generic.approve");
    }
    if (auto g = it->find("deny"); g != it->end()) {
      set.generic_negative = scenario_template_from_json(*g, "generic.deny");
    }
  }
  return set;
}

std::vector<std::size_t> features_from_json(const FeatureSchema& schema,
                                            const Json& names) {
  std::vector<std::size_t> out;
  for (const std::string& name : strings(names, "feature list")) {
    out.push_back(schema.index_of(name));
  }
  return out;
}

ProfileFile profile_file_from_json(const FeatureSchema& schema, const Json& j) {
  ProfileFile file;
  file.x = profile_from_json(schema, require(j, "profile", "profile file"));
  file.scenario = text_or(j, "scenario", "");
  if (auto it = j.find("desired"); it != j.end()) file.desired = label_from_json(*it);
  if (auto it = j.find("focus"); it != j.end()) {
    file.focus = features_from_json(schema, *it);
  }
  return file;
}

Dataset read_dataset_csv(const FeatureSchema& schema,
                         const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_invalid("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw_invalid(path.string() + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return k;
    }
    throw_invalid(path.string() + ": missing column '" + name + "'");
  };
  std::vector<std::size_t> columns;
  for (const FeatureSpec& spec : schema.features()) columns.push_back(column_of(spec.name));
  const std::size_t label_column = column_of("label");

  Dataset dataset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw_invalid(where + ": expected " + std::to_string(header.size()) +
                    " columns, found " + std::to_string(cells.size()));
    }
    auto parse = [&](std::size_t column) {
      const std::string& cell = cells[column];
      double value = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw_invalid(where + ", column '" + header[column] + "': '" + cell +
                      "' is not a number");
      }
      return value;
    };
    std::vector<double> values(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const FeatureSpec& spec = schema[i];
      const std::string& cell = cells[columns[i]];
      bool matched = false;
      for (std::size_t k = 0; k < spec.labels.size() && !matched; ++k) {
        if (spec.labels[k] == cell) {
          values[i] = spec.kind == FeatureKind::kCategorical
                          ? static_cast<double>(k)
                          : spec.levels[k];
          matched = true;
        }
      }
      if (!matched) values[i] = parse(columns[i]);
    }
    FeatureVector row(std::move(values));
    try {
      schema.validate(row);
    } catch (const RecourseError& e) {
      throw_invalid(where + ": " + e.what());
    }
    const double label = parse(label_column);
    if (label != 0.0 && label != 1.0) {
      throw_invalid(where + ", column 'label': expected 0 or 1");
    }
    dataset.rows.push_back(std::move(row));
    dataset.labels.push_back(label == 1.0 ? Label::kPositive : Label::kNegative);
  }
  if (dataset.rows.empty()) throw_invalid(path.string() + ": no data rows");
  return dataset;
}

Json counterfactual_to_json(const FeatureSchema& schema,
                            const Counterfactual& c) {
  Json changed = Json::array();
  for (std::size_t f : c.changed) changed.push_back(schema[f].name);
  return {{"target", profile_to_json(schema, c.target)},
          {"distance", c.distance},
          {"changed", std::move(changed)},
          {"label", to_int(c.achieved)}};
}

Json flipset_to_json(const FeatureSchema& schema, const FeatureVector& x,
                     const FlipSet& flipset) {
  Json changes = Json::array();
  for (const auto& [feature, delta] : flipset.deltas) {
    changes.push_back({{"feature", schema[feature].name},
                       {"delta", delta},
                       {"from", x[feature]},
                       {"to", flipset.result[feature]}});
  }
  return {{"changes", std::move(changes)},
          {"cost", flipset.total_cost},
          {"result", profile_to_json(schema, flipset.result)}};
}

Json plan_step_to_json(const PlanStep& step) {
  return {{"action", step.action},
          {"class", step.class_tag},
          {"cost", step.cost},
          {"from", step.from},
          {"to", step.to}};
}

Json explanation_to_json(const ExplanationText& text) {
  return {{"kind", to_string(text.kind)},
          {"text", text.text()},
          {"word_count", text.word_count()},
          {"clauses",
           {{"greeting", text.greeting},
            {"global", text.global},
            {"decision", text.decision},
            {"counterfactual", text.counterfactual},
            {"filler", text.filler},
            {"action", text.action}}}};
}

}  // namespace recourse
