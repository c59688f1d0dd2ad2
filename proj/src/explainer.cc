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

#include "recourse/explainer.h"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "recourse/error.h"

namespace recourse {
namespace {

constexpr std::array<std::string_view, 21> kNumberWords = {
    "zero",    "one",     "two",       "three",    "four",
    "five",    "six",     "seven",     "eight",    "nine",
    "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
    "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty"};

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) out += k + 1 == items.size() ? " and " : ", ";
    out += items[k];
  }
  return out;
}

std::string join_sentences(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& part : parts) {
    if (part.empty()) continue;
    if (!out.empty()) out += ' ';
    out += part;
  }
  return out;
}

std::optional<double> boundary_of(const LinearModel& model,
                                  const FeatureVector& x, std::size_t feature,
                                  Label y) {
  const FeatureSpec& spec = model.schema()[feature];
  if (spec.kind == FeatureKind::kCategorical) return std::nullopt;
  const std::optional<double> t = pdp_threshold(model, x, feature);
  if (!t || spec.kind == FeatureKind::kContinuous) return t;
  std::optional<double> below;
  std::optional<double> above;
  for (double level : spec.levels) {
    if (level < *t) below = level;
    if (level > *t && !above) above = level;
  }
  if (!below) return above;
  if (!above) return below;
  FeatureVector probe = x;
  probe[feature] = *below;
  return classify(model, probe) == y ? below : above;
}

class SlotFiller {
 public:
  SlotFiller(const DirectiveExplanation& de, const FeatureSchema& schema,
             const TemplateSet& templates)
      : de_(de), schema_(schema), templates_(templates) {}

  std::string fill(std::string_view text,
                   std::optional<std::size_t> feature) const {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t open = text.find('{', pos);
      if (open == std::string_view::npos) {
        out.append(text.substr(pos));
        break;
      }
      const std::size_t close = text.find('}', open);
      if (close == std::string_view::npos) {
        throw_invalid("unterminated slot in template: " + std::string(text));
      }
      out.append(text.substr(pos, open - pos));
      out += slot(text.substr(open + 1, close - open - 1), feature);
      pos = close + 1;
    }
    return out;
  }

 private:
  std::string slot(std::string_view body,
                   std::optional<std::size_t> feature) const {
    bool words = false;
    if (const std::size_t bar = body.find('|'); bar != std::string_view::npos) {
      if (body.substr(bar + 1) != "words") {
        throw_invalid("unknown slot format '" + std::string(body) + "'");
      }
      words = true;
      body = body.substr(0, bar);
    }
    std::string_view name = body;
    if (const std::size_t colon = body.find(':');
        colon != std::string_view::npos) {
      name = body.substr(0, colon);
      const std::string feature_name(body.substr(colon + 1));
      feature = schema_.find(feature_name);
      if (!feature) throw_invalid("slot names unknown feature '" + feature_name + "'");
    }
    if (!feature && !de_.c.changed.empty()) feature = de_.c.changed.front();

    if (name == "action" || name == "class") {
      if (de_.plan.empty()) throw_invalid("slot {" + std::string(name) + "} needs a plan");
      const PlanStep& first = de_.plan.front();
      if (name == "action") return first.action;
      if (first.class_tag.empty()) {
        throw_invalid("action '" + first.action + "' has no class tag");
      }
      return first.class_tag;
    }
    if (name == "names") {
      std::vector<std::string> names;
      for (std::size_t f : de_.c.changed) names.push_back(schema_[f].display_name);
      return join_list(names);
    }
    if (name == "targets" || name == "pasts") {
      std::vector<std::string> phrases;
      for (std::size_t f : de_.c.changed) {
        auto it = templates_.features.find(schema_[f].name);
        if (it == templates_.features.end()) {
          throw_invalid("no phrase template for feature '" + schema_[f].name + "'");
        }
        phrases.push_back(
            fill(name == "targets" ? it->second.target : it->second.past, f));
      }
      return join_list(phrases);
    }
    if (!feature) {
      throw_invalid("slot {" + std::string(body) + "} has no feature to refer to");
    }
    const std::size_t f = *feature;
    const FeatureSpec& spec = schema_[f];
    if (name == "name") return spec.display_name;
    if (name == "unit") return spec.unit;
    double value = 0.0;
    if (name == "amount") {
      value = de_.c.target[f];
    } else if (name == "current") {
      value = de_.x[f];
    } else if (name == "boundary") {
      if (f >= de_.boundaries.size() || !de_.boundaries[f]) {
        throw_invalid("no decision boundary for '" + spec.name + "'");
      }
      value = *de_.boundaries[f];
      // Continuous boundaries read as the nearest grid value.
      if (spec.kind == FeatureKind::kContinuous && spec.step > 0.0) {
        value = spec.lo + std::round((value - spec.lo) / spec.step) * spec.step;
      }
    } else {
      throw_invalid("unknown slot {" + std::string(body) + "}");
    }
    return words ? number_words(value) : schema_.format_value(f, value);
  }

  const DirectiveExplanation& de_;
  const FeatureSchema& schema_;
  const TemplateSet& templates_;
};

}  // namespace

std::string_view to_string(ExplanationKind kind) {
  switch (kind) {
    case ExplanationKind::kNonDirective:
      return "non-directive";
    case ExplanationKind::kDirectiveSpecific:
      return "directive-specific";
    case ExplanationKind::kDirectiveGeneric:
      return "directive-generic";
  }
  return "non-directive";
}

ExplanationKind parse_explanation_kind(std::string_view text) {
  if (text == "non-directive" || text == "nd") return ExplanationKind::kNonDirective;
  if (text == "directive-specific" || text == "ds") {
    return ExplanationKind::kDirectiveSpecific;
  }
  if (text == "directive-generic" || text == "dg") {
    return ExplanationKind::kDirectiveGeneric;
  }
  throw_invalid("unknown explanation kind '" + std::string(text) + "'");
}

DirectiveExplanation assemble(const LinearModel& model, const FeatureVector& x,
                              const Counterfactual& c, Label desired,
                              const RecourseMdp* mdp, const Policy* policy,
                              Provenance provenance) {
  const FeatureSchema& schema = model.schema();
  schema.validate(x);
  if (c.target.size() != x.size()) throw_invalid("counterfactual does not match the schema");
  if ((mdp == nullptr) != (policy == nullptr)) {
    throw_invalid("a policy needs the MDP it was solved on");
  }

  DirectiveExplanation de;
  de.x = x;
  de.c = c;
  de.model_fingerprint = model_fingerprint(model);
  de.y = classify(model, x);
  de.boundary = de.y == desired;
  de.y_prime = de.boundary ? flip(desired) : desired;
  if (classify(model, c.target) != de.y_prime || c.achieved != de.y_prime) {
    throw_invalid("counterfactual is not classified as the required label");
  }
  de.provenance = std::move(provenance);

  if (mdp != nullptr) {
    if (!mdp->model_fingerprint.empty() &&
        mdp->model_fingerprint != de.model_fingerprint) {
      throw_invalid("policy was planned against a different model");
    }
    de.reachability = reachability(*mdp, *policy);
    de.unreachable = *de.reachability <= 0.0;
    try {
      const PolicyCost cost = policy_cost(*mdp, *policy);
      if (cost.bounded) de.expected_cost = cost.expected;
    } catch (const RecourseError&) {
      // Partial policies get no cost estimate.
    }
    for (const TrajectoryStep& step : extract_plan(*mdp, *policy)) {
      de.plan.push_back({mdp->action_name(step.action),
                         step.action < mdp->class_tags.size()
                             ? mdp->class_tags[step.action]
                             : std::string(),
                         mdp->action_cost(step.action),
                         mdp->state_key(step.state), mdp->state_key(step.next)});
    }
  }

  de.boundaries.resize(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    de.boundaries[f] = boundary_of(model, x, f, de.y);
  }
  return de;
}

std::string ExplanationText::introduction() const {
  return join_sentences({greeting, global, decision});
}

std::string ExplanationText::text() const {
  std::vector<std::string> parts{counterfactual};
  if (kind == ExplanationKind::kNonDirective) {
    parts.insert(parts.end(), filler.begin(), filler.end());
  } else {
    parts.push_back(action);
  }
  return join_sentences(parts);
}

std::size_t ExplanationText::word_count() const { return count_words(text()); }

std::size_t count_words(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string word; in >> word;) ++n;
  return n;
}

ExplanationText render(const DirectiveExplanation& de,
                       const FeatureSchema& schema, ExplanationKind kind,
                       const TemplateSet& templates,
                       std::string_view scenario) {
  const ScenarioTemplate* tpl = nullptr;
  if (!scenario.empty()) {
    auto it = templates.scenarios.find(std::string(scenario));
    if (it == templates.scenarios.end()) {
      throw_invalid("no templates for scenario '" + std::string(scenario) + "'");
    }
    tpl = &it->second;
  } else {
    const auto& generic = de.y_prime == Label::kPositive
                              ? templates.generic_positive
                              : templates.generic_negative;
    if (!generic) throw_invalid("template set has no generic templates");
    tpl = &*generic;
  }
  if (kind != ExplanationKind::kNonDirective && (de.plan.empty() || de.unreachable)) {
    throw_infeasible("no plan of actions reaches the counterfactual label");
  }

  const SlotFiller filler(de, schema, templates);
  auto fill = [&](const std::string& text) { return filler.fill(text, std::nullopt); };

  ExplanationText out;
  out.kind = kind;
  out.greeting = fill(tpl->greeting);
  out.global = fill(tpl->global);
  out.decision = fill(tpl->decision);
  const KindTemplate& body = kind == ExplanationKind::kNonDirective
                                 ? tpl->non_directive
                             : kind == ExplanationKind::kDirectiveSpecific
                                 ? tpl->directive_specific
                                 : tpl->directive_generic;
  out.counterfactual = fill(body.counterfactual);
  std::vector<std::string> tail;
  for (const std::string& sentence : body.tail) tail.push_back(fill(sentence));
  if (kind == ExplanationKind::kNonDirective) {
    out.filler = std::move(tail);
    for (const std::string& sentence : tpl->elaborations) {
      out.elaborations.push_back(fill(sentence));
    }
  } else {
    out.action = join_sentences(tail);
  }
  return out;
}

bool within_balance_band(std::size_t words,
                         std::span<const std::size_t> reference_lengths) {
  if (reference_lengths.empty()) return true;
  const double mean =
      std::accumulate(reference_lengths.begin(), reference_lengths.end(), 0.0) /
      static_cast<double>(reference_lengths.size());
  return std::abs(static_cast<double>(words) - mean) <= kBalanceBand * mean;
}

ExplanationText balance_filler(ExplanationText nd,
                               std::span<const std::size_t> reference_lengths) {
  if (reference_lengths.empty()) return nd;
  const double mean =
      std::accumulate(reference_lengths.begin(), reference_lengths.end(), 0.0) /
      static_cast<double>(reference_lengths.size());
  std::size_t next = 0;
  while (static_cast<double>(nd.word_count()) < (1.0 - kBalanceBand) * mean &&
         next < nd.elaborations.size()) {
    nd.filler.push_back(nd.elaborations[next++]);
  }
  while (static_cast<double>(nd.word_count()) > (1.0 + kBalanceBand) * mean &&
         nd.filler.size() > 1) {
    nd.filler.pop_back();
  }
  return nd;
}

std::string generic_class_of(const Action& action) {
  if (action.class_tag.empty()) {
    throw_invalid("action '" + action.name + "' has no class tag");
  }
  return action.class_tag;
}

std::string number_words(double value) {
  const double rounded = std::round(value);
  if (std::abs(value - rounded) < 1e-9 && rounded >= 0 && rounded <= 20) {
    return std::string(kNumberWords[static_cast<std::size_t>(rounded)]);
  }
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace recourse
