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

#ifndef RECOURSE_EXPLAINER_H_
#define RECOURSE_EXPLAINER_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recourse/counterfactual.h"
#include "recourse/model.h"
#include "recourse/planner.h"
#include "recourse/schema.h"

namespace recourse {

enum class ExplanationKind { kNonDirective, kDirectiveSpecific, kDirectiveGeneric };

std::string_view to_string(ExplanationKind kind);
ExplanationKind parse_explanation_kind(std::string_view text);

struct PlanStep {
  std::string action;
  std::string class_tag;
  double cost = 0.0;
  std::string from;
  std::string to;
};

// Where the pieces of an explanation came from.
struct Provenance {
  std::string grid;
  std::string catalog;
  std::string solver;
};

// The tuple (x, c, pi, f, y, y') plus what rendering needs from the model.
struct DirectiveExplanation {
  FeatureVector x;
  Counterfactual c;
  // Most likely path of the policy from the initial state; empty when no
  // policy was supplied or it never reaches a goal.
  std::vector<PlanStep> plan;
  std::string model_fingerprint;
  Label y = Label::kNegative;
  Label y_prime = Label::kPositive;
  // x already had the requested label; c shows the opposite decision.
  bool boundary = false;
  // A policy was supplied but reaches the goal with probability 0.
  bool unreachable = false;
  std::optional<double> reachability;
  std::optional<double> expected_cost;
  // Per feature: the decision boundary with the other features held at x.
  // Ordinal features store the level on x's side next to the crossing.
  std::vector<std::optional<double>> boundaries;
  Provenance provenance;
};

// Throws kInvalidInput when the counterfactual does not carry the label the
// tuple requires or the MDP was built from another model. `mdp` and
// `policy` may both be null for non-directive output.
DirectiveExplanation assemble(const LinearModel& model, const FeatureVector& x,
                              const Counterfactual& c, Label desired,
                              const RecourseMdp* mdp, const Policy* policy,
                              Provenance provenance = {});

// Phrases for one explanation kind. `tail` holds the filler sentences of a
// non-directive explanation or the action clause of a directive one.
struct KindTemplate {
  std::string counterfactual;
  std::vector<std::string> tail;
};

struct ScenarioTemplate {
  std::string greeting;
  std::string global;
  std::string decision;
  KindTemplate non_directive;
  // Extra filler sentences balance_filler may append, in order.
  std::vector<std::string> elaborations;
  KindTemplate directive_specific;
  KindTemplate directive_generic;
};

// Per-feature phrases used by the generic templates' {targets} and {pasts}
// slots.
struct FeaturePhrases {
  std::string target;
  std::string past;
};

// Slots have the form {slot[:feature][|words]}; slots are name, amount,
// unit, boundary, current, action, class, names, targets and pasts. The
// feature defaults to the first changed one; "|words" spells integers up to
// twenty.
struct TemplateSet {
  std::map<std::string, ScenarioTemplate> scenarios;
  std::map<std::string, FeaturePhrases> features;
  // Used without a scenario, keyed by the counterfactual's label.
  std::optional<ScenarioTemplate> generic_positive;
  std::optional<ScenarioTemplate> generic_negative;
};

struct ExplanationText {
  ExplanationKind kind = ExplanationKind::kNonDirective;
  std::string greeting;
  std::string global;
  std::string decision;
  std::string counterfactual;
  std::vector<std::string> filler;
  std::string action;
  // Rendered elaboration pool for balance_filler.
  std::vector<std::string> elaborations;

  // Greeting, global clause and decision clause.
  std::string introduction() const;
  // The explanation proper: counterfactual clause then filler or action.
  std::string text() const;
  std::size_t word_count() const;
};

std::size_t count_words(std::string_view text);

// Deterministic rendering. Uses the named scenario's templates, or the
// generic ones when `scenario` is empty. Throws kInvalidInput for an unknown
// scenario or a slot the tuple cannot fill, and kInfeasible for a directive
// kind without a plan.
ExplanationText render(const DirectiveExplanation& de, const FeatureSchema& schema,
                       ExplanationKind kind, const TemplateSet& templates,
                       std::string_view scenario = {});

inline constexpr double kBalanceBand = 0.25;

// Appends elaborations, or drops trailing filler sentences (keeping one),
// until the word count is within the band around the mean reference length
// or no move is left.
ExplanationText balance_filler(ExplanationText nd,
                               std::span<const std::size_t> reference_lengths);

bool within_balance_band(std::size_t words,
                         std::span<const std::size_t> reference_lengths);

// Throws kInvalidInput when the action has no class tag.
std::string generic_class_of(const Action& action);

// Spelled-out integers 0..20, digits otherwise.
std::string number_words(double value);

}  // namespace recourse

#endif  // RECOURSE_EXPLAINER_H_
