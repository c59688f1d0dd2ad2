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

#ifndef RECOURSE_MODEL_H_
#define RECOURSE_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recourse/schema.h"

namespace recourse {

enum class Label : int { kNegative = 0, kPositive = 1 };

inline Label flip(Label label) {
  return label == Label::kPositive ? Label::kNegative : Label::kPositive;
}
inline int to_int(Label label) { return static_cast<int>(label); }
// Throws kInvalidInput unless value is 0 or 1.
Label label_from_int(long long value);

// Logistic classifier over the one-hot encoded schema. Immutable once built.
class LinearModel {
 public:
  // `coefficients` has one entry per encoded column. Throws kInvalidInput on
  // width mismatch, non-finite values or a threshold outside (0, 1).
  LinearModel(std::shared_ptr<const FeatureSchema> schema,
              std::vector<double> coefficients, double bias,
              double threshold = 0.5);

  const FeatureSchema& schema() const { return *schema_; }
  const std::shared_ptr<const FeatureSchema>& schema_ptr() const {
    return schema_;
  }
  std::span<const double> coefficients() const { return coefficients_; }
  double bias() const { return bias_; }
  double threshold() const { return threshold_; }

  // Coefficient of a numeric feature, or of one category of a categorical.
  double coefficient(std::size_t feature, std::size_t category = 0) const;

  // w . encode(x) + b. Only the vector length is checked.
  double logit(const FeatureVector& x) const;
  // Contribution of a single feature value to the logit.
  double contribution(std::size_t feature, double value) const;

 private:
  std::shared_ptr<const FeatureSchema> schema_;
  std::vector<double> coefficients_;
  double bias_;
  double threshold_;
};

// sigmoid(w . x + b), clamped to the open interval (0, 1).
double predict_proba(const LinearModel& model, const FeatureVector& x);
double sigmoid(double z);

// 1 iff predict_proba >= threshold. Exact ties classify as positive.
Label classify(const LinearModel& model, const FeatureVector& x);

// Stable hex digest identifying schema names, coefficients, bias and
// threshold.
std::string model_fingerprint(const LinearModel& model);

struct Dataset {
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;

  std::size_t size() const { return rows.size(); }
};

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 2000;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// Full-batch gradient descent on standardized columns starting from zero
// weights; coefficients are mapped back to raw feature units. Throws
// kInvalidInput on an empty dataset or rows that do not conform.
LinearModel train_logistic(std::shared_ptr<const FeatureSchema> schema,
                           const Dataset& dataset,
                           const TrainConfig& config = {});

double accuracy(const LinearModel& model, const Dataset& dataset);

// Inverse median-absolute-deviation weights. Categorical features use a
// 0/1 mismatch with weight 1.
struct MadWeights {
  std::vector<double> mad;
  std::vector<double> weight;
  std::vector<bool> excluded;

  std::size_t size() const { return weight.size(); }
  static MadWeights from_mad(const FeatureSchema& schema,
                             std::vector<double> mad);
  static MadWeights uniform(const FeatureSchema& schema);
};

double median(std::vector<double> values);
MadWeights mad_weights(const FeatureSchema& schema, const Dataset& dataset);

// Relative bisection tolerance of pdp_threshold, as a fraction of the
// feature's range.
inline constexpr double kPdpRelativeTolerance = 1e-9;
double pdp_tolerance(const FeatureSpec& spec);

// The value of `feature` at which classify flips, all other coordinates
// fixed; nullopt when the label is constant across the bounds. Throws
// kInvalidInput for categorical features.
std::optional<double> pdp_threshold(const LinearModel& model,
                                    const FeatureVector& x,
                                    std::size_t feature);

struct PdpPoint {
  double value;
  double probability;
};

// Evenly spaced grid over the feature's bounds. Throws kInvalidInput for
// grid_size < 2 or categorical features.
std::vector<PdpPoint> pdp_curve(const LinearModel& model,
                                const FeatureVector& x, std::size_t feature,
                                std::size_t grid_size);

}  // namespace recourse

#endif  // RECOURSE_MODEL_H_
