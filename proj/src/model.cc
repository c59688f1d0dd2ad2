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

#include "recourse/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "recourse/error.h"

namespace recourse {

Label label_from_int(long long value) {
  if (value == 0) return Label::kNegative;
  if (value == 1) return Label::kPositive;
  throw_invalid("label must be 0 or 1, got " + std::to_string(value));
}

LinearModel::LinearModel(std::shared_ptr<const FeatureSchema> schema,
                         std::vector<double> coefficients, double bias,
                         double threshold)
    : schema_(std::move(schema)),
      coefficients_(std::move(coefficients)),
      bias_(bias),
      threshold_(threshold) {
  if (!schema_) throw_invalid("model without schema");
  if (coefficients_.size() != schema_->encoded_width()) {
    throw_invalid("model has " + std::to_string(coefficients_.size()) +
                  " coefficients, schema encodes " +
                  std::to_string(schema_->encoded_width()) + " columns");
  }
  for (double w : coefficients_) {
    if (!std::isfinite(w)) throw_invalid("non-finite model coefficient");
  }
  if (!std::isfinite(bias_)) throw_invalid("non-finite model bias");
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) {
    throw_invalid("decision threshold must lie in (0, 1)");
  }
}

double LinearModel::coefficient(std::size_t feature,
                                std::size_t category) const {
  return coefficients_[schema_->encoded_offset(feature) + category];
}

double LinearModel::contribution(std::size_t feature, double value) const {
  const std::size_t offset = schema_->encoded_offset(feature);
  if ((*schema_)[feature].kind == FeatureKind::kCategorical) {
    return coefficients_[offset + static_cast<std::size_t>(value)];
  }
  return coefficients_[offset] * value;
}

double LinearModel::logit(const FeatureVector& x) const {
  if (x.size() != schema_->size()) {
    throw_invalid("feature vector has " + std::to_string(x.size()) +
                  " values, model expects " + std::to_string(schema_->size()));
  }
  double z = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) z += contribution(i, x[i]);
  return z;
}

double sigmoid(double z) {
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  constexpr double kLowest = std::numeric_limits<double>::min();
  const double highest = std::nextafter(1.0, 0.0);
  return std::clamp(p, kLowest, highest);
}

double predict_proba(const LinearModel& model, const FeatureVector& x) {
  return sigmoid(model.logit(x));
}

Label classify(const LinearModel& model, const FeatureVector& x) {
  return predict_proba(model, x) >= model.threshold() ? Label::kPositive
                                                      : Label::kNegative;
}

std::string model_fingerprint(const LinearModel& model) {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ULL;
    }
  };
  for (const FeatureSpec& spec : model.schema().features()) {
    mix(spec.name.data(), spec.name.size());
    mix("\0", 1);
  }
  for (double w : model.coefficients()) mix(&w, sizeof(w));
  const double bias = model.bias();
  const double threshold = model.threshold();
  mix(&bias, sizeof(bias));
  mix(&threshold, sizeof(threshold));
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

LinearModel train_logistic(std::shared_ptr<const FeatureSchema> schema,
                           const Dataset& dataset, const TrainConfig& config) {
  if (!schema) throw_invalid("training without schema");
  if (dataset.rows.empty()) throw_invalid("empty training dataset");
  if (dataset.labels.size() != dataset.rows.size()) {
    throw_invalid("dataset has " + std::to_string(dataset.rows.size()) +
                  " rows but " + std::to_string(dataset.labels.size()) +
                  " labels");
  }
  if (config.epochs < 0 || !(config.learning_rate > 0.0) || config.l2 < 0.0) {
    throw_invalid("invalid training configuration");
  }
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    try {
      schema->validate(dataset.rows[r]);
    } catch (const RecourseError& e) {
      throw_invalid("row " + std::to_string(r + 1) + ": " + e.what());
    }
  }

  const std::size_t n = dataset.rows.size();
  const std::size_t width = schema->encoded_width();
  std::vector<double> design(n * width);
  for (std::size_t r = 0; r < n; ++r) {
    schema->encode(dataset.rows[r],
                   std::span<double>(design.data() + r * width, width));
  }

  std::vector<double> mean(width, 0.0);
  std::vector<double> scale(width, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < width; ++j) mean[j] += design[r * width + j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      const double d = design[r * width + j] - mean[j];
      scale[j] += d * d;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < 1e-12) s = 1.0;
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      double& v = design[r * width + j];
      v = (v - mean[j]) / scale[j];
    }
  }

  std::vector<double> w(width, 0.0);
  double b = 0.0;
  std::vector<double> grad(width);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = design.data() + r * width;
      double z = b;
      for (std::size_t j = 0; j < width; ++j) z += w[j] * row[j];
      const double err = sigmoid(z) - to_int(dataset.labels[r]);
      for (std::size_t j = 0; j < width; ++j) grad[j] += err * row[j];
      grad_b += err;
    }
    for (std::size_t j = 0; j < width; ++j) {
      w[j] -= config.learning_rate * (grad[j] * inv_n + config.l2 * w[j]);
    }
    b -= config.learning_rate * grad_b * inv_n;
  }

  std::vector<double> raw(width);
  double raw_bias = b;
  for (std::size_t j = 0; j < width; ++j) {
    raw[j] = w[j] / scale[j];
    raw_bias -= raw[j] * mean[j];
  }
  return LinearModel(std::move(schema), std::move(raw), raw_bias);
}

double accuracy(const LinearModel& model, const Dataset& dataset) {
  if (dataset.rows.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    if (classify(model, dataset.rows[r]) == dataset.labels[r]) ++correct;
  }
  return static_cast<double>(correct) /
         static_cast<double>(dataset.rows.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw_invalid("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

MadWeights MadWeights::from_mad(const FeatureSchema& schema,
                                std::vector<double> mad) {
  if (mad.size() != schema.size()) {
    throw_invalid("MAD vector does not match the schema");
  }
  MadWeights weights;
  weights.mad = std::move(mad);
  weights.weight.assign(schema.size(), 0.0);
  weights.excluded.assign(schema.size(), false);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == FeatureKind::kCategorical) {
      weights.weight[i] = 1.0;
      continue;
    }
    const double m = weights.mad[i];
    if (!(m > 0.0) || !std::isfinite(1.0 / m)) {
      weights.excluded[i] = true;
    } else {
      weights.weight[i] = 1.0 / m;
    }
  }
  return weights;
}

MadWeights MadWeights::uniform(const FeatureSchema& schema) {
  return from_mad(schema, std::vector<double>(schema.size(), 1.0));
}

MadWeights mad_weights(const FeatureSchema& schema, const Dataset& dataset) {
  if (dataset.rows.empty()) throw_invalid("MAD over an empty dataset");
  std::vector<double> mad(schema.size(), 1.0);
  std::vector<double> column(dataset.rows.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == FeatureKind::kCategorical) continue;
    for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
      column[r] = dataset.rows[r][i];
    }
    const double center = median(column);
    std::vector<double> deviations(column.size());
    for (std::size_t r = 0; r < column.size(); ++r) {
      deviations[r] = std::abs(column[r] - center);
    }
    mad[i] = median(std::move(deviations));
  }
  return MadWeights::from_mad(schema, std::move(mad));
}

double pdp_tolerance(const FeatureSpec& spec) {
  return kPdpRelativeTolerance * (spec.hi - spec.lo);
}

std::optional<double> pdp_threshold(const LinearModel& model,
                                    const FeatureVector& x,
                                    std::size_t feature) {
  const FeatureSchema& schema = model.schema();
  if (feature >= schema.size()) throw_invalid("feature index out of range");
  const FeatureSpec& spec = schema[feature];
  if (spec.kind == FeatureKind::kCategorical) {
    throw_invalid("feature '" + spec.name +
                  "' is categorical; probe it with a what-if query instead");
  }
  FeatureVector probe = x;
  auto label_at = [&](double value) {
    probe[feature] = value;
    return classify(model, probe);
  };
  double lo = spec.lo;
  double hi = spec.hi;
  const Label label_lo = label_at(lo);
  if (label_lo == label_at(hi)) return std::nullopt;

  const double tolerance = pdp_tolerance(spec);
  // Each iteration halves the bracket; 200 covers any double range.
  for (int iteration = 0; iteration < 200 && hi - lo > tolerance;
       ++iteration) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (label_at(mid) == label_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<PdpPoint> pdp_curve(const LinearModel& model,
                                const FeatureVector& x, std::size_t feature,
                                std::size_t grid_size) {
  const FeatureSchema& schema = model.schema();
  if (feature >= schema.size()) throw_invalid("feature index out of range");
  if (grid_size < 2) throw_invalid("PDP grid needs at least 2 points");
  const FeatureSpec& spec = schema[feature];
  if (spec.kind == FeatureKind::kCategorical) {
    throw_invalid("feature '" + spec.name + "' is categorical");
  }
  std::vector<PdpPoint> curve;
  curve.reserve(grid_size);
  FeatureVector probe = x;
  const double span = spec.hi - spec.lo;
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double value =
        k + 1 == grid_size
            ? spec.hi
            : spec.lo + span * static_cast<double>(k) /
                            static_cast<double>(grid_size - 1);
    probe[feature] = value;
    curve.push_back({value, predict_proba(model, probe)});
  }
  return curve;
}

}  // namespace recourse
