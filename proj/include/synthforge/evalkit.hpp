// Copyright 2026 The Synthforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace synthforge::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Prediction {
  std::string id;
  int y_true = 0;
  int y_pred = 0;
  std::optional<double> p1;  // probability of class 1
};

struct PredictionSet {
  std::vector<Prediction> items;
  std::string variant_tag;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class{};  // index = class label
  double macro_f1 = 0.0;
  std::optional<double> mean_loss;
};

/// 2x2 confusion counts: counts[truth][pred].
using Confusion = std::array<std::array<std::size_t, 2>, 2>;

Confusion confusion(const PredictionSet& preds);

/// Per-class precision, recall and F1 with 0/0 taken as 0.
std::array<ClassMetrics, 2> per_class_metrics(const PredictionSet& preds);

/// Mean of the two per-class F1 scores. Throws EvalError on empty input.
double macro_f1(const PredictionSet& preds);

double accuracy(const PredictionSet& preds);

inline constexpr double kProbabilityClip = 1e-12;

/// Mean binary cross-entropy with probabilities clipped to
/// [1e-12, 1 - 1e-12]. Throws EvalError when any item lacks p1.
double mean_cross_entropy(const PredictionSet& preds);

/// Population variance of per-variant mean cross-entropy. Throws EvalError
/// for fewer than two variants.
double robustness_variance(std::span<const PredictionSet> variants);

/// Same, starting from per-variant mean losses.
double population_variance(std::span<const double> values);

MetricsReport evaluate(const PredictionSet& preds);

/// Reads a prediction jsonl file (id, y_true, y_pred, optional p1, optional
/// variant). Items are grouped by variant in first-seen order; lines without
/// a variant use default_variant. Malformed lines raise EvalError citing the
/// line number.
std::vector<PredictionSet> read_predictions(const std::filesystem::path& path,
                                            const std::string& default_variant);

}  // namespace synthforge::eval
