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

#include "synthforge/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cstdint>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace synthforge::eval {

using json = nlohmann::json;

namespace {

void require_non_empty(const PredictionSet& preds) {
  if (preds.items.empty()) throw EvalError("prediction set '" + preds.variant_tag + "' is empty");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Confusion confusion(const PredictionSet& preds) {
  Confusion c{};
  for (const auto& p : preds.items) {
    if ((p.y_true != 0 && p.y_true != 1) || (p.y_pred != 0 && p.y_pred != 1)) {
      throw EvalError("labels must be 0 or 1 (item " + p.id + ")");
    }
    ++c[p.y_true][p.y_pred];
  }
  return c;
}

std::array<ClassMetrics, 2> per_class_metrics(const PredictionSet& preds) {
  auto c = confusion(preds);
  std::array<ClassMetrics, 2> out{};
  for (int k = 0; k < 2; ++k) {
    std::size_t tp = c[k][k];
    std::size_t predicted = c[0][k] + c[1][k];
    std::size_t actual = c[k][0] + c[k][1];
    auto& m = out[k];
    m.precision = ratio(tp, predicted);
    m.recall = ratio(tp, actual);
    double denom = m.precision + m.recall;
    m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
  }
  return out;
}

double macro_f1(const PredictionSet& preds) {
  require_non_empty(preds);
  auto c = confusion(preds);
  // F1_k = 2TP / (2TP + FP + FN); both classes combined over one denominator
  // so the result is a single correctly rounded division.
  std::uint64_t num[2];
  std::uint64_t den[2];
  for (int k = 0; k < 2; ++k) {
    std::uint64_t tp = c[k][k];
    num[k] = 2 * tp;
    den[k] = 2 * tp + c[1 - k][k] + c[k][1 - k];
    if (den[k] == 0) {
      num[k] = 0;
      den[k] = 1;
    }
  }
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::uint64_t total_den = 2 * den[0] * den[1];
  if (den[0] < (1u << 24) && den[1] < (1u << 24) && total_den < kExact) {
    std::uint64_t total_num = num[0] * den[1] + num[1] * den[0];
    return static_cast<double>(total_num) / static_cast<double>(total_den);
  }
  auto m = per_class_metrics(preds);
  return (m[0].f1 + m[1].f1) / 2.0;
}

double accuracy(const PredictionSet& preds) {
  require_non_empty(preds);
  auto hits = std::count_if(preds.items.begin(), preds.items.end(),
                            [](const Prediction& p) { return p.y_true == p.y_pred; });
  return ratio(static_cast<std::size_t>(hits), preds.items.size());
}

double mean_cross_entropy(const PredictionSet& preds) {
  require_non_empty(preds);
  double sum = 0.0;
  for (const auto& p : preds.items) {
    if (!p.p1) throw EvalError("item " + p.id + " has no probability");
    double q = std::clamp(*p.p1, kProbabilityClip, 1.0 - kProbabilityClip);
    sum += p.y_true == 1 ? -std::log(q) : -std::log1p(-q);
  }
  return sum / static_cast<double>(preds.items.size());
}

double population_variance(std::span<const double> values) {
  if (values.size() < 2) throw EvalError("robustness needs at least 2 variants");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size());
}

double robustness_variance(std::span<const PredictionSet> variants) {
  if (variants.size() < 2) throw EvalError("robustness needs at least 2 variants");
  std::vector<double> losses;
  losses.reserve(variants.size());
  for (const auto& v : variants) losses.push_back(mean_cross_entropy(v));
  return population_variance(losses);
}

MetricsReport evaluate(const PredictionSet& preds) {
  MetricsReport r;
  r.accuracy = accuracy(preds);
  r.per_class = per_class_metrics(preds);
  r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  bool all_probs = std::all_of(preds.items.begin(), preds.items.end(),
                               [](const Prediction& p) { return p.p1.has_value(); });
  if (all_probs) r.mean_loss = mean_cross_entropy(preds);
  return r;
}

std::vector<PredictionSet> read_predictions(const std::filesystem::path& path,
                                            const std::string& default_variant) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvalError("cannot open prediction file " + path.string());

  std::vector<PredictionSet> sets;
  std::map<std::string, std::size_t> slot;
  std::map<std::string, std::unordered_set<std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw EvalError(path.string() + ": line " + std::to_string(line_no) + ": " + what);
  };
  auto read_label = [&](const json& j, const char* key) {
    if (!j.contains(key)) fail(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be 0 or 1");
    auto x = v.get<long long>();
    if (x != 0 && x != 1) fail(std::string("field '") + key + "' must be 0 or 1");
    return static_cast<int>(x);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("not a json object");

    Prediction p;
    if (!j.contains("id")) fail("missing field 'id'");
    p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    p.y_true = read_label(j, "y_true");
    p.y_pred = read_label(j, "y_pred");
    if (j.contains("p1") && !j.at("p1").is_null()) {
      if (!j.at("p1").is_number()) fail("field 'p1' must be a number");
      double v = j.at("p1").get<double>();
      if (!(v >= 0.0 && v <= 1.0)) fail("field 'p1' must be in [0, 1]");
      p.p1 = v;
    }
    std::string variant = default_variant;
    if (j.contains("variant") && j.at("variant").is_string()) {
      variant = j.at("variant").get<std::string>();
    }
    if (!seen[variant].insert(p.id).second) fail("duplicate id '" + p.id + "'");
    auto [it, inserted] = slot.emplace(variant, sets.size());
    if (inserted) sets.push_back(PredictionSet{{}, variant});
    sets[it->second].items.push_back(std::move(p));
  }
  return sets;
}

}  // namespace synthforge::eval
