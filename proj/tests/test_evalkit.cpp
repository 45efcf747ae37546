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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "synthforge/evalkit.hpp"

using namespace synthforge::eval;
using synthforge::testing::macro_f1_oracle;
namespace fs = std::filesystem;

namespace {

PredictionSet make_set(const std::vector<int>& truth, const std::vector<int>& pred,
                       std::vector<double> p1 = {}) {
  PredictionSet s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    Prediction p{"i" + std::to_string(i), truth[i], pred[i], std::nullopt};
    if (!p1.empty()) p.p1 = p1[i];
    s.items.push_back(p);
  }
  return s;
}

fs::path write_file(const std::string& name, const std::string& contents) {
  auto dir = fs::temp_directory_path() / "synthforge_eval_tests";
  fs::create_directories(dir);
  std::ofstream(dir / name) << contents;
  return dir / name;
}

}  // namespace

TEST(MacroF1, MatchesOracleOnAllPatterns) {
  const std::vector<int> truth = {0, 1, 1, 0, 1, 0, 0, 1};
  for (unsigned mask = 0; mask < 256; ++mask) {
    std::vector<int> pred(8);
    for (int b = 0; b < 8; ++b) pred[b] = (mask >> b) & 1;
    EXPECT_EQ(macro_f1(make_set(truth, pred)), macro_f1_oracle(truth, pred).value())
        << "mask " << mask;
  }
}

TEST(MacroF1, AllZeroOnBalancedSet) {
  EXPECT_NEAR(macro_f1(make_set({0, 0, 1, 1}, {0, 0, 0, 0})), 1.0 / 3.0, 1e-12);
}

TEST(MacroF1, PerfectAndEmpty) {
  EXPECT_EQ(macro_f1(make_set({0, 1, 1}, {0, 1, 1})), 1.0);
  EXPECT_THROW(macro_f1(PredictionSet{}), EvalError);
}

TEST(MacroF1, InvariantUnderPermutation) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t(20), p(20);
    for (auto& x : t) x = static_cast<int>(rng() % 2);
    for (auto& x : p) x = static_cast<int>(rng() % 2);
    auto base = macro_f1(make_set(t, p));
    std::vector<std::size_t> order(20);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> t2, p2;
    for (auto i : order) {
      t2.push_back(t[i]);
      p2.push_back(p[i]);
    }
    EXPECT_NEAR(macro_f1(make_set(t2, p2)), base, 1e-15);
  }
}

TEST(MacroF1, SymmetricUnderLabelSwap) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> t(15), p(15), ts(15), ps(15);
    for (int i = 0; i < 15; ++i) {
      t[i] = static_cast<int>(rng() % 2);
      p[i] = static_cast<int>(rng() % 2);
      ts[i] = 1 - t[i];
      ps[i] = 1 - p[i];
    }
    EXPECT_NEAR(macro_f1(make_set(t, p)), macro_f1(make_set(ts, ps)), 1e-15);
  }
}

TEST(Accuracy, Simple) {
  EXPECT_DOUBLE_EQ(accuracy(make_set({0, 1, 1, 0}, {0, 1, 0, 0})), 0.75);
}

TEST(CrossEntropy, HalfProbabilityIsLn2) {
  EXPECT_NEAR(mean_cross_entropy(make_set({0, 1}, {0, 1}, {0.5, 0.5})), std::log(2.0), 1e-12);
}

TEST(CrossEntropy, ClippedAndFinite) {
  double perfect = mean_cross_entropy(make_set({0, 1}, {0, 1}, {0.0, 1.0}));
  EXPECT_GE(perfect, 0.0);
  EXPECT_LT(perfect, 1e-10);
  double wrong = mean_cross_entropy(make_set({1}, {0}, {0.0}));
  EXPECT_TRUE(std::isfinite(wrong));
  EXPECT_NEAR(wrong, -std::log(1e-12), 1e-6);
}

TEST(CrossEntropy, RequiresProbabilities) {
  EXPECT_THROW(mean_cross_entropy(make_set({0}, {0})), EvalError);
}

TEST(Robustness, IdenticalVariantsHaveZeroVariance) {
  auto s = make_set({0, 1, 1}, {0, 1, 0}, {0.2, 0.7, 0.4});
  std::vector<PredictionSet> v = {s, s, s};
  EXPECT_EQ(robustness_variance(v), 0.0);
}

TEST(Robustness, TwoLossesVariance) {
  std::vector<double> losses = {0.2, 0.4};
  EXPECT_NEAR(population_variance(losses), 0.01, 1e-12);
  EXPECT_NEAR(synthforge::testing::variance_oracle(losses), 0.01, 1e-12);
  EXPECT_THROW(population_variance(std::vector<double>{0.3}), EvalError);
}

TEST(Robustness, VariantsFromLossTargets) {
  // p1 chosen so each variant's mean loss equals -ln(p) exactly.
  auto variant = [](double loss) {
    double p = std::exp(-loss);
    return make_set({1, 1}, {1, 1}, {p, p});
  };
  std::vector<PredictionSet> v = {variant(0.2), variant(0.4)};
  EXPECT_NEAR(robustness_variance(v), 0.01, 1e-12);
}

TEST(ReadPredictions, GroupsByVariant) {
  auto path = write_file("p.jsonl",
                         "{\"id\":\"a\",\"y_true\":1,\"y_pred\":1,\"p1\":0.9,\"variant\":\"v1\"}\n"
                         "{\"id\":\"a\",\"y_true\":1,\"y_pred\":0,\"p1\":0.4,\"variant\":\"v2\"}\n"
                         "{\"id\":\"b\",\"y_true\":0,\"y_pred\":0,\"variant\":\"v1\"}\n");
  auto sets = read_predictions(path, "default");
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].variant_tag, "v1");
  EXPECT_EQ(sets[0].items.size(), 2u);
  EXPECT_EQ(sets[1].variant_tag, "v2");
}

TEST(ReadPredictions, DefaultVariantAndErrors) {
  auto ok = write_file("q.jsonl", "{\"id\":\"a\",\"y_true\":1,\"y_pred\":1}\n");
  auto sets = read_predictions(ok, "base");
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].variant_tag, "base");

  auto dup = write_file("r.jsonl",
                        "{\"id\":\"a\",\"y_true\":1,\"y_pred\":1}\n"
                        "{\"id\":\"a\",\"y_true\":0,\"y_pred\":1}\n");
  EXPECT_THROW(read_predictions(dup, "base"), EvalError);

  auto bad_p = write_file("s.jsonl", "{\"id\":\"a\",\"y_true\":1,\"y_pred\":1,\"p1\":1.5}\n");
  try {
    read_predictions(bad_p, "base");
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}
