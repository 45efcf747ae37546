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
#include <set>
#include <thread>

#include "synthforge/noise.hpp"
#include "synthforge/parallel.hpp"

using namespace synthforge;

TEST(NoiseStream, SameKeySameSequence) {
  NoiseStream a(99, {3, 7, NoisePurpose::kDropout});
  NoiseStream b(99, {3, 7, NoisePurpose::kDropout});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(NoiseStream, DifferentPurposeOrItemDiverges) {
  NoiseStream base(99, {3, 7, NoisePurpose::kDropout});
  NoiseStream other_item(99, {3, 8, NoisePurpose::kDropout});
  NoiseStream other_purpose(99, {3, 7, NoisePurpose::kThemeChoice});
  double x = base.uniform();
  EXPECT_NE(x, other_item.uniform());
  EXPECT_NE(x, other_purpose.uniform());
}

TEST(NoiseStream, IndependentOfConstructionThread) {
  std::vector<double> from_threads(8);
  {
    std::vector<std::jthread> ts;
    for (std::size_t i = 0; i < 8; ++i) {
      ts.emplace_back([&, i] {
        NoiseStream s(5, {1, i, NoisePurpose::kIndicators});
        from_threads[i] = s.uniform();
      });
    }
  }
  for (std::size_t i = 0; i < 8; ++i) {
    NoiseStream s(5, {1, i, NoisePurpose::kIndicators});
    EXPECT_EQ(from_threads[i], s.uniform());
  }
}

TEST(NoiseStream, UniformInUnitInterval) {
  NoiseStream s(1, {});
  for (int i = 0; i < 10000; ++i) {
    double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Sampling, WithoutReplacementIsDistinct) {
  NoiseStream s(11, {});
  for (std::size_t n = 1; n < 60; ++n) {
    for (std::size_t k = 0; k <= n; k += 3) {
      auto idx = sample_without_replacement(s, n, k);
      ASSERT_EQ(idx.size(), k);
      std::set<std::size_t> uniq(idx.begin(), idx.end());
      ASSERT_EQ(uniq.size(), k);
      ASSERT_TRUE(std::all_of(idx.begin(), idx.end(), [&](auto i) { return i < n; }));
    }
  }
  EXPECT_THROW(sample_without_replacement(s, 3, 4), std::invalid_argument);
}

TEST(Sampling, DrawIndexEdges) {
  ScriptedDraws d({0.0, 0.999999999, 0.5});
  EXPECT_EQ(draw_index(d, 4), 0u);
  EXPECT_EQ(draw_index(d, 4), 3u);
  EXPECT_EQ(draw_index(d, 4), 2u);
  EXPECT_THROW(d.uniform(), std::out_of_range);
}

TEST(Parallel, EveryIndexRunsOnceAndErrorsPropagate) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
