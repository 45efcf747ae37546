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

#include <random>

#include <nlohmann/json.hpp>

#include "synthforge/augment.hpp"
#include "synthforge/templates.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace synthforge;
using synthforge::testing::FunctionBackend;

namespace {

SyntheticRecord record(std::string id, std::optional<int> quality = std::nullopt) {
  SyntheticRecord r;
  r.id = std::move(id);
  r.context.core = "core text for " + r.id;
  r.quality = quality;
  r.valid = true;
  r.round = 1;
  r.parent_seed_ids = {"seed-1", "seed-2"};
  return r;
}

void script_context(FunctionBackend& b) {
  b.reply(StageTag::kContextualize, "PRECEDING: before it\nSUCCEEDING: after it");
}

}  // namespace

TEST(Dropout, ForcedOutcomes) {
  auto t = PromptTemplates::defaults();
  {
    FunctionBackend b;
    script_context(b);
    ScriptedDraws d({0.6});
    auto r = contextual_anchoring(record("x"), b, d, DropoutProbs{}, t);
    EXPECT_FALSE(r.failure);
    EXPECT_FALSE(r.record.context.preceding);
    EXPECT_EQ(r.record.context.succeeding, "after it");
  }
  {
    FunctionBackend b;
    script_context(b);
    ScriptedDraws d({0.1});
    auto r = contextual_anchoring(record("x"), b, d, DropoutProbs{}, t);
    EXPECT_EQ(r.record.context.preceding, "before it");
    EXPECT_EQ(r.record.context.succeeding, "after it");
  }
  {
    FunctionBackend b;
    script_context(b);
    ScriptedDraws d({0.9});
    auto r = contextual_anchoring(record("x"), b, d, DropoutProbs{}, t);
    EXPECT_EQ(r.record.context.preceding, "before it");
    EXPECT_FALSE(r.record.context.succeeding);
    EXPECT_FALSE(r.record.context.core.empty());
  }
}

TEST(Dropout, BackendFailureLeavesNoContext) {
  FunctionBackend b;
  b.on(StageTag::kContextualize,
       [](const GenerationRequest&) { return GenerationResponse::failure(FailureKind::kTransport); });
  NoiseStream n(1, {});
  auto r = contextual_anchoring(record("x"), b, n, DropoutProbs{}, PromptTemplates::defaults());
  EXPECT_EQ(r.failure, FailureKind::kTransport);
  EXPECT_FALSE(r.record.context.preceding);
  EXPECT_FALSE(r.record.context.succeeding);
  EXPECT_TRUE(r.record.valid);
}

TEST(Dropout, FrequenciesMonteCarlo) {
  std::array<int, 3> counts{};
  for (std::uint64_t i = 0; i < 10000; ++i) {
    NoiseStream n(77, {1, i, NoisePurpose::kDropout});
    ++counts[static_cast<int>(draw_dropout(n, DropoutProbs{}))];
  }
  EXPECT_NEAR(counts[0] / 1e4, 0.5, 0.02);
  EXPECT_NEAR(counts[1] / 1e4, 0.25, 0.02);
  EXPECT_NEAR(counts[2] / 1e4, 0.25, 0.02);
}

TEST(Dropout, ProbabilitiesValidated) {
  EXPECT_NO_THROW(DropoutProbs{}.validate());
  EXPECT_THROW((DropoutProbs{0.5, 0.5, 0.5}.validate()), std::invalid_argument);
}

TEST(Context, RenderTrainingText) {
  auto r = record("x");
  r.context.core = "core";
  EXPECT_EQ(render_training_text(r), "core");
  r.context.preceding = "pre";
  EXPECT_EQ(render_training_text(r), "pre\n<ctx>\ncore");
  r.context.succeeding = "post";
  EXPECT_EQ(render_training_text(r), "pre\n<ctx>\ncore\n<ctx>\npost");
}

TEST(Quality, ParseRules) {
  EXPECT_EQ(parse_quality("7"), 7);
  EXPECT_EQ(parse_quality("eleven"), std::nullopt);
  EXPECT_EQ(parse_quality("12"), 10);
  EXPECT_EQ(parse_quality("Score: 0"), 1);
}

TEST(Quality, ScoringStage) {
  auto t = PromptTemplates::defaults();
  FunctionBackend b;
  b.reply(StageTag::kScoreQuality, "7");
  EXPECT_EQ(quality_score(record("x"), b, t).record.quality, 7);
  b.reply(StageTag::kScoreQuality, "eleven");
  auto r = quality_score(record("x"), b, t);
  EXPECT_FALSE(r.record.quality);
  EXPECT_TRUE(r.record.valid);
  EXPECT_EQ(r.failure, FailureKind::kMalformed);
  b.reply(StageTag::kScoreQuality, "12");
  EXPECT_EQ(quality_score(record("x"), b, t).record.quality, 10);
}

TEST(TopDecile, QuotaLaw) {
  std::mt19937 rng(5);
  for (std::size_t n = 0; n <= 200; ++n) {
    std::vector<SyntheticRecord> rs;
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<int> q;
      if (rng() % 4) q = static_cast<int>(1 + rng() % 10);
      rs.push_back(record("r" + std::to_string(i), q));
    }
    auto sel = select_top_decile(rs);
    ASSERT_EQ(sel.size(), std::min(n, synthforge::testing::ceil_tenth(n))) << n;
  }
}

TEST(TopDecile, TieBrokenById) {
  std::vector<SyntheticRecord> rs = {record("b", 9), record("a", 9), record("c", 3)};
  auto sel = select_top_decile(rs);
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(sel[0].id, "a");
}

TEST(TopDecile, Examples) {
  std::vector<SyntheticRecord> rs;
  for (int i = 0; i < 20; ++i) rs.push_back(record("r" + std::to_string(100 + i), i % 10 + 1));
  auto sel = select_top_decile(rs);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].quality, 10);
  EXPECT_EQ(sel[1].quality, 10);
  rs.resize(9);
  EXPECT_EQ(select_top_decile(rs).size(), 1u);
  EXPECT_TRUE(select_top_decile(std::vector<SyntheticRecord>{}).empty());
}

TEST(TopDecile, DominanceAndUnscoredLast) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SyntheticRecord> rs;
    std::size_t n = 1 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<int> q;
      if (rng() % 3) q = static_cast<int>(1 + rng() % 10);
      rs.push_back(record("r" + std::to_string(rng() % 1000) + "-" + std::to_string(i), q));
    }
    auto sel = select_top_decile(rs);
    std::set<std::string> chosen;
    int min_selected = 11;
    bool any_unscored_selected = false;
    for (const auto& s : sel) {
      chosen.insert(s.id);
      if (s.quality) min_selected = std::min(min_selected, *s.quality);
      else any_unscored_selected = true;
    }
    std::size_t scored = 0;
    for (const auto& r : rs) {
      if (r.quality) ++scored;
      if (chosen.count(r.id) || !r.quality) continue;
      EXPECT_LE(*r.quality, min_selected);
    }
    if (any_unscored_selected) EXPECT_LT(scored, sel.size());
  }
}

TEST(ThemeChoice, ForcedAndFallback) {
  HarmfulThemesIndex idx;
  idx.upsert("sexism", 1);
  idx.upsert("racism", 1);
  std::vector<std::string> own = {"sexism"};
  for (double u : {0.0, 0.5, 0.99}) {
    ScriptedDraws d({u});
    EXPECT_EQ(choose_target_theme(idx, std::span<const std::string>(own), d), "racism");
  }
  HarmfulThemesIndex single;
  single.upsert("sexism", 1);
  ScriptedDraws d({0.3});
  EXPECT_EQ(choose_target_theme(single, std::span<const std::string>(own), d), "sexism");
  ScriptedDraws e({0.3});
  EXPECT_THROW(choose_target_theme(HarmfulThemesIndex{}, std::span<const std::string>(own), e),
               std::invalid_argument);
}

TEST(ThemeChoice, DeterministicUnderNoise) {
  HarmfulThemesIndex idx;
  for (auto t : {"a", "b", "c", "d", "e"}) idx.upsert(t, 1);
  std::vector<std::string> own = {"a"};
  for (std::uint64_t i = 0; i < 20; ++i) {
    NoiseStream n1(3, {1, i, NoisePurpose::kThemeChoice});
    NoiseStream n2(3, {1, i, NoisePurpose::kThemeChoice});
    EXPECT_EQ(choose_target_theme(idx, std::span<const std::string>(own), n1),
              choose_target_theme(idx, std::span<const std::string>(own), n2));
  }
}

TEST(Refine, ProvenanceAndLabel) {
  FunctionBackend b;
  b.reply(StageTag::kRefineTheme, "  rewritten post  ");
  HarmfulThemesIndex idx;
  idx.upsert("racism", 1);
  auto src = record("syn-1");
  src.attribute_tags = {"sexism"};
  ScriptedDraws d({0.0});
  auto r = thematic_style_refinement(src, idx, b, d, PromptTemplates::defaults(), "syn-1-tsr");
  ASSERT_TRUE(r.record.has_value());
  EXPECT_EQ(r.target_theme, "racism");
  EXPECT_EQ(r.record->id, "syn-1-tsr");
  EXPECT_EQ(r.record->context.core, "rewritten post");
  EXPECT_EQ(r.record->label, LabelClass::kHarmful);
  EXPECT_EQ(r.record->parent_seed_ids, (std::vector<std::string>{"syn-1", "seed-1", "seed-2"}));
  EXPECT_EQ(r.record->attribute_tags, (std::vector<std::string>{"racism"}));
  auto req = b.requests().at(0);
  EXPECT_NE(req.user_text.find("racism"), std::string::npos);
  EXPECT_NE(req.user_text.find(src.context.core), std::string::npos);
}

TEST(Refine, BackendFailureProducesNoRecord) {
  FunctionBackend b;
  b.on(StageTag::kRefineTheme,
       [](const GenerationRequest&) { return GenerationResponse::failure(FailureKind::kRefusal); });
  auto r = refine_to_theme(record("x"), "racism", b, PromptTemplates::defaults(), "x-tsr");
  EXPECT_FALSE(r.record);
  EXPECT_EQ(r.failure, FailureKind::kRefusal);
}

TEST(RecordJson, RoundTrip) {
  auto r = record("syn-r0001-00001", 8);
  r.context.preceding = "p";
  r.indicators.tone = Tone::kIntensify;
  r.indicators.year = 2020;
  r.attribute_tags = {"slur"};
  auto line = to_jsonl_line(r);
  auto back = record_from_json(nlohmann::json::parse(line));
  EXPECT_EQ(back, r);
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["text"], render_training_text(r));
  EXPECT_TRUE(j["succeeding"].is_null());
}
