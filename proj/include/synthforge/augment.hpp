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

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/attributes.hpp"
#include "synthforge/backend.hpp"
#include "synthforge/corpus.hpp"
#include "synthforge/noise.hpp"
#include "synthforge/promptcraft.hpp"
#include "synthforge/templates.hpp"

namespace synthforge {

struct ContextTriple {
  std::optional<std::string> preceding;
  std::string core;
  std::optional<std::string> succeeding;

  friend bool operator==(const ContextTriple&, const ContextTriple&) = default;
};

struct SyntheticRecord {
  std::string id;
  ContextTriple context;
  LabelClass label = LabelClass::kHarmful;
  std::optional<int> quality;
  IndicatorSet indicators;
  std::vector<std::string> attribute_tags;
  int round = 0;
  bool valid = false;
  std::vector<std::string> parent_seed_ids;

  friend bool operator==(const SyntheticRecord&, const SyntheticRecord&) = default;
};

/// Separator line placed between context sides and the core on export.
inline constexpr std::string_view kContextSeparator = "<ctx>";

/// Preceding, core and succeeding text joined by "\n<ctx>\n"; absent sides
/// are skipped.
std::string render_training_text(const SyntheticRecord& record);

nlohmann::ordered_json to_json(const SyntheticRecord& record);
SyntheticRecord record_from_json(const nlohmann::json& j);
std::string to_jsonl_line(const SyntheticRecord& record);

// ---------------------------------------------------------------------------
// Contextual anchoring

struct DropoutProbs {
  double keep_both = 0.5;
  double drop_preceding = 0.25;
  double drop_succeeding = 0.25;

  void validate() const;
};

enum class DropoutOutcome { kKeepBoth, kDropPreceding, kDropSucceeding };

template <UniformDrawSource Source>
DropoutOutcome draw_dropout(Source& noise, const DropoutProbs& probs) {
  double u = noise.uniform();
  if (u < probs.keep_both) return DropoutOutcome::kKeepBoth;
  if (u < probs.keep_both + probs.drop_preceding) return DropoutOutcome::kDropPreceding;
  return DropoutOutcome::kDropSucceeding;
}

/// Parses "PRECEDING: ..." and "SUCCEEDING: ..." lines (case-insensitive).
std::optional<std::pair<std::string, std::string>> parse_context_reply(std::string_view text);

struct StageResult {
  SyntheticRecord record;
  std::optional<FailureKind> failure;
};

/// Backend call for the two context sides; no dropout applied.
StageResult request_context(SyntheticRecord record, Backend& backend,
                            const PromptTemplates& templates);

inline void apply_dropout(ContextTriple& context, DropoutOutcome outcome) {
  if (outcome == DropoutOutcome::kDropPreceding) context.preceding.reset();
  if (outcome == DropoutOutcome::kDropSucceeding) context.succeeding.reset();
}

/// Generates both context sides, then drops one side or none. On backend or
/// parse failure the record comes back with no context and the failure set.
template <UniformDrawSource Source>
StageResult contextual_anchoring(SyntheticRecord record, Backend& backend, Source& noise,
                                 const DropoutProbs& probs, const PromptTemplates& templates) {
  if (!record.valid) throw std::invalid_argument("contextual_anchoring needs a valid record");
  auto result = request_context(std::move(record), backend, templates);
  if (!result.failure) apply_dropout(result.record.context, draw_dropout(noise, probs));
  return result;
}

// ---------------------------------------------------------------------------
// Quality

/// First integer in the reply, clamped to [1, 10].
std::optional<int> parse_quality(std::string_view text);

StageResult quality_score(SyntheticRecord record, Backend& backend,
                          const PromptTemplates& templates);

/// ceil(n / 10).
constexpr std::size_t top_decile_quota(std::size_t n) noexcept { return (n + 9) / 10; }

/// Highest quality first, unscored last, ties by ascending id.
std::vector<SyntheticRecord> select_top_decile(std::span<const SyntheticRecord> records);

// ---------------------------------------------------------------------------
// Thematic refinement

/// Uniform over index themes not among own_tags; all themes if none differ.
template <UniformDrawSource Source>
std::string choose_target_theme(const HarmfulThemesIndex& index,
                                std::span<const std::string> own_tags, Source& noise) {
  if (index.empty()) throw std::invalid_argument("themes index is empty");
  auto all = index.themes();
  std::vector<std::string> other;
  for (const auto& t : all) {
    bool own = false;
    for (const auto& tag : own_tags) own = own || normalize_tag(tag) == t;
    if (!own) other.push_back(t);
  }
  const auto& pool = other.empty() ? all : other;
  return pool[draw_index(noise, pool.size())];
}

struct RefineResult {
  std::optional<SyntheticRecord> record;
  std::optional<FailureKind> failure;
  std::string target_theme;
};

/// Rewrites the record's core onto target_theme. The new record has id
/// new_id, inherits the harmful label and lists the source record id (then
/// the source's parents) as parents.
RefineResult refine_to_theme(const SyntheticRecord& record, const std::string& target_theme,
                             Backend& backend, const PromptTemplates& templates,
                             std::string new_id);

template <UniformDrawSource Source>
RefineResult thematic_style_refinement(const SyntheticRecord& record,
                                       const HarmfulThemesIndex& index, Backend& backend,
                                       Source& noise, const PromptTemplates& templates,
                                       std::string new_id) {
  auto theme = choose_target_theme(index, std::span<const std::string>(record.attribute_tags),
                                   noise);
  return refine_to_theme(record, theme, backend, templates, std::move(new_id));
}

}  // namespace synthforge
