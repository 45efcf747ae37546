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

#include "synthforge/corpus.hpp"
#include "synthforge/noise.hpp"
#include "synthforge/templates.hpp"

namespace synthforge {

enum class Tone { kIntensify, kWeaken };
enum class Swear { kIncrease, kAvoid };
enum class Irony { kUse, kAvoid };

std::string_view to_string(Tone v);
std::string_view to_string(Swear v);
std::string_view to_string(Irony v);
std::optional<Tone> parse_tone(std::string_view s);
std::optional<Swear> parse_swear(std::string_view s);
std::optional<Irony> parse_irony(std::string_view s);

/// Five prompt controls; an empty optional means the indicator is masked.
struct IndicatorSet {
  std::optional<Tone> tone;
  std::optional<Swear> swear;
  std::optional<Irony> irony;
  std::optional<std::string> country;
  std::optional<int> year;

  bool all_masked() const noexcept {
    return !tone && !swear && !irony && !country && !year;
  }

  friend bool operator==(const IndicatorSet&, const IndicatorSet&) = default;
};

struct IndicatorDomains {
  std::vector<std::string> countries = {"United States", "United Kingdom", "India", "Australia"};
  int year_min = 2015;
  int year_max = 2024;
  double mask_p = 0.5;

  void validate() const {
    if (countries.empty()) throw std::invalid_argument("indicator countries must be non-empty");
    if (year_min > year_max) throw std::invalid_argument("indicator year range is empty");
    if (!(mask_p > 0.0 && mask_p < 1.0)) throw std::invalid_argument("mask_p must be in (0, 1)");
  }
};

/// Draw order per indicator (tone, swear, irony, country, year): one mask
/// draw (masked when below mask_p), then one value draw if unmasked.
template <UniformDrawSource Source>
IndicatorSet sample_indicators(Source& noise, const IndicatorDomains& domains) {
  domains.validate();
  IndicatorSet set;
  auto unmasked = [&] { return !(noise.uniform() < domains.mask_p); };
  if (unmasked()) set.tone = draw_index(noise, 2) == 0 ? Tone::kIntensify : Tone::kWeaken;
  if (unmasked()) set.swear = draw_index(noise, 2) == 0 ? Swear::kIncrease : Swear::kAvoid;
  if (unmasked()) set.irony = draw_index(noise, 2) == 0 ? Irony::kUse : Irony::kAvoid;
  if (unmasked()) set.country = domains.countries[draw_index(noise, domains.countries.size())];
  if (unmasked()) {
    auto span = static_cast<std::size_t>(domains.year_max - domains.year_min + 1);
    set.year = domains.year_min + static_cast<int>(draw_index(noise, span));
  }
  return set;
}

/// One instruction sentence per unmasked indicator, in fixed order.
std::vector<std::string> indicator_clauses(const IndicatorSet& set);

struct SeedMember {
  Example example;
  std::vector<std::string> attribute_tags;
  bool extracted = false;
};

struct SeedBatch {
  std::vector<SeedMember> members;
  int round = 0;
};

/// max(1, ceil(pool / 10)).
constexpr std::size_t seed_batch_size(std::size_t pool_size) noexcept {
  std::size_t n = (pool_size + 9) / 10;
  return n == 0 ? 1 : n;
}

/// Uniform draw without replacement, members kept in draw order.
template <UniformDrawSource Source>
SeedBatch sample_seed_batch(std::span<const SeedMember> pool, Source& noise, int round) {
  if (pool.empty()) throw std::invalid_argument("seed pool is empty");
  SeedBatch batch;
  batch.round = round;
  for (auto i : sample_without_replacement(noise, pool.size(), seed_batch_size(pool.size()))) {
    batch.members.push_back(pool[i]);
  }
  return batch;
}

struct GenerationPrompt {
  std::string system_text;
  std::string user_text;
  IndicatorSet indicators;
  std::vector<std::string> seed_ids;
};

/// Fills the synthesize template. Throws TemplateError if the template
/// lacks {instruction}, {seeds}, {attributes} or {indicators}, and
/// std::invalid_argument for an empty batch.
GenerationPrompt assemble_prompt(const SeedBatch& batch, const IndicatorSet& indicators,
                                 const PromptTemplates& templates, std::size_t candidate_count);

}  // namespace synthforge
