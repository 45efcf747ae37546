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

#include "synthforge/promptcraft.hpp"

#include <algorithm>

namespace synthforge {

std::string_view to_string(Tone v) { return v == Tone::kIntensify ? "intensify" : "weaken"; }
std::string_view to_string(Swear v) { return v == Swear::kIncrease ? "increase" : "avoid"; }
std::string_view to_string(Irony v) { return v == Irony::kUse ? "use" : "avoid"; }

std::optional<Tone> parse_tone(std::string_view s) {
  if (s == "intensify") return Tone::kIntensify;
  if (s == "weaken") return Tone::kWeaken;
  return std::nullopt;
}

std::optional<Swear> parse_swear(std::string_view s) {
  if (s == "increase") return Swear::kIncrease;
  if (s == "avoid") return Swear::kAvoid;
  return std::nullopt;
}

std::optional<Irony> parse_irony(std::string_view s) {
  if (s == "use") return Irony::kUse;
  if (s == "avoid") return Irony::kAvoid;
  return std::nullopt;
}

std::vector<std::string> indicator_clauses(const IndicatorSet& set) {
  std::vector<std::string> out;
  if (set.tone) {
    out.emplace_back(*set.tone == Tone::kIntensify
                         ? "Make the tone more intense than in the seed examples."
                         : "Make the tone milder than in the seed examples.");
  }
  if (set.swear) {
    out.emplace_back(*set.swear == Swear::kIncrease ? "Use more swear words."
                                                    : "Avoid swear words.");
  }
  if (set.irony) {
    out.emplace_back(*set.irony == Irony::kUse ? "Use irony." : "Avoid irony.");
  }
  if (set.country) {
    out.push_back("Write as someone posting from " + *set.country + ".");
  }
  if (set.year) {
    out.push_back("Set the posts in the year " + std::to_string(*set.year) + ".");
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

GenerationPrompt assemble_prompt(const SeedBatch& batch, const IndicatorSet& indicators,
                                 const PromptTemplates& templates, std::size_t candidate_count) {
  templates.synthesize.require({"instruction", "seeds", "attributes", "indicators"});
  if (batch.members.empty()) throw std::invalid_argument("seed batch is empty");

  GenerationPrompt prompt;
  prompt.system_text = templates.system_text;
  prompt.indicators = indicators;

  std::string seeds;
  std::vector<std::string> all_tags;
  for (std::size_t i = 0; i < batch.members.size(); ++i) {
    const auto& m = batch.members[i];
    prompt.seed_ids.push_back(m.example.id);
    if (i) seeds.push_back('\n');
    seeds += std::to_string(i + 1) + ". " + m.example.text + " [attributes: " +
             (m.attribute_tags.empty() ? std::string("none") : join(m.attribute_tags, ", ")) +
             "]";
    for (const auto& t : m.attribute_tags) {
      if (std::find(all_tags.begin(), all_tags.end(), t) == all_tags.end()) all_tags.push_back(t);
    }
  }

  std::string clauses;
  for (const auto& c : indicator_clauses(indicators)) clauses += c + "\n";

  prompt.user_text = templates.synthesize.render({
      {"instruction", templates.instruction},
      {"seeds", seeds},
      {"attributes", all_tags.empty() ? std::string("none") : join(all_tags, ", ")},
      {"indicators", clauses},
      {"count", std::to_string(candidate_count)},
  });
  return prompt;
}

}  // namespace synthforge
