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

#include "synthforge/augment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace synthforge {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

ordered_json optional_string(const std::optional<std::string>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string render_training_text(const SyntheticRecord& record) {
  std::string sep = "\n" + std::string(kContextSeparator) + "\n";
  std::string out;
  if (record.context.preceding) out += *record.context.preceding + sep;
  out += record.context.core;
  if (record.context.succeeding) out += sep + *record.context.succeeding;
  return out;
}

ordered_json to_json(const SyntheticRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["text"] = render_training_text(r);
  j["label"] = static_cast<int>(r.label);
  j["core"] = r.context.core;
  j["preceding"] = optional_string(r.context.preceding);
  j["succeeding"] = optional_string(r.context.succeeding);
  j["quality"] = r.quality ? ordered_json(*r.quality) : ordered_json(nullptr);
  j["round"] = r.round;
  j["valid"] = r.valid;
  ordered_json ind;
  ind["tone"] = r.indicators.tone ? ordered_json(to_string(*r.indicators.tone)) : ordered_json(nullptr);
  ind["swear"] = r.indicators.swear ? ordered_json(to_string(*r.indicators.swear)) : ordered_json(nullptr);
  ind["irony"] = r.indicators.irony ? ordered_json(to_string(*r.indicators.irony)) : ordered_json(nullptr);
  ind["country"] = optional_string(r.indicators.country);
  ind["year"] = r.indicators.year ? ordered_json(*r.indicators.year) : ordered_json(nullptr);
  j["indicators"] = std::move(ind);
  j["attribute_tags"] = r.attribute_tags;
  j["parent_seed_ids"] = r.parent_seed_ids;
  return j;
}

SyntheticRecord record_from_json(const json& j) {
  auto opt_str = [](const json& v) -> std::optional<std::string> {
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
  };
  SyntheticRecord r;
  r.id = j.at("id").get<std::string>();
  r.label = static_cast<LabelClass>(j.at("label").get<int>());
  r.context.core = j.at("core").get<std::string>();
  r.context.preceding = opt_str(j.at("preceding"));
  r.context.succeeding = opt_str(j.at("succeeding"));
  if (!j.at("quality").is_null()) r.quality = j.at("quality").get<int>();
  r.round = j.at("round").get<int>();
  r.valid = j.at("valid").get<bool>();
  const auto& ind = j.at("indicators");
  if (auto s = opt_str(ind.at("tone"))) r.indicators.tone = parse_tone(*s);
  if (auto s = opt_str(ind.at("swear"))) r.indicators.swear = parse_swear(*s);
  if (auto s = opt_str(ind.at("irony"))) r.indicators.irony = parse_irony(*s);
  r.indicators.country = opt_str(ind.at("country"));
  if (!ind.at("year").is_null()) r.indicators.year = ind.at("year").get<int>();
  r.attribute_tags = j.at("attribute_tags").get<std::vector<std::string>>();
  r.parent_seed_ids = j.at("parent_seed_ids").get<std::vector<std::string>>();
  return r;
}

std::string to_jsonl_line(const SyntheticRecord& record) {
  return to_json(record).dump(-1, ' ', false, json::error_handler_t::replace);
}

void DropoutProbs::validate() const {
  for (double p : {keep_both, drop_preceding, drop_succeeding}) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("dropout probabilities must be in [0, 1]");
  }
  if (std::abs(keep_both + drop_preceding + drop_succeeding - 1.0) > 1e-9) {
    throw std::invalid_argument("dropout probabilities must sum to 1");
  }
}

std::optional<std::pair<std::string, std::string>> parse_context_reply(std::string_view text) {
  std::optional<std::string> pre;
  std::optional<std::string> post;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(start, end - start));
    if (starts_with_ci(line, "preceding:") && !pre) {
      pre = trim(std::string_view(line).substr(10));
    } else if (starts_with_ci(line, "succeeding:") && !post) {
      post = trim(std::string_view(line).substr(11));
    }
    start = end + 1;
  }
  if (!pre || !post || pre->empty() || post->empty()) return std::nullopt;
  return std::pair{std::move(*pre), std::move(*post)};
}

StageResult request_context(SyntheticRecord record, Backend& backend,
                            const PromptTemplates& templates) {
  GenerationRequest req;
  req.system_text = templates.system_text;
  req.user_text = templates.contextualize.render({{"text", record.context.core}});
  req.tag = StageTag::kContextualize;
  auto res = backend.generate(req);
  record.context.preceding.reset();
  record.context.succeeding.reset();
  if (!res.ok) return {std::move(record), res.failure_kind};
  auto parsed = parse_context_reply(res.text);
  if (!parsed) return {std::move(record), FailureKind::kMalformed};
  record.context.preceding = std::move(parsed->first);
  record.context.succeeding = std::move(parsed->second);
  return {std::move(record), std::nullopt};
}

std::optional<int> parse_quality(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    bool negative = i > 0 && text[i - 1] == '-';
    long long value = 0;
    auto [p, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec == std::errc::result_out_of_range) value = 10;  // absurdly large, clamp high
    if (negative) value = -value;
    return static_cast<int>(std::clamp<long long>(value, 1, 10));
  }
  return std::nullopt;
}

StageResult quality_score(SyntheticRecord record, Backend& backend,
                          const PromptTemplates& templates) {
  if (!record.valid) throw std::invalid_argument("quality_score needs a valid record");
  GenerationRequest req;
  req.system_text = templates.system_text;
  req.user_text = templates.score_quality.render({{"text", render_training_text(record)}});
  req.tag = StageTag::kScoreQuality;
  req.max_output_tokens = 8;
  auto res = backend.generate(req);
  record.quality.reset();
  if (!res.ok) return {std::move(record), res.failure_kind};
  record.quality = parse_quality(res.text);
  if (!record.quality) return {std::move(record), FailureKind::kMalformed};
  return {std::move(record), std::nullopt};
}

std::vector<SyntheticRecord> select_top_decile(std::span<const SyntheticRecord> records) {
  std::vector<const SyntheticRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const SyntheticRecord* a, const SyntheticRecord* b) {
    if (a->quality.has_value() != b->quality.has_value()) return a->quality.has_value();
    if (a->quality && *a->quality != *b->quality) return *a->quality > *b->quality;
    return a->id < b->id;
  });
  std::vector<SyntheticRecord> out;
  auto quota = top_decile_quota(records.size());
  for (std::size_t i = 0; i < quota; ++i) out.push_back(*order[i]);
  return out;
}

RefineResult refine_to_theme(const SyntheticRecord& record, const std::string& target_theme,
                             Backend& backend, const PromptTemplates& templates,
                             std::string new_id) {
  RefineResult result;
  result.target_theme = target_theme;
  GenerationRequest req;
  req.system_text = templates.system_text;
  req.user_text =
      templates.refine_theme.render({{"text", record.context.core}, {"theme", target_theme}});
  req.tag = StageTag::kRefineTheme;
  auto res = backend.generate(req);
  if (!res.ok) {
    result.failure = res.failure_kind;
    return result;
  }
  auto core = trim(res.text);
  if (core.empty()) {
    result.failure = FailureKind::kMalformed;
    return result;
  }
  SyntheticRecord out;
  out.id = std::move(new_id);
  out.context.core = std::move(core);
  out.label = LabelClass::kHarmful;
  out.indicators = record.indicators;
  out.attribute_tags = {target_theme};
  out.round = record.round;
  out.valid = true;
  out.parent_seed_ids.push_back(record.id);
  for (const auto& p : record.parent_seed_ids) out.parent_seed_ids.push_back(p);
  result.record = std::move(out);
  return result;
}

}  // namespace synthforge
