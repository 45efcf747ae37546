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

#include "synthforge/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace synthforge {

using json = nlohmann::json;

std::string normalize_tag(std::string_view tag) {
  std::string out;
  bool pending_space = false;
  for (char ch : tag) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::optional<std::vector<Attribute>> parse_attribute_list(std::string_view text,
                                                           const std::string& source_id) {
  // Try every '[' until one starts a parseable array; models like to wrap
  // the JSON in prose or code fences.
  for (auto open = text.find('['); open != std::string_view::npos;
       open = text.find('[', open + 1)) {
    auto close = text.rfind(']');
    if (close == std::string_view::npos || close < open) return std::nullopt;
    json arr;
    bool parsed = false;
    for (auto end = close; end != std::string_view::npos && end > open;
         end = text.rfind(']', end - 1)) {
      arr = json::parse(text.substr(open, end - open + 1), nullptr, false);
      if (!arr.is_discarded() && arr.is_array()) {
        parsed = true;
        break;
      }
      if (end == 0) break;
    }
    if (!parsed) continue;

    std::vector<Attribute> out;
    for (const auto& item : arr) {
      if (!item.is_object() || !item.contains("tag") || !item.at("tag").is_string()) continue;
      Attribute a;
      a.tag = normalize_tag(item.at("tag").get<std::string>());
      if (a.tag.empty()) continue;
      double conf = 0.0;
      if (item.contains("confidence") && item.at("confidence").is_number()) {
        conf = item.at("confidence").get<double>();
      }
      a.confidence = std::clamp(conf, 0.0, 1.0);
      a.source_example_id = source_id;
      out.push_back(std::move(a));
    }
    return out;
  }
  return std::nullopt;
}

ExtractionResult extract_attributes(const Example& example, Backend& backend,
                                    const PromptTemplates& templates, double temperature,
                                    int max_output_tokens) {
  if (example.label != LabelClass::kHarmful) {
    throw std::invalid_argument("attribute extraction needs a harmful example: " + example.id);
  }
  GenerationRequest req;
  req.system_text = templates.system_text;
  req.user_text = templates.extract_attributes.render({{"text", example.text}});
  req.temperature = temperature;
  req.max_output_tokens = max_output_tokens;
  req.tag = StageTag::kExtractAttributes;

  auto res = backend.generate(req);
  if (!res.ok) return {{}, res.failure_kind};
  auto parsed = parse_attribute_list(res.text, example.id);
  if (!parsed) return {{}, FailureKind::kMalformed};
  return {std::move(*parsed), std::nullopt};
}

bool gate_attribute(const Attribute& attribute, double draw, double p_max) {
  if (!(p_max > 0.0 && p_max < 1.0)) throw std::invalid_argument("p_max must be in (0, 1)");
  return draw < std::min(attribute.confidence, p_max);
}

void HarmfulThemesIndex::upsert(std::string_view theme, int round) {
  auto key = normalize_tag(theme);
  if (key.empty()) return;
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_.emplace(std::move(key), Entry{1, round});
  } else {
    ++it->second.count;
  }
}

bool HarmfulThemesIndex::contains(std::string_view theme) const {
  return entries_.find(normalize_tag(theme)) != entries_.end();
}

std::optional<HarmfulThemesIndex::Entry> HarmfulThemesIndex::find(std::string_view theme) const {
  auto it = entries_.find(normalize_tag(theme));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> HarmfulThemesIndex::themes() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

std::string HarmfulThemesIndex::to_jsonl() const {
  std::string out;
  for (const auto& [theme, e] : entries_) {
    nlohmann::ordered_json j;
    j["theme"] = theme;
    j["count"] = e.count;
    j["first_seen_round"] = e.first_seen_round;
    out += j.dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

void HarmfulThemesIndex::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_jsonl();
}

HarmfulThemesIndex HarmfulThemesIndex::from_jsonl(std::string_view text) {
  HarmfulThemesIndex index;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      auto theme = normalize_tag(j.at("theme").get<std::string>());
      auto count = j.at("count").get<std::size_t>();
      if (theme.empty() || count == 0) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": theme must be non-empty with a positive count");
      }
      index.entries_[theme] = Entry{count, j.at("first_seen_round").get<int>()};
    } catch (const json::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return index;
}

HarmfulThemesIndex HarmfulThemesIndex::read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

HarmfulThemesIndex update_theme_index(HarmfulThemesIndex index, std::span<const Attribute> retained,
                                      int round) {
  for (const auto& a : retained) index.upsert(a.tag, round);
  return index;
}

}  // namespace synthforge
