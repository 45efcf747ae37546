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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "synthforge/backend.hpp"
#include "synthforge/corpus.hpp"
#include "synthforge/noise.hpp"
#include "synthforge/templates.hpp"

namespace synthforge {

struct Attribute {
  std::string tag;          // normalized lowercase
  double confidence = 0.0;  // clamped to [0, 1]
  std::string source_example_id;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct ExtractionResult {
  std::vector<Attribute> attributes;
  std::optional<FailureKind> failure;
};

/// Lowercases, trims and collapses inner whitespace.
std::string normalize_tag(std::string_view tag);

/// Parses the first JSON array of {"tag", "confidence"} objects found in
/// text. Entries without a usable tag are skipped; confidences are clamped.
/// nullopt when no such array is present.
std::optional<std::vector<Attribute>> parse_attribute_list(std::string_view text,
                                                           const std::string& source_id);

/// Asks the backend for harm attributes of a harmful example. Backend or
/// parse failures yield an empty list with the failure kind set. Throws
/// std::invalid_argument if the example is not harmful.
ExtractionResult extract_attributes(const Example& example, Backend& backend,
                                    const PromptTemplates& templates,
                                    double temperature = 1.0, int max_output_tokens = 512);

/// Retained iff draw < min(confidence, p_max). Throws std::invalid_argument
/// unless 0 < p_max < 1.
bool gate_attribute(const Attribute& attribute, double draw, double p_max);

/// One independent draw per attribute, in order.
template <UniformDrawSource Source>
std::vector<Attribute> gate_attributes(std::span<const Attribute> attributes, Source& noise,
                                       double p_max) {
  std::vector<Attribute> kept;
  for (const auto& a : attributes) {
    if (gate_attribute(a, noise.uniform(), p_max)) kept.push_back(a);
  }
  return kept;
}

/// Run-scoped catalog of harm themes with usage counts.
class HarmfulThemesIndex {
 public:
  struct Entry {
    std::size_t count = 0;
    int first_seen_round = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  void upsert(std::string_view theme, int round);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(std::string_view theme) const;
  std::optional<Entry> find(std::string_view theme) const;
  const std::map<std::string, Entry, std::less<>>& entries() const noexcept { return entries_; }

  /// Themes in lexicographic order.
  std::vector<std::string> themes() const;

  std::string to_jsonl() const;
  void write_jsonl(const std::filesystem::path& path) const;
  static HarmfulThemesIndex from_jsonl(std::string_view text);
  static HarmfulThemesIndex read_jsonl(const std::filesystem::path& path);

  friend bool operator==(const HarmfulThemesIndex&, const HarmfulThemesIndex&) = default;

 private:
  std::map<std::string, Entry, std::less<>> entries_;
};

HarmfulThemesIndex update_theme_index(HarmfulThemesIndex index, std::span<const Attribute> retained,
                                      int round);

}  // namespace synthforge
