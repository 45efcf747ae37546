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

#include <filesystem>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace synthforge {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text with named {placeholders}. Braces that do not name a supplied value
/// are left alone, so JSON examples inside a template survive rendering.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, std::string text)
      : name_(std::move(name)), text_(std::move(text)) {}

  static PromptTemplate load(const std::filesystem::path& path, std::string name = {});

  const std::string& name() const noexcept { return name_; }
  const std::string& text() const noexcept { return text_; }

  bool has(std::string_view placeholder) const;

  /// Throws TemplateError naming the first placeholder that is absent.
  void require(std::initializer_list<std::string_view> placeholders) const;

  std::string render(const std::map<std::string, std::string, std::less<>>& values) const;

 private:
  std::string name_;
  std::string text_;
};

/// All prompts the pipeline issues, plus the shared system text.
struct PromptTemplates {
  std::string system_text;
  std::string instruction;
  PromptTemplate synthesize;
  PromptTemplate extract_attributes;
  PromptTemplate contextualize;
  PromptTemplate score_quality;
  PromptTemplate refine_theme;

  static PromptTemplates defaults();

  /// Overrides any template whose file exists in dir (synthesize.txt,
  /// extract_attributes.txt, ...), leaving the others at their defaults.
  static PromptTemplates from_directory(const std::filesystem::path& dir);

  void validate() const;
};

}  // namespace synthforge
