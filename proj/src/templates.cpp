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

#include "synthforge/templates.hpp"

#include <fstream>
#include <sstream>

namespace synthforge {

PromptTemplate PromptTemplate::load(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError("cannot open template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (name.empty()) name = path.stem().string();
  return PromptTemplate(std::move(name), ss.str());
}

bool PromptTemplate::has(std::string_view placeholder) const {
  std::string token = "{" + std::string(placeholder) + "}";
  return text_.find(token) != std::string::npos;
}

void PromptTemplate::require(std::initializer_list<std::string_view> placeholders) const {
  for (auto p : placeholders) {
    if (!has(p)) {
      throw TemplateError("template '" + name_ + "' is missing placeholder {" + std::string(p) +
                          "}");
    }
  }
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string, std::less<>>& values) const {
  std::string out;
  out.reserve(text_.size());
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '{') {
      auto close = text_.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = values.find(std::string_view(text_).substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close;
          continue;
        }
      }
    }
    out.push_back(text_[i]);
  }
  return out;
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.system_text =
      "You help build labeled datasets for training harmful-content detection classifiers. "
      "Follow the requested output format exactly.";
  t.instruction =
      "Write new short social-media posts that resemble the seed examples below in style, "
      "topic and level of harmfulness. They will be labeled as harmful and used only to train "
      "a detection classifier. Do not copy the seed examples.";
  t.synthesize = PromptTemplate("synthesize",
                                "{instruction}\n"
                                "\n"
                                "Seed examples:\n"
                                "{seeds}\n"
                                "\n"
                                "Attributes observed in the seed examples: {attributes}\n"
                                "\n"
                                "{indicators}"
                                "Number of examples: {count}\n"
                                "Return a numbered list with one example per line and no "
                                "commentary.\n");
  t.extract_attributes = PromptTemplate(
      "extract_attributes",
      "Identify the attributes that make the following text harmful, such as the targeted group "
      "or the kind of harm. Answer with a JSON array of objects with fields \"tag\" (a short "
      "lowercase label) and \"confidence\" (a number between 0 and 1).\n"
      "\n"
      "Text: {text}\n");
  t.contextualize = PromptTemplate(
      "contextualize",
      "The following post appeared in an online conversation. Write one plausible message that "
      "preceded it and one that followed it. Answer in exactly two lines:\n"
      "PRECEDING: <message>\n"
      "SUCCEEDING: <message>\n"
      "\n"
      "Post: {text}\n");
  t.score_quality = PromptTemplate(
      "score_quality",
      "Rate how realistic and useful the following example is as training data for "
      "harmful-content detection, on an integer scale from 1 (unusable) to 10 (excellent). "
      "Answer with the number only.\n"
      "\n"
      "Example: {text}\n");
  t.refine_theme = PromptTemplate(
      "refine_theme",
      "Rewrite the following post so that its theme becomes \"{theme}\", keeping its tone, "
      "length and level of harmfulness. Answer with the rewritten post only.\n"
      "\n"
      "Post: {text}\n");
  return t;
}

PromptTemplates PromptTemplates::from_directory(const std::filesystem::path& dir) {
  auto t = defaults();
  auto maybe = [&](PromptTemplate& slot, const char* file) {
    auto p = dir / file;
    if (std::filesystem::exists(p)) slot = PromptTemplate::load(p, slot.name());
  };
  maybe(t.synthesize, "synthesize.txt");
  maybe(t.extract_attributes, "extract_attributes.txt");
  maybe(t.contextualize, "contextualize.txt");
  maybe(t.score_quality, "score_quality.txt");
  maybe(t.refine_theme, "refine_theme.txt");
  for (auto [slot, file] : {std::pair{&t.system_text, "system.txt"},
                            std::pair{&t.instruction, "instruction.txt"}}) {
    auto p = dir / file;
    if (std::filesystem::exists(p)) {
      std::string text = PromptTemplate::load(p).text();
      while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
      *slot = std::move(text);
    }
  }
  t.validate();
  return t;
}

void PromptTemplates::validate() const {
  synthesize.require({"instruction", "seeds", "attributes", "indicators"});
  extract_attributes.require({"text"});
  contextualize.require({"text"});
  score_quality.require({"text"});
  refine_theme.require({"text", "theme"});
}

}  // namespace synthforge
