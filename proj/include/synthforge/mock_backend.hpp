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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/backend.hpp"

namespace synthforge {

/// Expands a rule into a numbered list of items, one per requested
/// candidate. The candidate count is read from the request text.
struct MockItems {
  std::string count_pattern = R"(Number of examples:\s*(\d+))";
  std::string item_template;
  double failure_rate = 0.0;
  std::string failure_template = "I'm sorry, but I can't help with that.";
};

/// One scripted rule. A rule matches when its tag (if any) equals the request
/// tag and its substring (if any) occurs in the user text.
struct MockRule {
  std::optional<StageTag> tag;
  std::optional<std::string> contains;
  std::string response;
  double failure_rate = 0.0;
  FailureKind failure_kind = FailureKind::kTransport;
  std::optional<MockItems> items;
};

/// Ordered rule list plus the seed that drives every random placeholder.
///
/// Templates understand these placeholders; any other brace is literal:
///   {words:N}      N words drawn from the vocabulary
///   {int:A-B}      uniform integer in [A, B]
///   {real:A-B}     uniform real in [A, B), two decimals
///   {pick:x|y|z}   one of the listed options
///   {hash}         16 hex digits identifying the request
///   {index}        1-based item number (item templates only)
struct MockScript {
  std::uint64_t seed = 0;
  std::vector<MockRule> rules;
  std::vector<std::string> vocabulary;
  std::vector<std::string> refusal_markers;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
};

/// Deterministic scripted backend: the response is a pure function of
/// (tag, user text, script, seed). First matching rule wins; no match is a
/// malformed failure.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script);

  GenerationResponse generate(const GenerationRequest& request) override;

  std::uint64_t calls() const noexcept { return calls_.load(); }
  const MockScript& script() const noexcept { return script_; }

 private:
  MockScript script_;
  RefusalDetector refusals_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace synthforge
