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

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/attributes.hpp"
#include "synthforge/augment.hpp"
#include "synthforge/backend.hpp"
#include "synthforge/corpus.hpp"
#include "synthforge/promptcraft.hpp"
#include "synthforge/templates.hpp"

namespace synthforge {

struct PipelineConfig {
  std::size_t target_total = 1000;  // stop once this many valid records exist
  std::size_t batch_size = 100;     // candidates requested per round
  std::size_t refine_rounds = 3;    // rounds that feed refined records back into the pool
  std::size_t seed_count = 200;
  std::uint64_t master_seed = 0;
  double p_max = 0.95;
  IndicatorDomains indicators;
  DropoutProbs dropout;
  std::optional<std::size_t> max_rounds;  // defaults to 3 * ceil(target_total / batch_size)
  unsigned parallelism = 1;
  double temperature = 1.0;
  int max_output_tokens = 4096;

  std::size_t effective_max_rounds() const;
  std::size_t min_rounds() const { return (target_total + batch_size - 1) / batch_size; }

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;

  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

/// Candidate failures by kind, indexed by FailureKind (kNone unused).
using FailureCounts = std::array<std::size_t, 5>;

inline std::size_t total(const FailureCounts& c) {
  return c[1] + c[2] + c[3] + c[4];
}

struct RoundStats {
  int round = 0;
  std::size_t requested = 0;
  std::size_t generated_valid = 0;
  FailureCounts failures{};
  std::size_t seed_batch_size = 0;
  std::size_t refined_added = 0;
  std::size_t seed_pool_size = 0;  // at the end of the round

  friend bool operator==(const RoundStats&, const RoundStats&) = default;
};

struct RunReport {
  std::size_t target_total = 0;
  std::size_t batch_size = 0;
  std::size_t refine_rounds = 0;
  std::vector<RoundStats> rounds;
  std::size_t requested = 0;
  std::size_t generated_valid = 0;
  FailureCounts failures{};
  double success_rate = 0.0;
  bool shortfall = false;
  bool backend_exhausted = false;
  std::vector<std::string> warnings;
  std::size_t initial_seed_pool_size = 0;
  std::size_t final_seed_pool_size = 0;
  /// Failures of the auxiliary stages (extraction, context, scoring,
  /// refinement), keyed by stage name.
  std::map<std::string, FailureCounts> stage_failures;
  HarmfulThemesIndex themes;
  std::chrono::milliseconds elapsed{0};

  /// Everything except elapsed, so equal runs serialize to equal bytes.
  nlohmann::ordered_json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

struct AugmentedDataset {
  Corpus original;
  std::vector<SyntheticRecord> synthetic;  // valid records only
  std::vector<SyntheticRecord> refined;    // records appended to the seed pool

  /// D' as examples: every original followed by every synthetic record.
  std::vector<Example> combined() const;
  /// Training view of D': original train examples (all of them when the
  /// corpus has no split) plus every synthetic record.
  std::vector<Example> combined_train() const;
};

struct RunResult {
  AugmentedDataset dataset;
  RunReport report;
};

/// Example view of a synthetic record (split=train, source "synthetic").
Example as_example(const SyntheticRecord& record);

/// Harmful examples eligible as seeds: the train split when the corpus has
/// been split, otherwise every harmful example.
std::vector<Example> seed_candidates(const Corpus& corpus);

/// n distinct harmful examples drawn uniformly under master_seed. Throws
/// std::invalid_argument with both counts when fewer than n are available.
std::vector<Example> select_seed_data(const Corpus& corpus, std::size_t n,
                                      std::uint64_t master_seed);

/// Parses "1. text" / "2) text" lines; continuation lines are appended to
/// the previous item. Returns item number -> text (first occurrence wins).
std::map<std::size_t, std::string> parse_numbered_list(std::string_view text);

/// Same checks a candidate passes to be counted valid.
std::optional<FailureKind> validate_candidate(std::string_view text,
                                              const RefusalDetector& refusals);

struct SynthesisOptions {
  PromptTemplates templates = PromptTemplates::defaults();
  RefusalDetector refusals;
};

/// The full loop. Each round: extract and gate attributes for new pool
/// members, sample a seed batch and indicators, request batch_size
/// candidates, anchor context and score each valid one, select the top
/// decile, and (in the first refine_rounds rounds) refine the selection
/// onto new themes and append it to the pool. Stops at target_total valid
/// records or max rounds.
RunResult run_synthesis(const PipelineConfig& config, const Corpus& corpus, Backend& backend,
                        const SynthesisOptions& options = {});

/// Writes synthetic.jsonl, refined.jsonl, augmented_train.jsonl,
/// report.json and themes.jsonl into out_dir (created if needed).
void emit(const AugmentedDataset& dataset, const RunReport& report,
          const std::filesystem::path& out_dir);

}  // namespace synthforge
