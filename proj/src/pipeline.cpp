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

#include "synthforge/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "synthforge/noise.hpp"
#include "synthforge/parallel.hpp"

namespace synthforge {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr FailureKind kCountedKinds[] = {FailureKind::kTransport, FailureKind::kRateLimited,
                                         FailureKind::kRefusal, FailureKind::kMalformed};

constexpr StageTag kAuxStages[] = {StageTag::kExtractAttributes, StageTag::kContextualize,
                                   StageTag::kScoreQuality, StageTag::kRefineTheme};

std::size_t slot(FailureKind kind) { return static_cast<std::size_t>(kind); }

ordered_json failures_json(const FailureCounts& c) {
  ordered_json j;
  for (auto k : kCountedKinds) j[std::string(to_string(k))] = c[slot(k)];
  return j;
}

FailureCounts failures_from_json(const json& j) {
  FailureCounts c{};
  for (auto k : kCountedKinds) c[slot(k)] = j.value(std::string(to_string(k)), std::size_t{0});
  return c;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string candidate_id(int round, std::size_t item) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "syn-r%04d-%05zu", round, item);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::size_t PipelineConfig::effective_max_rounds() const {
  return max_rounds.value_or(3 * min_rounds());
}

void PipelineConfig::validate() const {
  if (target_total == 0) throw std::invalid_argument("target_total must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (seed_count == 0) throw std::invalid_argument("seed_count must be positive");
  if (!(p_max > 0.0 && p_max < 1.0)) throw std::invalid_argument("p_max must be in (0, 1)");
  indicators.validate();
  dropout.validate();
  if (max_rounds && *max_rounds < min_rounds()) {
    throw std::invalid_argument("max_rounds must be at least ceil(target_total / batch_size) = " +
                                std::to_string(min_rounds()));
  }
  if (parallelism == 0) throw std::invalid_argument("parallelism must be positive");
  if (temperature < 0.0 || temperature > 2.0) {
    throw std::invalid_argument("temperature must be in [0, 2]");
  }
  if (max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  c.target_total = j.value("target_total", c.target_total);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.refine_rounds = j.value("refine_rounds", c.refine_rounds);
  c.seed_count = j.value("seed_count", c.seed_count);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.p_max = j.value("p_max", c.p_max);
  c.indicators.mask_p = j.value("mask_p", c.indicators.mask_p);
  if (j.contains("indicators")) {
    const auto& ind = j.at("indicators");
    c.indicators.countries = ind.value("countries", c.indicators.countries);
    c.indicators.year_min = ind.value("year_min", c.indicators.year_min);
    c.indicators.year_max = ind.value("year_max", c.indicators.year_max);
  }
  if (j.contains("dropout")) {
    const auto& d = j.at("dropout");
    c.dropout.keep_both = d.value("keep_both", c.dropout.keep_both);
    c.dropout.drop_preceding = d.value("drop_preceding", c.dropout.drop_preceding);
    c.dropout.drop_succeeding = d.value("drop_succeeding", c.dropout.drop_succeeding);
  }
  if (j.contains("max_rounds") && !j.at("max_rounds").is_null()) {
    c.max_rounds = j.at("max_rounds").get<std::size_t>();
  }
  c.parallelism = j.value("parallelism", c.parallelism);
  c.temperature = j.value("temperature", c.temperature);
  c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
  return c;
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["target_total"] = target_total;
  j["batch_size"] = batch_size;
  j["refine_rounds"] = refine_rounds;
  j["seed_count"] = seed_count;
  j["master_seed"] = master_seed;
  j["p_max"] = p_max;
  j["mask_p"] = indicators.mask_p;
  j["indicators"] = {{"countries", indicators.countries},
                     {"year_min", indicators.year_min},
                     {"year_max", indicators.year_max}};
  j["dropout"] = {{"keep_both", dropout.keep_both},
                  {"drop_preceding", dropout.drop_preceding},
                  {"drop_succeeding", dropout.drop_succeeding}};
  j["max_rounds"] = effective_max_rounds();
  j["parallelism"] = parallelism;
  j["temperature"] = temperature;
  j["max_output_tokens"] = max_output_tokens;
  return j;
}

// ---------------------------------------------------------------------------
// Report

ordered_json RunReport::to_json() const {
  ordered_json j;
  j["target_total"] = target_total;
  j["batch_size"] = batch_size;
  j["refine_rounds"] = refine_rounds;
  j["requested"] = requested;
  j["generated_valid"] = generated_valid;
  j["failures"] = failures_json(failures);
  j["success_rate"] = success_rate;
  j["shortfall"] = shortfall;
  j["backend_exhausted"] = backend_exhausted;
  j["warnings"] = warnings;
  j["initial_seed_pool_size"] = initial_seed_pool_size;
  j["final_seed_pool_size"] = final_seed_pool_size;
  ordered_json rs = ordered_json::array();
  for (const auto& r : rounds) {
    ordered_json o;
    o["round"] = r.round;
    o["requested"] = r.requested;
    o["generated_valid"] = r.generated_valid;
    o["failures"] = failures_json(r.failures);
    o["seed_batch_size"] = r.seed_batch_size;
    o["refined_added"] = r.refined_added;
    o["seed_pool_size"] = r.seed_pool_size;
    rs.push_back(std::move(o));
  }
  j["rounds"] = std::move(rs);
  ordered_json sf;
  for (const auto& [stage, counts] : stage_failures) sf[stage] = failures_json(counts);
  j["stage_failures"] = std::move(sf);
  ordered_json th = ordered_json::array();
  for (const auto& [theme, e] : themes.entries()) {
    th.push_back({{"theme", theme}, {"count", e.count}, {"first_seen_round", e.first_seen_round}});
  }
  j["themes"] = std::move(th);
  return j;
}

RunReport RunReport::from_json(const json& j) {
  RunReport r;
  r.target_total = j.at("target_total").get<std::size_t>();
  r.batch_size = j.at("batch_size").get<std::size_t>();
  r.refine_rounds = j.at("refine_rounds").get<std::size_t>();
  r.requested = j.at("requested").get<std::size_t>();
  r.generated_valid = j.at("generated_valid").get<std::size_t>();
  r.failures = failures_from_json(j.at("failures"));
  r.success_rate = j.at("success_rate").get<double>();
  r.shortfall = j.at("shortfall").get<bool>();
  r.backend_exhausted = j.value("backend_exhausted", false);
  r.warnings = j.value("warnings", std::vector<std::string>{});
  r.initial_seed_pool_size = j.value("initial_seed_pool_size", std::size_t{0});
  r.final_seed_pool_size = j.value("final_seed_pool_size", std::size_t{0});
  for (const auto& o : j.at("rounds")) {
    RoundStats s;
    s.round = o.at("round").get<int>();
    s.requested = o.at("requested").get<std::size_t>();
    s.generated_valid = o.at("generated_valid").get<std::size_t>();
    s.failures = failures_from_json(o.at("failures"));
    s.seed_batch_size = o.value("seed_batch_size", std::size_t{0});
    s.refined_added = o.value("refined_added", std::size_t{0});
    s.seed_pool_size = o.value("seed_pool_size", std::size_t{0});
    r.rounds.push_back(s);
  }
  if (j.contains("stage_failures")) {
    for (const auto& [stage, counts] : j.at("stage_failures").items()) {
      r.stage_failures[stage] = failures_from_json(counts);
    }
  }
  if (j.contains("themes")) {
    std::string lines;
    for (const auto& t : j.at("themes")) lines += t.dump() + "\n";
    r.themes = HarmfulThemesIndex::from_jsonl(lines);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dataset views

Example as_example(const SyntheticRecord& record) {
  return Example{record.id, render_training_text(record), record.label, "synthetic", Split::kTrain};
}

std::vector<Example> AugmentedDataset::combined() const {
  std::vector<Example> out = original.examples();
  for (const auto& r : synthetic) out.push_back(as_example(r));
  return out;
}

std::vector<Example> AugmentedDataset::combined_train() const {
  bool has_split = std::any_of(original.examples().begin(), original.examples().end(),
                               [](const Example& e) { return e.split != Split::kUnassigned; });
  std::vector<Example> out;
  for (const auto& e : original.examples()) {
    if (!has_split || e.split == Split::kTrain) out.push_back(e);
  }
  for (const auto& r : synthetic) out.push_back(as_example(r));
  return out;
}

// ---------------------------------------------------------------------------
// Seeds and candidates

std::vector<Example> seed_candidates(const Corpus& corpus) {
  bool has_split = std::any_of(corpus.examples().begin(), corpus.examples().end(),
                               [](const Example& e) { return e.split != Split::kUnassigned; });
  std::vector<Example> out;
  for (const auto& e : corpus.examples()) {
    if (e.label != LabelClass::kHarmful) continue;
    if (has_split && e.split != Split::kTrain) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<Example> select_seed_data(const Corpus& corpus, std::size_t n,
                                      std::uint64_t master_seed) {
  auto harmful = seed_candidates(corpus);
  if (harmful.size() < n) {
    throw std::invalid_argument("need " + std::to_string(n) + " harmful seed examples but only " +
                                std::to_string(harmful.size()) + " are available");
  }
  NoiseStream noise(master_seed, {0, 0, NoisePurpose::kSeedSelection});
  std::vector<Example> out;
  out.reserve(n);
  for (auto i : sample_without_replacement(noise, harmful.size(), n)) out.push_back(harmful[i]);
  return out;
}

std::map<std::size_t, std::string> parse_numbered_list(std::string_view text) {
  std::map<std::size_t, std::string> items;
  std::optional<std::size_t> current;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line = trim(text.substr(start, end - start));
    start = end + 1;

    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) {
      ++digits;
    }
    if (digits > 0 && digits < 10 && digits < line.size() &&
        (line[digits] == '.' || line[digits] == ')')) {
      std::size_t number = std::stoul(line.substr(0, digits));
      if (items.contains(number)) {
        current.reset();  // duplicate numbering; ignore this item and its continuation
      } else {
        items[number] = trim(std::string_view(line).substr(digits + 1));
        current = number;
      }
      continue;
    }
    if (current && !line.empty()) {
      auto& item = items[*current];
      if (!item.empty()) item.push_back(' ');
      item += line;
    }
  }
  return items;
}

std::optional<FailureKind> validate_candidate(std::string_view text,
                                              const RefusalDetector& refusals) {
  if (trim(text).empty()) return FailureKind::kMalformed;
  if (refusals.is_refusal(text)) return FailureKind::kRefusal;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// The loop

RunResult run_synthesis(const PipelineConfig& config, const Corpus& corpus, Backend& backend,
                        const SynthesisOptions& options) {
  config.validate();
  const auto& templates = options.templates;
  templates.validate();
  const auto started = std::chrono::steady_clock::now();

  RunResult result;
  result.dataset.original = corpus;
  auto& report = result.report;
  report.target_total = config.target_total;
  report.batch_size = config.batch_size;
  report.refine_rounds = config.refine_rounds;
  for (auto stage : kAuxStages) report.stage_failures[std::string(to_string(stage))] = {};
  auto note = [&](StageTag stage, FailureKind kind) {
    ++report.stage_failures[std::string(to_string(stage))][slot(kind)];
  };

  std::vector<SeedMember> pool;
  for (auto& e : select_seed_data(corpus, config.seed_count, config.master_seed)) {
    pool.push_back({std::move(e), {}, false});
  }
  report.initial_seed_pool_size = pool.size();

  HarmfulThemesIndex index;
  const unsigned threads = config.parallelism;
  const std::size_t max_rounds = config.effective_max_rounds();
  bool any_synthesis_response = false;

  for (std::size_t r = 1; result.dataset.synthetic.size() < config.target_total && r <= max_rounds;
       ++r) {
    const int round = static_cast<int>(r);
    RoundStats stats;
    stats.round = round;

    // Attributes for pool members not yet seen.
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!pool[i].extracted) pending.push_back(i);
    }
    std::vector<ExtractionResult> extractions(pending.size());
    parallel_for(pending.size(), threads, [&](std::size_t k) {
      extractions[k] = extract_attributes(pool[pending[k]].example, backend, templates,
                                          config.temperature, 512);
    });
    for (std::size_t k = 0; k < pending.size(); ++k) {
      auto& member = pool[pending[k]];
      member.extracted = true;
      if (extractions[k].failure) note(StageTag::kExtractAttributes, *extractions[k].failure);
      NoiseStream gate(config.master_seed, {r, pending[k], NoisePurpose::kAttributeGate});
      auto kept = gate_attributes(std::span<const Attribute>(extractions[k].attributes), gate,
                                  config.p_max);
      for (const auto& a : kept) {
        if (std::find(member.attribute_tags.begin(), member.attribute_tags.end(), a.tag) ==
            member.attribute_tags.end()) {
          member.attribute_tags.push_back(a.tag);
        }
      }
      index = update_theme_index(std::move(index), kept, round);
    }

    // Prompt and candidates.
    NoiseStream batch_noise(config.master_seed, {r, 0, NoisePurpose::kSeedBatch});
    auto batch = sample_seed_batch(std::span<const SeedMember>(pool), batch_noise, round);
    stats.seed_batch_size = batch.members.size();
    NoiseStream indicator_noise(config.master_seed, {r, 0, NoisePurpose::kIndicators});
    auto indicators = sample_indicators(indicator_noise, config.indicators);
    auto prompt = assemble_prompt(batch, indicators, templates, config.batch_size);

    std::vector<std::string> batch_tags;
    for (const auto& m : batch.members) {
      for (const auto& t : m.attribute_tags) {
        if (std::find(batch_tags.begin(), batch_tags.end(), t) == batch_tags.end()) {
          batch_tags.push_back(t);
        }
      }
    }

    GenerationRequest request{prompt.system_text, prompt.user_text, config.temperature,
                              config.max_output_tokens, StageTag::kSynthesize};
    auto response = backend.generate(request);
    stats.requested = config.batch_size;

    std::vector<SyntheticRecord> candidates;
    if (!response.ok) {
      auto kind = response.failure_kind == FailureKind::kNone ? FailureKind::kTransport
                                                              : response.failure_kind;
      stats.failures[slot(kind)] += config.batch_size;
    } else {
      any_synthesis_response = true;
      auto items = parse_numbered_list(response.text);
      if (items.empty() && options.refusals.is_refusal(response.text)) {
        stats.failures[slot(FailureKind::kRefusal)] += config.batch_size;
      } else {
        for (std::size_t i = 1; i <= config.batch_size; ++i) {
          auto it = items.find(i);
          if (it == items.end()) {
            ++stats.failures[slot(FailureKind::kMalformed)];
            continue;
          }
          if (auto bad = validate_candidate(it->second, options.refusals)) {
            ++stats.failures[slot(*bad)];
            continue;
          }
          SyntheticRecord rec;
          rec.id = candidate_id(round, i);
          rec.context.core = trim(it->second);
          rec.label = LabelClass::kHarmful;
          rec.indicators = indicators;
          rec.attribute_tags = batch_tags;
          rec.round = round;
          rec.valid = true;
          rec.parent_seed_ids = prompt.seed_ids;
          candidates.push_back(std::move(rec));
        }
      }
    }
    stats.generated_valid = candidates.size();

    // Context, then quality.
    std::vector<std::optional<FailureKind>> context_failure(candidates.size());
    std::vector<std::optional<FailureKind>> score_failure(candidates.size());
    parallel_for(candidates.size(), threads, [&](std::size_t i) {
      NoiseStream dropout(config.master_seed, {r, i, NoisePurpose::kDropout});
      auto anchored =
          contextual_anchoring(std::move(candidates[i]), backend, dropout, config.dropout, templates);
      context_failure[i] = anchored.failure;
      auto scored = quality_score(std::move(anchored.record), backend, templates);
      score_failure[i] = scored.failure;
      candidates[i] = std::move(scored.record);
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (context_failure[i]) note(StageTag::kContextualize, *context_failure[i]);
      if (score_failure[i]) note(StageTag::kScoreQuality, *score_failure[i]);
    }

    // Refinement feeds the pool only in the first refine_rounds rounds.
    if (r <= config.refine_rounds && !candidates.empty()) {
      auto selected = select_top_decile(candidates);
      if (index.empty()) {
        report.warnings.push_back("round " + std::to_string(round) +
                                  ": themes index is empty, refinement skipped");
      } else {
        std::vector<RefineResult> refined(selected.size());
        parallel_for(selected.size(), threads, [&](std::size_t j) {
          NoiseStream theme(config.master_seed, {r, j, NoisePurpose::kThemeChoice});
          refined[j] = thematic_style_refinement(selected[j], index, backend, theme, templates,
                                                 selected[j].id + "-tsr");
        });
        for (auto& res : refined) {
          if (!res.record) {
            note(StageTag::kRefineTheme, res.failure.value_or(FailureKind::kMalformed));
            continue;
          }
          const auto& rec = *res.record;
          pool.push_back({Example{rec.id, rec.context.core, LabelClass::kHarmful, "refined",
                                  Split::kTrain},
                          rec.attribute_tags, false});
          result.dataset.refined.push_back(std::move(*res.record));
          ++stats.refined_added;
        }
      }
    }

    for (auto& c : candidates) result.dataset.synthetic.push_back(std::move(c));
    stats.seed_pool_size = pool.size();
    report.requested += stats.requested;
    report.generated_valid += stats.generated_valid;
    for (auto k : kCountedKinds) report.failures[slot(k)] += stats.failures[slot(k)];
    report.rounds.push_back(stats);
  }

  report.success_rate = report.requested == 0 ? 0.0
                                              : static_cast<double>(report.generated_valid) /
                                                    static_cast<double>(report.requested);
  report.final_seed_pool_size = pool.size();
  report.shortfall = report.generated_valid < config.target_total;
  if (report.shortfall) {
    report.warnings.push_back("shortfall: " + std::to_string(report.generated_valid) + " of " +
                              std::to_string(config.target_total) + " valid records after " +
                              std::to_string(report.rounds.size()) + " rounds");
  }
  report.backend_exhausted = report.shortfall && report.requested > 0 && !any_synthesis_response;
  report.themes = index;
  report.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return result;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void emit(const AugmentedDataset& dataset, const RunReport& report,
          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  {
    auto out = open_out(out_dir / "synthetic.jsonl");
    for (const auto& r : dataset.synthetic) out << to_jsonl_line(r) << '\n';
  }
  {
    auto out = open_out(out_dir / "refined.jsonl");
    for (const auto& r : dataset.refined) out << to_jsonl_line(r) << '\n';
  }
  {
    auto out = open_out(out_dir / "augmented_train.jsonl");
    for (const auto& e : dataset.combined_train()) out << to_jsonl_line(e) << '\n';
  }
  {
    auto out = open_out(out_dir / "report.json");
    out << report.to_json().dump(2, ' ', false, json::error_handler_t::replace) << '\n';
  }
  report.themes.write_jsonl(out_dir / "themes.jsonl");
}

}  // namespace synthforge
