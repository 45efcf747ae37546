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

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "synthforge/corpus.hpp"
#include "synthforge/evalkit.hpp"
#include "synthforge/pipeline.hpp"
#include "synthforge/run_config.hpp"

namespace synthforge::cli {

namespace {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string input;
  std::string format;
  std::string mapping;
  std::string out;
  std::string source;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_harmful;
  std::optional<std::size_t> max_nonharmful;
  bool no_language_filter = false;
};

void print_split_table(const Corpus& corpus, std::ostream& out) {
  auto row = [&](const std::string& name, std::size_t h, std::size_t n) {
    out << std::left << std::setw(8) << name << std::right << std::setw(10) << h << std::setw(14)
        << n << std::setw(10) << (h + n) << '\n';
  };
  out << std::left << std::setw(8) << "Split" << std::right << std::setw(10) << "Harmful"
      << std::setw(14) << "Non-Harmful" << std::setw(10) << "Total" << '\n';
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    row(std::string(to_string(s)), corpus.count(LabelClass::kHarmful, s),
        corpus.count(LabelClass::kNonHarmful, s));
  }
  row("total", corpus.count(LabelClass::kHarmful), corpus.count(LabelClass::kNonHarmful));
}

int run_ingest(const IngestArgs& a, std::ostream& out) {
  auto format = parse_input_format(a.format);
  if (!format) throw CorpusError("--format must be csv or jsonl");
  auto cfg = load_dataset_config(a.mapping);
  std::string source = a.source.empty() ? cfg.source : a.source;
  auto max_h = a.max_harmful ? a.max_harmful : cfg.max_harmful;
  auto max_n = a.max_nonharmful ? a.max_nonharmful : cfg.max_nonharmful;

  auto raw = ingest(a.input, *format, cfg.mapping, source, cfg.columns);
  auto cleaned = drop_blank(raw);
  std::size_t blank = raw.size() - cleaned.size();
  std::size_t non_english = 0;
  if (!a.no_language_filter) {
    auto kept = language_filter(cleaned, looks_english);
    non_english = cleaned.size() - kept.size();
    cleaned = std::move(kept);
  }
  auto [deduped, duplicates] = dedup(cleaned);
  std::size_t before_caps = deduped.size();
  if (max_h) deduped = cap_class(deduped, LabelClass::kHarmful, *max_h, a.seed);
  if (max_n) deduped = cap_class(deduped, LabelClass::kNonHarmful, *max_n, a.seed);
  std::size_t capped = before_caps - deduped.size();
  auto result = split(deduped, SplitRatio{}, a.seed);
  write_canonical_jsonl(result, a.out);

  out << "source " << source << ": " << raw.size() << " rows, " << blank << " blank, "
      << non_english << " non-English, " << duplicates << " near-duplicates, " << capped
      << " removed by caps\n";
  print_split_table(result, out);
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synthesize

void print_run_summary(const RunReport& report, std::ostream& out) {
  out << "Target Size " << report.target_total << '\n';
  out << "Success (%) " << percent(report.success_rate) << '\n';
  out << "rounds " << report.rounds.size() << ", requested " << report.requested << ", valid "
      << report.generated_valid << ", failures";
  for (auto k : {FailureKind::kTransport, FailureKind::kRateLimited, FailureKind::kRefusal,
                 FailureKind::kMalformed}) {
    out << ' ' << to_string(k) << '=' << report.failures[static_cast<std::size_t>(k)];
  }
  out << '\n';
  out << "seed pool " << report.initial_seed_pool_size << " -> " << report.final_seed_pool_size
      << ", themes " << report.themes.size() << '\n';
}

int run_synthesize(const std::string& config_path, const std::string& out_dir,
                   std::optional<unsigned> threads, std::ostream& out, std::ostream& err) {
  auto rc = RunConfig::load(config_path);
  if (threads) rc.pipeline.parallelism = *threads;
  auto corpus = read_canonical_jsonl(rc.corpus_path);
  auto backend = make_backend(rc.backend, rc.base_dir.string());
  auto result = run_synthesis(rc.pipeline, corpus, *backend, rc.synthesis_options());
  emit(result.dataset, result.report, out_dir);

  print_run_summary(result.report, out);
  out << "elapsed " << result.report.elapsed.count() << " ms\n";
  out << "wrote " << out_dir << '\n';
  for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
  if (result.report.backend_exhausted) return kExitBackendExhausted;
  if (result.report.shortfall) return kExitShortfall;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

int run_evaluate(const std::vector<std::string>& files, bool robustness, std::ostream& out) {
  std::vector<eval::PredictionSet> sets;
  for (const auto& f : files) {
    auto stem = std::filesystem::path(f).stem().string();
    for (auto& s : eval::read_predictions(f, stem)) sets.push_back(std::move(s));
  }
  for (const auto& s : sets) {
    auto m = eval::evaluate(s);
    out << "[" << s.variant_tag << "] n=" << s.items.size() << '\n';
    out << "Accuracy: " << percent(m.accuracy) << '\n';
    out << "Macro-F1: " << percent(m.macro_f1) << '\n';
    if (m.mean_loss) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", *m.mean_loss);
      out << "Loss: " << buf << '\n';
    }
  }
  if (robustness) {
    if (sets.size() < 2) {
      throw eval::EvalError("--robustness needs at least 2 variants, got " +
                            std::to_string(sets.size()));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", eval::robustness_variance(sets));
    out << "Robustness variance: " << buf << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int run_report(std::string path, std::ostream& out) {
  if (std::filesystem::is_directory(path)) path = (std::filesystem::path(path) / "report.json").string();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
  RunReport report;
  try {
    report = RunReport::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  print_run_summary(report, out);
  out << '\n'
      << std::left << std::setw(7) << "Round" << std::right << std::setw(11) << "Requested"
      << std::setw(8) << "Valid" << std::setw(12) << "Success(%)" << std::setw(10) << "Refined"
      << std::setw(7) << "Pool" << '\n';
  for (const auto& r : report.rounds) {
    double rate = r.requested ? static_cast<double>(r.generated_valid) / r.requested : 0.0;
    out << std::left << std::setw(7) << r.round << std::right << std::setw(11) << r.requested
        << std::setw(8) << r.generated_valid << std::setw(12) << percent(rate) << std::setw(10)
        << r.refined_added << std::setw(7) << r.seed_pool_size << '\n';
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic harmful-content data generation and evaluation"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Ingest, clean and split a raw dataset");
  ingest_cmd->add_option("--input", ingest_args.input, "Raw csv or jsonl file")->required();
  ingest_cmd->add_option("--format", ingest_args.format, "csv or jsonl")
      ->required()
      ->check(CLI::IsMember({"csv", "jsonl"}));
  ingest_cmd->add_option("--mapping", ingest_args.mapping, "Label mapping config (JSON)")
      ->required();
  ingest_cmd->add_option("--out", ingest_args.out, "Canonical jsonl output")->required();
  ingest_cmd->add_option("--seed", ingest_args.seed, "Seed for caps and splits");
  ingest_cmd->add_option("--source", ingest_args.source, "Dataset name (overrides mapping)");
  ingest_cmd->add_option("--max-harmful", ingest_args.max_harmful, "Cap on harmful examples");
  ingest_cmd->add_option("--max-nonharmful", ingest_args.max_nonharmful,
                         "Cap on non-harmful examples");
  ingest_cmd->add_flag("--no-language-filter", ingest_args.no_language_filter,
                       "Keep every example regardless of language");

  std::string config_path;
  std::string out_dir;
  std::optional<unsigned> threads;
  auto* synth_cmd = app.add_subcommand("synthesize", "Run the synthesis pipeline");
  synth_cmd->add_option("--config", config_path, "Run config (JSON)")->required();
  synth_cmd->add_option("--out", out_dir, "Output directory")->required();
  synth_cmd->add_option("--threads", threads, "Override pipeline parallelism")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> pred_files;
  bool robustness = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score prediction files");
  eval_cmd->add_option("--preds", pred_files, "Prediction jsonl file(s)")->required();
  eval_cmd->add_flag("--robustness", robustness, "Report variance of loss across variants");

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "Render a report.json as a table");
  report_cmd->add_option("--in", report_path, "report.json or a synthesize output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest_args, out);
    if (*synth_cmd) return run_synthesize(config_path, out_dir, threads, out, err);
    if (*eval_cmd) return run_evaluate(pred_files, robustness, out);
    if (*report_cmd) return run_report(report_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace synthforge::cli
