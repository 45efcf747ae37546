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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "synthforge/augment.hpp"
#include "synthforge/corpus.hpp"
#include "synthforge/evalkit.hpp"
#include "synthforge/mock_backend.hpp"
#include "synthforge/pipeline.hpp"
#include "synthforge/promptcraft.hpp"

using namespace synthforge;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(SYNTHFORGE_SOURCE_DIR) / "configs";

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Verdict determinism_golden() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  auto root = fs::temp_directory_path() / "synthforge_acceptance" / "golden";
  fs::remove_all(root);
  std::string ref_syn, ref_report;
  int runs = 0;
  for (int rep = 0; rep < 3; ++rep) {
    for (const char* threads : {"1", "4"}) {
      auto out = root / ("run" + std::to_string(rep) + "_t" + threads);
      std::string config = (kConfigs / "toy_run.json").string();
      std::string out_s = out.string();
      const char* argv[] = {"synthforge", "synthesize", "--config", config.c_str(),
                            "--out",      out_s.c_str(), "--threads", threads};
      std::ostringstream sink_out, sink_err;
      int code = cli::run(8, argv, sink_out, sink_err);
      v.check(code == cli::kExitOk, "run exited with " + std::to_string(code));
      auto syn = slurp(out / "synthetic.jsonl");
      auto report = slurp(out / "report.json");
      v.check(!syn.empty(), "synthetic.jsonl empty");
      if (runs++ == 0) {
        ref_syn = syn;
        ref_report = report;
      }
      v.check(syn == ref_syn, std::string("synthetic.jsonl differs (threads ") + threads + ")");
      v.check(report == ref_report, std::string("report.json differs (threads ") + threads + ")");
    }
  }
  double secs = seconds_since(t0);
  v.check(secs < 10.0, "runtime " + fmt("%.2f", secs) + " s");
  if (v.pass) v.detail = std::to_string(runs) + " runs byte-identical, " + fmt("%.2f", secs) + " s";
  return v;
}

Verdict accounting() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  PipelineConfig cfg;
  cfg.target_total = 1000;
  cfg.batch_size = 100;
  cfg.refine_rounds = 3;
  cfg.seed_count = 40;
  cfg.master_seed = 1234;
  cfg.parallelism = 4;
  MockBackend backend(MockScript::load(kConfigs / "mock_script_lossy.json"));
  auto corpus = read_canonical_jsonl(kConfigs / "toy_corpus.jsonl", "toy");
  auto res = run_synthesis(cfg, corpus, backend);
  const auto& rep = res.report;
  v.check(rep.success_rate >= 0.766 && rep.success_rate <= 0.806,
          "success_rate " + fmt("%.4f", rep.success_rate));
  v.check(rep.requested == rep.rounds.size() * cfg.batch_size, "requested != rounds x K");
  v.check(rep.generated_valid + total(rep.failures) == rep.requested, "valid + failures != requested");
  for (const auto& r : rep.rounds) {
    v.check(r.generated_valid + total(r.failures) == r.requested,
            "round " + std::to_string(r.round) + " does not balance");
  }
  double secs = seconds_since(t0);
  v.check(secs < 30.0, "runtime " + fmt("%.2f", secs) + " s");
  if (v.pass) {
    v.detail = "success_rate " + fmt("%.4f", rep.success_rate) + ", rounds " +
               std::to_string(rep.rounds.size()) + ", requested " + std::to_string(rep.requested) +
               ", valid " + std::to_string(rep.generated_valid) + ", " + fmt("%.2f", secs) + " s";
  }
  return v;
}

eval::PredictionSet prediction_set(const std::vector<int>& truth, const std::vector<int>& pred) {
  eval::PredictionSet s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    s.items.push_back({"i" + std::to_string(i), truth[i], pred[i], std::nullopt});
  }
  return s;
}

Verdict metric_oracle() {
  Verdict v;
  const std::vector<int> truth = {0, 1, 1, 0, 1, 0, 0, 1};
  int mismatches = 0;
  for (unsigned mask = 0; mask < 256; ++mask) {
    std::vector<int> pred(8);
    for (int b = 0; b < 8; ++b) pred[b] = (mask >> b) & 1;
    double got = eval::macro_f1(prediction_set(truth, pred));
    double want = testing::macro_f1_oracle(truth, pred).value();
    if (got != want) ++mismatches;
  }
  v.check(mismatches == 0, std::to_string(mismatches) + "/256 patterns disagree");
  double hand = eval::macro_f1(prediction_set({0, 0, 1, 1}, {0, 0, 0, 0}));
  v.check(std::abs(hand - 1.0 / 3.0) <= 1e-12, "hand case " + fmt("%.15f", hand));
  if (v.pass) v.detail = "256/256 patterns exact, hand case " + fmt("%.12f", hand);
  return v;
}

Verdict robustness() {
  Verdict v;
  eval::PredictionSet base;
  base.items = {{"a", 1, 1, 0.8}, {"b", 0, 0, 0.3}, {"c", 1, 0, 0.45}};
  std::vector<eval::PredictionSet> same = {base, base, base};
  double zero = eval::robustness_variance(same);
  v.check(zero == 0.0, "identical variants gave " + fmt("%.3g", zero));

  auto with_loss = [](double loss) {
    eval::PredictionSet s;
    double p = std::exp(-loss);
    s.items = {{"a", 1, 1, p}, {"b", 1, 1, p}};
    return s;
  };
  std::vector<eval::PredictionSet> two = {with_loss(0.2), with_loss(0.4)};
  double var = eval::robustness_variance(two);
  v.check(std::abs(var - 0.01) <= 1e-12, "losses [0.2, 0.4] gave " + fmt("%.15g", var));
  if (v.pass) v.detail = "identical -> 0, [0.2, 0.4] -> " + fmt("%.15g", var);
  return v;
}

Verdict sampling_laws() {
  Verdict v;
  constexpr int kDraws = 10000;
  std::array<int, 5> masked{};
  for (std::uint64_t r = 0; r < kDraws; ++r) {
    NoiseStream n(20240601, {r, 0, NoisePurpose::kIndicators});
    auto s = sample_indicators(n, IndicatorDomains{});
    masked[0] += !s.tone;
    masked[1] += !s.swear;
    masked[2] += !s.irony;
    masked[3] += !s.country;
    masked[4] += !s.year;
  }
  std::string rates;
  for (int k = 0; k < 5; ++k) {
    double rate = masked[k] / static_cast<double>(kDraws);
    rates += (k ? "/" : "") + fmt("%.3f", rate);
    v.check(std::abs(rate - 0.5) <= 0.02, "mask rate " + std::to_string(k) + " = " + fmt("%.4f", rate));
  }

  std::array<int, 3> outcomes{};
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    NoiseStream n(20240601, {1, i, NoisePurpose::kDropout});
    ++outcomes[static_cast<int>(draw_dropout(n, DropoutProbs{}))];
  }
  const double expected[] = {0.5, 0.25, 0.25};
  std::string freqs;
  for (int k = 0; k < 3; ++k) {
    double f = outcomes[k] / static_cast<double>(kDraws);
    freqs += (k ? "/" : "") + fmt("%.3f", f);
    v.check(std::abs(f - expected[k]) <= 0.02, "dropout " + std::to_string(k) + " = " + fmt("%.4f", f));
  }

  NoiseStream gate(20240601, {0, 0, NoisePurpose::kAttributeGate});
  int kept = 0;
  for (int i = 0; i < kDraws; ++i) kept += gate_attribute({"t", 1.0, "e"}, gate.uniform(), 0.95);
  double retention = kept / static_cast<double>(kDraws);
  v.check(std::abs(retention - 0.95) <= 0.02, "retention " + fmt("%.4f", retention));

  int batch_errors = 0;
  for (std::size_t n = 1; n <= 1000; ++n) {
    std::size_t want = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n / 10.0)));
    if (seed_batch_size(n) != want) ++batch_errors;
  }
  v.check(batch_errors == 0, std::to_string(batch_errors) + " batch sizes wrong");
  if (v.pass) {
    v.detail = "mask " + rates + ", dropout " + freqs + ", retention " + fmt("%.4f", retention) +
               ", batch law 1..1000 exact";
  }
  return v;
}

Verdict corpus_hygiene() {
  Verdict v;
  std::mt19937 rng(11);
  const char* base[] = {"the cats are running", "you are so stupid", "have a nice day",
                        "parties were stopped", "watch this"};
  int non_idempotent = 0;
  for (int c = 0; c < 100; ++c) {
    std::vector<Example> ex;
    for (int i = 0; i < 40; ++i) {
      std::string t = base[rng() % std::size(base)];
      if (rng() % 2) for (auto& ch : t) ch = static_cast<char>(std::toupper(ch));
      if (rng() % 2) t += "   https://t.co/" + std::to_string(rng() % 1000);
      if (rng() % 2) t = "@user" + std::to_string(rng() % 50) + " " + t;
      ex.push_back({"c" + std::to_string(i), t,
                    rng() % 2 ? LabelClass::kHarmful : LabelClass::kNonHarmful, "gen",
                    Split::kUnassigned});
    }
    auto once = dedup(Corpus("g", ex));
    auto twice = dedup(once.corpus);
    if (!(twice.corpus == once.corpus) || twice.removed != 0) ++non_idempotent;
  }
  v.check(non_idempotent == 0, std::to_string(non_idempotent) + "/100 corpora not idempotent");

  std::vector<Example> big;
  for (std::size_t i = 0; i < 5281; ++i) {
    big.push_back({"r" + std::to_string(i), "text " + std::to_string(i),
                   i < 1200 ? LabelClass::kHarmful : LabelClass::kNonHarmful, "AHSD",
                   Split::kUnassigned});
  }
  Corpus corpus("AHSD", big);
  auto a = split(corpus, {}, 42);
  auto b = split(corpus, {}, 42);
  auto count = [&](Split s) {
    return a.count(LabelClass::kHarmful, s) + a.count(LabelClass::kNonHarmful, s);
  };
  std::size_t tr = count(Split::kTrain), va = count(Split::kVal), te = count(Split::kTest);
  v.check(tr == 3696 && va == 528 && te == 1057,
          "split " + std::to_string(tr) + "/" + std::to_string(va) + "/" + std::to_string(te));
  v.check(a == b, "split not deterministic under a fixed seed");
  if (v.pass) {
    v.detail = "dedup idempotent on 100 corpora, split " + std::to_string(tr) + "/" +
               std::to_string(va) + "/" + std::to_string(te) + ", deterministic";
  }
  return v;
}

Verdict quota_law() {
  Verdict v;
  std::mt19937 rng(13);
  int wrong = 0;
  for (std::size_t n = 0; n <= 200; ++n) {
    std::vector<SyntheticRecord> rs(n);
    for (std::size_t i = 0; i < n; ++i) {
      rs[i].id = "r" + std::to_string(i);
      rs[i].context.core = "x";
      rs[i].valid = true;
      if (rng() % 5) rs[i].quality = static_cast<int>(1 + rng() % 10);
    }
    if (select_top_decile(rs).size() != std::min(n, testing::ceil_tenth(n))) ++wrong;
  }
  v.check(wrong == 0, std::to_string(wrong) + " sizes wrong in 0..200");

  std::vector<SyntheticRecord> tie(3);
  const char* ids[] = {"b", "a", "c"};
  const int scores[] = {9, 9, 3};
  for (int i = 0; i < 3; ++i) {
    tie[i].id = ids[i];
    tie[i].context.core = "x";
    tie[i].valid = true;
    tie[i].quality = scores[i];
  }
  auto sel = select_top_decile(tie);
  v.check(sel.size() == 1 && sel[0].id == "a", "tie case did not select {a}");
  if (v.pass) v.detail = "0..200 exact, tie [9,9,3]/[b,a,c] -> {a}";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {"determinism-golden", determinism_golden},
      {"accounting", accounting},
      {"metric-oracle", metric_oracle},
      {"robustness-metric", robustness},
      {"sampling-laws", sampling_laws},
      {"corpus-hygiene", corpus_hygiene},
      {"quota-law", quota_law},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
