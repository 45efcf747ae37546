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

#include "synthforge/mock_backend.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <regex>
#include <stdexcept>

#include "synthforge/noise.hpp"

namespace synthforge {

using json = nlohmann::json;

namespace {

const std::vector<std::string>& default_vocabulary() {
  static const std::vector<std::string> words = {
      "they",     "always",  "never",   "people",  "those",   "think",    "again",
      "really",   "group",   "online",  "posting", "nobody",  "wants",    "another",
      "comment",  "thread",  "seriously", "honestly", "every", "single",  "time",
      "crowd",    "loud",    "clueless", "pathetic", "ridiculous", "stupid", "annoying",
      "neighbors", "city",   "team",    "fans",    "clowns",  "whining",  "tired",
      "enough",   "garbage", "take",    "opinion", "leave",   "forum",    "typical",
      "behavior", "nonsense", "useless", "worst",  "ever",    "joke",     "shut"};
  return words;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t request_key(std::uint64_t seed, const GenerationRequest& request) {
  std::uint64_t h = fnv1a(to_string(request.tag));
  h = fnv1a(std::string_view("\0", 1), h);
  h = fnv1a(request.user_text, h);
  return mix64(mix64(seed) ^ h);
}

class Draws {
 public:
  explicit Draws(std::uint64_t key) : engine_(key) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

bool parse_range(std::string_view spec, double& lo, double& hi) {
  // The separator is the first '-' after the first character so negative
  // lower bounds still parse.
  auto dash = spec.find('-', 1);
  if (dash == std::string_view::npos) return false;
  try {
    lo = std::stod(std::string(spec.substr(0, dash)));
    hi = std::stod(std::string(spec.substr(dash + 1)));
  } catch (const std::exception&) {
    return false;
  }
  return lo <= hi;
}

// Returns nullopt if `inner` is not a placeholder this engine understands.
std::optional<std::string> expand_one(std::string_view inner, Draws& draws,
                                      const std::vector<std::string>& vocab, std::uint64_t key,
                                      std::optional<std::size_t> index) {
  if (inner == "hash") {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
    return std::string(buf);
  }
  if (inner == "index") {
    if (!index) return std::nullopt;
    return std::to_string(*index);
  }
  auto colon = inner.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto kind = inner.substr(0, colon);
  auto arg = inner.substr(colon + 1);
  if (kind == "words") {
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), n);
    if (ec != std::errc{} || p != arg.data() + arg.size() || vocab.empty()) return std::nullopt;
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out.push_back(' ');
      out += vocab[draw_index(draws, vocab.size())];
    }
    return out;
  }
  if (kind == "int") {
    double lo = 0, hi = 0;
    if (!parse_range(arg, lo, hi)) return std::nullopt;
    auto a = static_cast<long long>(lo);
    auto b = static_cast<long long>(hi);
    auto span = static_cast<std::size_t>(b - a + 1);
    return std::to_string(a + static_cast<long long>(draw_index(draws, span)));
  }
  if (kind == "real") {
    double lo = 0, hi = 0;
    if (!parse_range(arg, lo, hi)) return std::nullopt;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", lo + (hi - lo) * draws.uniform());
    return std::string(buf);
  }
  if (kind == "pick") {
    std::vector<std::string_view> options;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= arg.size(); ++i) {
      if (i == arg.size() || arg[i] == '|') {
        options.push_back(arg.substr(start, i - start));
        start = i + 1;
      }
    }
    return std::string(options[draw_index(draws, options.size())]);
  }
  return std::nullopt;
}

std::string expand(std::string_view tmpl, Draws& draws, const std::vector<std::string>& vocab,
                   std::uint64_t key, std::optional<std::size_t> index = std::nullopt) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        if (auto sub = expand_one(tmpl.substr(i + 1, close - i - 1), draws, vocab, key, index)) {
          out += *sub;
          i = close;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
  }
  return out;
}

double checked_rate(const json& j, const char* key) {
  double rate = j.value(key, 0.0);
  if (rate < 0.0 || rate > 1.0) {
    throw std::invalid_argument(std::string("mock script: ") + key + " must be in [0, 1]");
  }
  return rate;
}

}  // namespace

MockScript MockScript::from_json(const json& j) {
  MockScript script;
  script.seed = j.value("seed", std::uint64_t{0});
  script.vocabulary = j.value("vocabulary", default_vocabulary());
  if (script.vocabulary.empty()) script.vocabulary = default_vocabulary();
  if (j.contains("refusal_markers")) {
    script.refusal_markers = j.at("refusal_markers").get<std::vector<std::string>>();
  }
  for (const auto& r : j.at("rules")) {
    MockRule rule;
    auto tag = r.value("tag", std::string("*"));
    if (tag != "*") {
      rule.tag = parse_stage_tag(tag);
      if (!rule.tag) throw std::invalid_argument("mock script: unknown tag '" + tag + "'");
    }
    if (r.contains("contains")) rule.contains = r.at("contains").get<std::string>();
    rule.response = r.value("response", std::string{});
    rule.failure_rate = checked_rate(r, "failure_rate");
    if (r.contains("failure_kind")) {
      auto kind = parse_failure_kind(r.at("failure_kind").get<std::string>());
      if (!kind || *kind == FailureKind::kNone) {
        throw std::invalid_argument("mock script: bad failure_kind");
      }
      rule.failure_kind = *kind;
    }
    if (r.contains("items")) {
      const auto& it = r.at("items");
      MockItems items;
      items.count_pattern = it.value("count_pattern", items.count_pattern);
      items.item_template = it.at("template").get<std::string>();
      items.failure_rate = checked_rate(it, "failure_rate");
      items.failure_template = it.value("failure_template", items.failure_template);
      rule.items = std::move(items);
    }
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::invalid_argument("mock script " + path.string() + ": " + e.what());
  }
}

MockBackend::MockBackend(MockScript script)
    : script_(std::move(script)),
      refusals_(script_.refusal_markers.empty() ? RefusalDetector()
                                                : RefusalDetector(script_.refusal_markers)) {}

GenerationResponse MockBackend::generate(const GenerationRequest& request) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  const MockRule* rule = nullptr;
  for (const auto& r : script_.rules) {
    if (r.tag && *r.tag != request.tag) continue;
    if (r.contains && request.user_text.find(*r.contains) == std::string::npos) continue;
    rule = &r;
    break;
  }
  if (rule == nullptr) return GenerationResponse::failure(FailureKind::kMalformed);

  const std::uint64_t key = request_key(script_.seed, request);
  if (rule->failure_rate > 0.0) {
    Draws fail(mix64(key ^ 0x1ULL));
    if (fail.uniform() < rule->failure_rate) return GenerationResponse::failure(rule->failure_kind);
  }

  Draws body(mix64(key ^ 0x2ULL));
  std::string text = expand(rule->response, body, script_.vocabulary, key);

  if (rule->items) {
    const auto& items = *rule->items;
    std::size_t count = 1;
    std::smatch m;
    std::regex pattern(items.count_pattern);
    if (std::regex_search(request.user_text, m, pattern) && m.size() > 1) {
      count = std::stoul(m[1].str());
    }
    for (std::size_t i = 1; i <= count; ++i) {
      Draws item(mix64(key ^ (0x9e3779b97f4a7c15ULL * (i + 2))));
      bool failed = item.uniform() < items.failure_rate;
      std::string line = expand(failed ? items.failure_template : items.item_template, item,
                                script_.vocabulary, key, i);
      if (!text.empty()) text.push_back('\n');
      text += std::to_string(i) + ". " + line;
    }
    // Item-level refusals are judged per candidate by the caller.
    if (text.empty()) return GenerationResponse::failure(FailureKind::kMalformed);
    return GenerationResponse::success(std::move(text));
  }

  if (request.tag != StageTag::kSynthesize && refusals_.is_refusal(text)) return GenerationResponse::failure(FailureKind::kRefusal, text);
  if (text.empty()) return GenerationResponse::failure(FailureKind::kMalformed);
  return GenerationResponse::success(std::move(text));
}

}  // namespace synthforge
