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

#include "synthforge/backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "synthforge/http_backend.hpp"
#include "synthforge/mock_backend.hpp"

namespace synthforge {

namespace {

constexpr std::string_view kStageNames[] = {"extract_attributes", "synthesize", "score_quality",
                                            "refine_theme", "contextualize"};
constexpr std::string_view kFailureNames[] = {"none", "transport", "rate_limited", "refusal",
                                              "malformed"};

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(StageTag tag) { return kStageNames[static_cast<int>(tag)]; }

std::optional<StageTag> parse_stage_tag(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kStageNames[i] == name) return static_cast<StageTag>(i);
  }
  return std::nullopt;
}

std::string_view to_string(FailureKind kind) { return kFailureNames[static_cast<int>(kind)]; }

std::optional<FailureKind> parse_failure_kind(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kFailureNames[i] == name) return static_cast<FailureKind>(i);
  }
  return std::nullopt;
}

RefusalDetector::RefusalDetector()
    : RefusalDetector({"i'm sorry", "i am sorry", "i can't help", "i cannot help",
                       "i can't assist", "i cannot assist", "as an ai language model"}) {}

RefusalDetector::RefusalDetector(std::vector<std::string> markers) {
  for (auto& m : markers) {
    if (!m.empty()) markers_.push_back(lowercase(m));
  }
}

bool RefusalDetector::is_refusal(std::string_view text) const {
  if (markers_.empty()) return false;
  std::string hay = lowercase(text);
  // Normalize typographic apostrophes so "I’m sorry" matches too.
  for (std::size_t pos; (pos = hay.find("\xE2\x80\x99")) != std::string::npos;) {
    hay.replace(pos, 3, "'");
  }
  return std::any_of(markers_.begin(), markers_.end(),
                     [&](const std::string& m) { return hay.find(m) != std::string::npos; });
}

std::chrono::milliseconds RetryPolicy::delay_before_retry(int retry) const {
  if (retry < 1) return std::chrono::milliseconds{0};
  auto delay = base_delay.count();
  for (int i = 1; i < retry && delay < max_delay.count(); ++i) delay *= 2;
  return std::chrono::milliseconds{std::min(delay, max_delay.count())};
}

TokenBucket::TokenBucket(int requests_per_minute, Clock::time_point start) {
  if (requests_per_minute <= 0) {
    throw std::invalid_argument("requests_per_minute must be positive");
  }
  per_second_ = requests_per_minute / 60.0;
  capacity_ = std::max(1.0, per_second_);
  tokens_ = capacity_;
  last_ = start;
}

std::optional<TokenBucket::Clock::duration> TokenBucket::try_acquire(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  if (now > last_) {
    double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
    last_ = now;
  }
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return std::nullopt;
  }
  double wait_s = (1.0 - tokens_) / per_second_;
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait_s));
}

void TokenBucket::acquire() {
  while (auto wait = try_acquire(Clock::now())) {
    std::this_thread::sleep_for(*wait);
  }
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
  if (retry_backoff_ms <= 0) throw std::invalid_argument("retry_backoff_ms must be positive");
  if (requests_per_minute <= 0) {
    throw std::invalid_argument("requests_per_minute must be positive");
  }
  if (kind == BackendKind::kHttp) {
    if (endpoint.empty()) throw std::invalid_argument("http backend requires an endpoint");
    if (api_key_env.empty()) throw std::invalid_argument("http backend requires api_key_env");
  } else if (mock_script.empty()) {
    throw std::invalid_argument("mock backend requires mock_script");
  }
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config, const std::string& base_dir) {
  config.validate();
  if (config.kind == BackendKind::kMock) {
    std::filesystem::path script = config.mock_script;
    if (script.is_relative() && !base_dir.empty()) script = std::filesystem::path(base_dir) / script;
    auto parsed = MockScript::load(script);
    if (!config.refusal_markers.empty()) parsed.refusal_markers = config.refusal_markers;
    return std::make_unique<MockBackend>(std::move(parsed));
  }
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw std::invalid_argument("environment variable " + config.api_key_env + " is not set");
  }
  return std::make_unique<HttpBackend>(config, key);
}

}  // namespace synthforge
