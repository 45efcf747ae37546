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

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synthforge {

/// Pipeline stage that issued a generation request.
enum class StageTag { kExtractAttributes, kSynthesize, kScoreQuality, kRefineTheme, kContextualize };

std::string_view to_string(StageTag tag);
std::optional<StageTag> parse_stage_tag(std::string_view name);

enum class FailureKind { kNone, kTransport, kRateLimited, kRefusal, kMalformed };

std::string_view to_string(FailureKind kind);
std::optional<FailureKind> parse_failure_kind(std::string_view name);

struct GenerationRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 1.0;
  int max_output_tokens = 1024;
  StageTag tag = StageTag::kSynthesize;
};

struct GenerationResponse {
  std::string text;
  bool ok = false;
  FailureKind failure_kind = FailureKind::kTransport;
  int attempts = 1;

  static GenerationResponse success(std::string text, int attempts = 1) {
    return {std::move(text), true, FailureKind::kNone, attempts};
  }
  static GenerationResponse failure(FailureKind kind, std::string text = {}, int attempts = 1) {
    return {std::move(text), false, kind, attempts};
  }
};

/// Text-generation backend. Implementations must allow concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
};

/// Case-insensitive substring match against a list of refusal phrases.
class RefusalDetector {
 public:
  RefusalDetector();
  explicit RefusalDetector(std::vector<std::string> markers);

  bool is_refusal(std::string_view text) const;
  const std::vector<std::string>& markers() const noexcept { return markers_; }

 private:
  std::vector<std::string> markers_;  // stored lowercase
};

/// Exponential backoff: delay before retry k (k = 1..max_retries) is
/// base * 2^(k-1), capped.
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{60000};

  int max_attempts() const noexcept { return max_retries + 1; }
  std::chrono::milliseconds delay_before_retry(int retry) const;
};

/// Token bucket refilled at requests_per_minute / 60 tokens per second with a
/// burst of one second's worth (at least one token). Thread-safe.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  explicit TokenBucket(int requests_per_minute, Clock::time_point start = Clock::now());

  /// Takes a token if one is available at `now`; otherwise returns how long
  /// the caller should wait before trying again.
  std::optional<Clock::duration> try_acquire(Clock::time_point now);

  /// Blocks until a token is available.
  void acquire();

  double capacity() const noexcept { return capacity_; }

 private:
  std::mutex mutex_;
  double capacity_;
  double tokens_;
  double per_second_;
  Clock::time_point last_;
};

enum class BackendKind { kMock, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint;        // http only
  std::string model_name;
  std::string api_key_env;     // http only; the key itself never lives in config
  int max_retries = 3;
  int retry_backoff_ms = 500;
  int requests_per_minute = 60;
  int timeout_seconds = 120;
  std::string mock_script;     // mock only; path to the script file
  std::string request_template;  // http only; empty selects the chat-completions shape
  std::string response_path = "/choices/0/message/content";
  std::vector<std::string> refusal_markers;  // empty selects the defaults

  /// Throws std::invalid_argument when a field combination is unusable.
  void validate() const;
};

/// Builds the backend described by config. Relative script paths are
/// resolved against base_dir.
std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      const std::string& base_dir = {});

}  // namespace synthforge
