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

#include <functional>
#include <string>

#include "synthforge/backend.hpp"

namespace synthforge {

/// Chat-completion style HTTP backend.
///
/// The request body comes from a template with {system}, {user}, {model}
/// (substituted as JSON string literals) and {temperature}, {max_tokens}
/// (numbers). The reply text is read with a JSON pointer. 429 and 5xx
/// replies or connection errors are retried with exponential backoff;
/// every call first takes a token from the rate limiter.
class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  HttpBackend(BackendConfig config, std::string api_key, Sleeper sleeper = {});

  GenerationResponse generate(const GenerationRequest& request) override;

  std::string render_body(const GenerationRequest& request) const;

  static const std::string& default_request_template();

 private:
  BackendConfig config_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
  RetryPolicy retry_;
  TokenBucket bucket_;
  RefusalDetector refusals_;
  Sleeper sleep_;
};

}  // namespace synthforge
