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

#include "synthforge/http_backend.hpp"

#include <cstdio>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include <nlohmann/json.hpp>

namespace synthforge {

using json = nlohmann::json;

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint must start with http:// or https://: " + url);
  }
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw std::invalid_argument("unsupported endpoint scheme: " + scheme);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Single pass so substituted text is never re-scanned for placeholders.
std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    bool matched = false;
    if (tmpl[i] == '{') {
      for (const auto& [name, value] : values) {
        if (tmpl.substr(i, name.size()) == name) {
          out += value;
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace

const std::string& HttpBackend::default_request_template() {
  static const std::string tmpl =
      R"({"model": {model}, "messages": [{"role": "system", "content": {system}}, )"
      R"({"role": "user", "content": {user}}], "temperature": {temperature}, )"
      R"("max_tokens": {max_tokens}})";
  return tmpl;
}

HttpBackend::HttpBackend(BackendConfig config, std::string api_key, Sleeper sleeper)
    : config_(std::move(config)),
      api_key_(std::move(api_key)),
      retry_{config_.max_retries, std::chrono::milliseconds{config_.retry_backoff_ms},
             std::chrono::milliseconds{60000}},
      bucket_(config_.requests_per_minute),
      refusals_(config_.refusal_markers.empty() ? RefusalDetector()
                                                : RefusalDetector(config_.refusal_markers)),
      sleep_(sleeper ? std::move(sleeper)
                     : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
  config_.validate();
  auto ep = split_endpoint(config_.endpoint);
  scheme_host_port_ = std::move(ep.scheme_host_port);
  path_ = std::move(ep.path);
}

std::string HttpBackend::render_body(const GenerationRequest& request) const {
  const std::string& tmpl =
      config_.request_template.empty() ? default_request_template() : config_.request_template;
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.3g", request.temperature);
  return substitute(tmpl, {{"{temperature}", temp},
                           {"{max_tokens}", std::to_string(request.max_output_tokens)},
                           {"{model}", json(config_.model_name).dump()},
                           {"{system}", json(request.system_text).dump()},
                           {"{user}", json(request.user_text).dump()}});
}

GenerationResponse HttpBackend::generate(const GenerationRequest& request) {
  const std::string body = render_body(request);
  FailureKind last = FailureKind::kTransport;
  for (int attempt = 1; attempt <= retry_.max_attempts(); ++attempt) {
    if (attempt > 1) sleep_(retry_.delay_before_retry(attempt - 1));
    bucket_.acquire();

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(std::chrono::seconds{10});
    client.set_read_timeout(std::chrono::seconds{config_.timeout_seconds});
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(path_, headers, body, "application/json");

    if (!res) {
      last = FailureKind::kTransport;
      continue;
    }
    if (res->status == 429) {
      last = FailureKind::kRateLimited;
      continue;
    }
    if (res->status >= 500) {
      last = FailureKind::kTransport;
      continue;
    }
    if (res->status != 200) {
      return GenerationResponse::failure(FailureKind::kTransport, {}, attempt);
    }

    std::string text;
    try {
      auto reply = json::parse(res->body);
      const auto& node = reply.at(json::json_pointer(config_.response_path));
      if (!node.is_string()) return GenerationResponse::failure(FailureKind::kMalformed, {}, attempt);
      text = node.get<std::string>();
    } catch (const json::exception&) {
      return GenerationResponse::failure(FailureKind::kMalformed, {}, attempt);
    }
    if (text.empty()) return GenerationResponse::failure(FailureKind::kMalformed, {}, attempt);
    if (request.tag != StageTag::kSynthesize && refusals_.is_refusal(text)) {
      return GenerationResponse::failure(FailureKind::kRefusal, std::move(text), attempt);
    }
    return GenerationResponse::success(std::move(text), attempt);
  }
  return GenerationResponse::failure(last, {}, retry_.max_attempts());
}

}  // namespace synthforge
