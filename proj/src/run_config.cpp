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

#include "synthforge/run_config.hpp"

#include <fstream>

namespace synthforge {

using json = nlohmann::json;

BackendConfig backend_config_from_json(const json& j) {
  BackendConfig c;
  auto kind = j.value("kind", std::string("mock"));
  if (kind == "mock") {
    c.kind = BackendKind::kMock;
  } else if (kind == "http") {
    c.kind = BackendKind::kHttp;
  } else {
    throw ConfigError("backend kind must be 'mock' or 'http', got '" + kind + "'");
  }
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model_name = j.value("model_name", c.model_name);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.retry_backoff_ms = j.value("retry_backoff_ms", c.retry_backoff_ms);
  c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.mock_script = j.value("mock_script", c.mock_script);
  c.request_template = j.value("request_template", c.request_template);
  c.response_path = j.value("response_path", c.response_path);
  c.refusal_markers = j.value("refusal_markers", c.refusal_markers);
  if (j.contains("api_key")) {
    throw ConfigError("api keys are read from the environment only; use api_key_env");
  }
  return c;
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };
  RunConfig rc;
  rc.base_dir = base_dir;
  try {
    if (!j.contains("corpus")) throw ConfigError("config lacks 'corpus'");
    rc.corpus_path = resolve(j.at("corpus").get<std::string>());
    rc.pipeline = PipelineConfig::from_json(j.value("pipeline", json::object()));
    rc.backend = backend_config_from_json(j.value("backend", json::object()));
    if (j.contains("templates_dir")) rc.templates_dir = resolve(j.at("templates_dir").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    rc.pipeline.validate();
    rc.backend.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return rc;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config " + path.string() + " is not a JSON object");
  return from_json(j, path.parent_path());
}

SynthesisOptions RunConfig::synthesis_options() const {
  SynthesisOptions opts;
  if (templates_dir) opts.templates = PromptTemplates::from_directory(*templates_dir);
  if (!backend.refusal_markers.empty()) opts.refusals = RefusalDetector(backend.refusal_markers);
  return opts;
}

}  // namespace synthforge
