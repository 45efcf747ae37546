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

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "synthforge/backend.hpp"
#include "synthforge/pipeline.hpp"
#include "synthforge/templates.hpp"

namespace synthforge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything `synthesize` needs, loaded from one JSON file. Relative paths
/// in the file are resolved against the file's directory.
struct RunConfig {
  std::filesystem::path corpus_path;
  PipelineConfig pipeline;
  BackendConfig backend;
  std::optional<std::filesystem::path> templates_dir;
  std::filesystem::path base_dir;

  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  SynthesisOptions synthesis_options() const;
};

BackendConfig backend_config_from_json(const nlohmann::json& j);

}  // namespace synthforge
