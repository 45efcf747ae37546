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

// Small helpers shared by the unit tests.
#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "synthforge/backend.hpp"
#include "synthforge/corpus.hpp"

namespace synthforge::testing {

/// Backend that answers from a per-tag function and records every request.
class FunctionBackend final : public Backend {
 public:
  using Handler = std::function<GenerationResponse(const GenerationRequest&)>;

  void on(StageTag tag, Handler handler) { handlers_[tag] = std::move(handler); }
  void reply(StageTag tag, std::string text) {
    on(tag, [text](const GenerationRequest&) { return GenerationResponse::success(text); });
  }

  GenerationResponse generate(const GenerationRequest& request) override {
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(request);
    }
    auto it = handlers_.find(request.tag);
    if (it == handlers_.end()) return GenerationResponse::failure(FailureKind::kMalformed);
    return it->second(request);
  }

  std::vector<GenerationRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  std::map<StageTag, Handler> handlers_;
  mutable std::mutex mutex_;
  std::vector<GenerationRequest> requests_;
};

inline Example harmful_example(std::string id, std::string text) {
  return Example{std::move(id), std::move(text), LabelClass::kHarmful, "test", Split::kTrain};
}

}  // namespace synthforge::testing
