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

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace synthforge {

/// Anything that hands out uniform reals in [0, 1).
template <typename T>
concept UniformDrawSource = requires(T& source) {
  { source.uniform() } -> std::convertible_to<double>;
};

/// Which consumer a noise stream feeds. Keeps draws for different purposes
/// independent even when they share a (round, item) key.
enum class NoisePurpose : std::uint32_t {
  kSeedSelection = 1,
  kSeedBatch,
  kIndicators,
  kAttributeGate,
  kDropout,
  kThemeChoice,
  kCapSampling,
  kSplit,
};

struct StreamId {
  std::uint64_t round = 0;
  std::uint64_t item = 0;
  NoisePurpose purpose = NoisePurpose::kSeedBatch;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    const StreamId& id) noexcept {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ id.round);
  h = mix64(h ^ id.item);
  h = mix64(h ^ static_cast<std::uint64_t>(id.purpose));
  return h;
}

/// Reproducible draw sequence keyed by (master_seed, stream id).
///
/// Two streams built from the same key produce the same sequence no matter
/// which thread builds them or in which order, which is what lets per-record
/// work run concurrently without changing results.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, StreamId id)
      : master_seed_(master_seed), id_(id), engine_(derive_seed(master_seed, id)) {}

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const StreamId& id() const noexcept { return id_; }

 private:
  std::uint64_t master_seed_;
  StreamId id_;
  std::mt19937_64 engine_;
};

/// Fixed draw list, mostly for tests that need to force a particular branch.
class ScriptedDraws {
 public:
  explicit ScriptedDraws(std::vector<double> draws) : draws_(std::move(draws)) {}

  double uniform() {
    if (next_ >= draws_.size()) {
      throw std::out_of_range("ScriptedDraws exhausted");
    }
    return draws_[next_++];
  }

  std::size_t consumed() const noexcept { return next_; }

 private:
  std::vector<double> draws_;
  std::size_t next_ = 0;
};

/// Maps one uniform draw onto {0, ..., n-1}. n must be positive.
template <UniformDrawSource Source>
std::size_t draw_index(Source& source, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("draw_index: empty domain");
  }
  auto idx = static_cast<std::size_t>(source.uniform() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

/// Fisher-Yates shuffle driven by the draw source. std::shuffle is avoided
/// because its use of the engine is implementation-defined.
template <UniformDrawSource Source, typename T>
void shuffle_with(Source& source, std::span<T> items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = draw_index(source, i);
    std::swap(items[i - 1], items[j]);
  }
}

/// k distinct indices from {0, ..., n-1}, uniformly without replacement, in
/// draw order. Partial Fisher-Yates.
template <UniformDrawSource Source>
std::vector<std::size_t> sample_without_replacement(Source& source, std::size_t n,
                                                    std::size_t k) {
  if (k > n) {
    throw std::invalid_argument("sample_without_replacement: k exceeds n");
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + draw_index(source, n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace synthforge
