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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace synthforge {

enum class LabelClass : int { kNonHarmful = 0, kHarmful = 1 };

enum class Split { kUnassigned, kTrain, kVal, kTest };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

struct Example {
  std::string id;
  std::string text;
  LabelClass label = LabelClass::kNonHarmful;
  std::string source;
  Split split = Split::kUnassigned;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Raised for ingestion problems. line() is 0 when the error is not tied to
/// a particular input line.
class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Per-dataset table from source label strings to the binary label.
class LabelMapping {
 public:
  LabelMapping() = default;
  explicit LabelMapping(std::map<std::string, LabelClass> table) : table_(std::move(table)) {}

  /// Throws CorpusError naming the label when it is not in the table.
  LabelClass map(const std::string& source_label) const;
  bool contains(const std::string& source_label) const { return table_.contains(source_label); }
  const std::map<std::string, LabelClass>& table() const noexcept { return table_; }

 private:
  std::map<std::string, LabelClass> table_;
};

/// Column names to read from raw files. id is optional; when absent ids are
/// synthesized as "<source>:<row>".
struct ColumnSpec {
  std::string text = "text";
  std::string label = "label";
  std::optional<std::string> id = "id";
};

/// Everything needed to bring one raw dataset in, as stored in a mapping
/// config file.
struct DatasetConfig {
  std::string source;
  ColumnSpec columns;
  LabelMapping mapping;
  std::optional<std::size_t> max_harmful;
  std::optional<std::size_t> max_nonharmful;
};

/// Reads a JSON mapping config. Throws CorpusError when the file is missing
/// (the message names the path) or malformed.
DatasetConfig load_dataset_config(const std::filesystem::path& path);

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string name, std::vector<Example> examples)
      : name_(std::move(name)), examples_(std::move(examples)) {}

  const std::string& name() const noexcept { return name_; }
  const std::vector<Example>& examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }

  /// The harmful subset, derived on demand.
  std::vector<Example> harmful() const;
  std::size_t count(LabelClass label) const;
  std::size_t count(LabelClass label, Split split) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::string name_;
  std::vector<Example> examples_;
};

enum class InputFormat { kCsv, kJsonl };
std::optional<InputFormat> parse_input_format(std::string_view name);

/// Reads a raw csv (header row required) or jsonl file. Row order is
/// preserved and every row becomes one example with split unassigned.
Corpus ingest(const std::filesystem::path& path, InputFormat format,
              const LabelMapping& mapping, const std::string& source,
              const ColumnSpec& columns = {});

// ---------------------------------------------------------------------------
// Normalization

/// Maps one lowercase token to its lemma key.
using Lemmatizer = std::function<std::string(std::string_view)>;

/// Suffix-stripping stemmer. Applies the first matching rule among
/// 's, ies->y, sses->ss, es, s, ing, ed. Guards: "es" only after s/x/z/ch/sh;
/// "s" is kept after "ss" or when the only vowel of the stem sits right
/// before it (this, was, bus); "ing"/"ed" need a vowel in what remains, and
/// a trailing doubled consonant (other than l, s, z) is then undoubled.
std::string suffix_stem(std::string_view token);

/// Lowercase, strip URLs and @mentions, collapse whitespace, lemmatize each
/// token (iterated to a fixed point so the whole function is idempotent).
std::string normalize(std::string_view text, const Lemmatizer& lemmatizer = suffix_stem);

// ---------------------------------------------------------------------------
// Cleaning and splitting

struct DedupResult {
  Corpus corpus;
  std::size_t removed = 0;
};

/// Keeps the first example for each normalization key.
DedupResult dedup(const Corpus& corpus, const Lemmatizer& lemmatizer = suffix_stem);

/// Drops examples whose normalized text is empty (e.g. a bare URL).
Corpus drop_blank(const Corpus& corpus, const Lemmatizer& lemmatizer = suffix_stem);

using LanguagePredicate = std::function<bool(std::string_view)>;

Corpus language_filter(const Corpus& corpus, const LanguagePredicate& keep);

/// Default language check: at least 60% of the non-space code points are
/// ASCII letters and at least one token is a common English stopword.
bool looks_english(std::string_view text);

/// Ratio as integer parts, e.g. 7:1:2.
struct SplitRatio {
  std::uint32_t train = 7;
  std::uint32_t val = 1;
  std::uint32_t test = 2;

  std::uint64_t total() const noexcept {
    return std::uint64_t{train} + val + test;
  }
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

/// floor for train and val, remainder to test.
SplitSizes split_sizes(std::size_t n, const SplitRatio& ratio);

/// Stratified seeded split. Each class is shuffled independently and cut by
/// split_sizes. Example order is unchanged; only the split field is set.
/// Throws CorpusError if the corpus is empty or a present class has fewer
/// than 3 members.
Corpus split(const Corpus& corpus, const SplitRatio& ratio, std::uint64_t seed);

/// Keeps at most max_count examples of the given class, chosen uniformly
/// under seed; other examples and relative order are untouched.
Corpus cap_class(const Corpus& corpus, LabelClass label, std::size_t max_count,
                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Canonical jsonl

std::string to_jsonl_line(const Example& example);
void write_canonical_jsonl(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_canonical_jsonl(const std::filesystem::path& path, std::string name = {});

}  // namespace synthforge
