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

#include "synthforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "synthforge/csv.hpp"
#include "synthforge/noise.hpp"

namespace synthforge {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: break;
  }
  return "unassigned";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  return std::nullopt;
}

std::optional<InputFormat> parse_input_format(std::string_view name) {
  if (name == "csv") return InputFormat::kCsv;
  if (name == "jsonl") return InputFormat::kJsonl;
  return std::nullopt;
}

LabelClass LabelMapping::map(const std::string& source_label) const {
  auto it = table_.find(source_label);
  if (it == table_.end()) {
    throw CorpusError("unmapped label '" + source_label + "'");
  }
  return it->second;
}

namespace {

LabelClass parse_target(const json& value, const std::string& key) {
  if (value.is_number_integer()) {
    auto v = value.get<long long>();
    if (v == 0) return LabelClass::kNonHarmful;
    if (v == 1) return LabelClass::kHarmful;
  } else if (value.is_string()) {
    auto s = value.get<std::string>();
    if (s == "harmful") return LabelClass::kHarmful;
    if (s == "non_harmful" || s == "nonharmful") return LabelClass::kNonHarmful;
  }
  throw CorpusError("label '" + key + "' must map to 0/1 or harmful/non_harmful");
}

std::optional<std::size_t> optional_size(const json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return cfg.at(key).get<std::size_t>();
}

}  // namespace

DatasetConfig load_dataset_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CorpusError("cannot open mapping file " + path.string());
  }
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw CorpusError("mapping file " + path.string() + ": " + e.what());
  }

  DatasetConfig out;
  try {
    out.source = cfg.value("source", path.stem().string());
    if (cfg.contains("columns")) {
      const auto& cols = cfg.at("columns");
      out.columns.text = cols.value("text", out.columns.text);
      out.columns.label = cols.value("label", out.columns.label);
      if (cols.contains("id")) {
        if (cols.at("id").is_null()) {
          out.columns.id.reset();
        } else {
          out.columns.id = cols.at("id").get<std::string>();
        }
      }
    }
    if (!cfg.contains("labels") || !cfg.at("labels").is_object()) {
      throw CorpusError("mapping file " + path.string() + ": missing 'labels' table");
    }
    std::map<std::string, LabelClass> table;
    for (const auto& [key, value] : cfg.at("labels").items()) {
      table.emplace(key, parse_target(value, key));
    }
    out.mapping = LabelMapping(std::move(table));
    out.max_harmful = optional_size(cfg, "max_harmful");
    out.max_nonharmful = optional_size(cfg, "max_nonharmful");
  } catch (const json::exception& e) {
    throw CorpusError("mapping file " + path.string() + ": " + e.what());
  }
  return out;
}

std::vector<Example> Corpus::harmful() const {
  std::vector<Example> out;
  for (const auto& e : examples_) {
    if (e.label == LabelClass::kHarmful) out.push_back(e);
  }
  return out;
}

std::size_t Corpus::count(LabelClass label) const {
  return static_cast<std::size_t>(std::count_if(
      examples_.begin(), examples_.end(), [&](const Example& e) { return e.label == label; }));
}

std::size_t Corpus::count(LabelClass label, Split split) const {
  return static_cast<std::size_t>(
      std::count_if(examples_.begin(), examples_.end(),
                    [&](const Example& e) { return e.label == label && e.split == split; }));
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

class IdRegistry {
 public:
  std::string assign(std::optional<std::string> id, const std::string& source,
                     std::size_t row, std::size_t line) {
    std::string value = id && !id->empty() ? *id : source + ":" + std::to_string(row);
    if (!seen_.insert(value).second) {
      throw CorpusError("duplicate id '" + value + "'", line);
    }
    return value;
  }

 private:
  std::unordered_set<std::string> seen_;
};

LabelClass map_label(const LabelMapping& mapping, const std::string& raw, std::size_t line) {
  auto key = trim(raw);
  if (!mapping.contains(key)) {
    throw CorpusError("unmapped label '" + key + "'", line);
  }
  return mapping.map(key);
}

Corpus ingest_csv(std::istream& in, const LabelMapping& mapping, const std::string& source,
                  const ColumnSpec& columns) {
  csv::Reader reader(in);
  std::vector<Example> out;
  IdRegistry ids;
  try {
    auto header = reader.next();
    if (!header) return Corpus(source, {});
    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < header->fields.size(); ++i) {
        if (trim(header->fields[i]) == name) return i;
      }
      return std::nullopt;
    };
    auto text_col = find_col(columns.text);
    auto label_col = find_col(columns.label);
    if (!text_col) throw CorpusError("header lacks text column '" + columns.text + "'", 1);
    if (!label_col) throw CorpusError("header lacks label column '" + columns.label + "'", 1);
    std::optional<std::size_t> id_col;
    if (columns.id) id_col = find_col(*columns.id);

    std::size_t row = 0;
    while (auto rec = reader.next()) {
      if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // blank line
      ++row;
      if (rec->fields.size() != header->fields.size()) {
        throw CorpusError("expected " + std::to_string(header->fields.size()) + " fields, got " +
                              std::to_string(rec->fields.size()),
                          rec->line);
      }
      Example e;
      e.text = rec->fields[*text_col];
      e.label = map_label(mapping, rec->fields[*label_col], rec->line);
      e.source = source;
      std::optional<std::string> raw_id;
      if (id_col) raw_id = trim(rec->fields[*id_col]);
      e.id = ids.assign(raw_id, source, row, rec->line);
      out.push_back(std::move(e));
    }
  } catch (const csv::ParseError& err) {
    throw CorpusError(err.what());
  }
  return Corpus(source, std::move(out));
}

std::string label_key(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return value.dump();
}

Corpus ingest_jsonl(std::istream& in, const LabelMapping& mapping, const std::string& source,
                    const ColumnSpec& columns) {
  std::vector<Example> out;
  IdRegistry ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusError(std::string("malformed json: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw CorpusError("expected a json object", line_no);
    if (!obj.contains(columns.text) || !obj.at(columns.text).is_string()) {
      throw CorpusError("missing string field '" + columns.text + "'", line_no);
    }
    if (!obj.contains(columns.label) || obj.at(columns.label).is_null()) {
      throw CorpusError("missing field '" + columns.label + "'", line_no);
    }
    Example e;
    e.text = obj.at(columns.text).get<std::string>();
    e.label = map_label(mapping, label_key(obj.at(columns.label)), line_no);
    e.source = source;
    std::optional<std::string> raw_id;
    if (columns.id && obj.contains(*columns.id) && !obj.at(*columns.id).is_null()) {
      const auto& v = obj.at(*columns.id);
      raw_id = v.is_string() ? v.get<std::string>() : v.dump();
    }
    e.id = ids.assign(raw_id, source, row, line_no);
    out.push_back(std::move(e));
  }
  return Corpus(source, std::move(out));
}

}  // namespace

Corpus ingest(const std::filesystem::path& path, InputFormat format, const LabelMapping& mapping,
              const std::string& source, const ColumnSpec& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open input file " + path.string());
  return format == InputFormat::kCsv ? ingest_csv(in, mapping, source, columns)
                                     : ingest_jsonl(in, mapping, source, columns);
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_vowel);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string undouble(std::string stem) {
  auto n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2]) {
    char c = stem[n - 1];
    bool consonant = std::isalpha(static_cast<unsigned char>(c)) && !is_vowel(c);
    if (consonant && c != 'l' && c != 's' && c != 'z') stem.pop_back();
  }
  return stem;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Removes "http(s)://..." to the end of the token and "@word" runs.
std::string strip_links_and_mentions(std::string_view token) {
  std::string t(token);
  for (std::string_view scheme : {"https://", "http://"}) {
    auto pos = t.find(scheme);
    if (pos != std::string::npos) t.erase(pos);
  }
  std::string out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size();) {
    if (t[i] == '@' && i + 1 < t.size() && is_word_char(t[i + 1])) {
      ++i;
      while (i < t.size() && is_word_char(t[i])) ++i;
      continue;
    }
    out.push_back(t[i++]);
  }
  return out;
}

}  // namespace

std::string suffix_stem(std::string_view token) {
  std::string w(token);
  const auto n = w.size();
  if (ends_with(w, "'s") && n > 2) return w.substr(0, n - 2);
  if (ends_with(w, "ies") && n > 4) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, n - 2);
  if (ends_with(w, "es") && n > 3) {
    std::string_view stem = std::string_view(w).substr(0, n - 2);
    if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
        ends_with(stem, "ch") || ends_with(stem, "sh")) {
      return std::string(stem);
    }
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && n > 2) {
    std::string_view stem = std::string_view(w).substr(0, n - 1);
    // Need a vowel somewhere other than directly before the s.
    if (has_vowel(stem.substr(0, stem.size() - 1))) return std::string(stem);
    return w;
  }
  if (ends_with(w, "ing") && n > 4) {
    std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return undouble(std::move(stem));
    return w;
  }
  if (ends_with(w, "ed") && n > 3) {
    std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem)) return undouble(std::move(stem));
  }
  return w;
}

std::string normalize(std::string_view text, const Lemmatizer& lemmatizer) {
  std::string lowered(text);
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  std::string out;
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_ascii_space(lowered[i])) ++i;
    std::size_t start = i;
    while (i < lowered.size() && !is_ascii_space(lowered[i])) ++i;
    if (start == i) break;
    std::string token = strip_links_and_mentions(std::string_view(lowered).substr(start, i - start));
    if (token.empty()) continue;
    // Iterate to a fixed point; every rule shortens the token, so this ends.
    for (std::string next = lemmatizer(token); next != token && !next.empty();
         next = lemmatizer(token)) {
      token = std::move(next);
    }
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cleaning

DedupResult dedup(const Corpus& corpus, const Lemmatizer& lemmatizer) {
  std::unordered_set<std::string> seen;
  std::vector<Example> kept;
  kept.reserve(corpus.size());
  for (const auto& e : corpus.examples()) {
    if (seen.insert(normalize(e.text, lemmatizer)).second) kept.push_back(e);
  }
  std::size_t removed = corpus.size() - kept.size();
  return {Corpus(corpus.name(), std::move(kept)), removed};
}

Corpus drop_blank(const Corpus& corpus, const Lemmatizer& lemmatizer) {
  std::vector<Example> kept;
  for (const auto& e : corpus.examples()) {
    if (!normalize(e.text, lemmatizer).empty()) kept.push_back(e);
  }
  return Corpus(corpus.name(), std::move(kept));
}

Corpus language_filter(const Corpus& corpus, const LanguagePredicate& keep) {
  std::vector<Example> kept;
  for (const auto& e : corpus.examples()) {
    if (keep(e.text)) kept.push_back(e);
  }
  return Corpus(corpus.name(), std::move(kept));
}

namespace {

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "about", "all",  "am",    "an",   "and",  "are",   "as",    "at",   "be",
      "been",  "but",   "by",   "can",   "do",   "does", "for",   "from",  "had",  "has",
      "have",  "he",    "her",  "him",   "his",  "how",  "i",     "if",    "in",   "is",
      "it",    "its",   "just", "me",    "my",   "no",   "not",   "of",    "on",   "or",
      "our",   "she",   "so",   "than",  "that", "the",  "their", "them",  "then", "there",
      "these", "they",  "this", "to",    "too",  "up",   "us",    "very",  "was",  "we",
      "were",  "what",  "when", "where", "who",  "why",  "will",  "with",  "you",  "your"};
  return words;
}

}  // namespace

bool looks_english(std::string_view text) {
  std::size_t code_points = 0;
  std::size_t ascii_letters = 0;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if ((c & 0xC0) == 0x80) continue;  // utf-8 continuation byte
    if (c < 0x80 && is_ascii_space(ch)) continue;
    ++code_points;
    if (c < 0x80 && std::isalpha(c)) ++ascii_letters;
  }
  if (code_points == 0) return false;
  if (static_cast<double>(ascii_letters) < 0.6 * static_cast<double>(code_points)) return false;

  const auto& stop = english_stopwords();
  std::string word;
  auto flush = [&] {
    bool hit = !word.empty() && stop.contains(word);
    word.clear();
    return hit;
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalpha(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (flush()) {
      return true;
    }
  }
  return flush();
}

// ---------------------------------------------------------------------------
// Splitting

SplitSizes split_sizes(std::size_t n, const SplitRatio& ratio) {
  if (ratio.train == 0 || ratio.val == 0 || ratio.test == 0) {
    throw CorpusError("split ratio components must be positive");
  }
  SplitSizes s;
  s.train = static_cast<std::size_t>(n * std::uint64_t{ratio.train} / ratio.total());
  s.val = static_cast<std::size_t>(n * std::uint64_t{ratio.val} / ratio.total());
  s.test = n - s.train - s.val;
  return s;
}

namespace {

std::vector<std::size_t> class_indices(const Corpus& corpus, LabelClass label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.examples()[i].label == label) idx.push_back(i);
  }
  return idx;
}

}  // namespace

Corpus split(const Corpus& corpus, const SplitRatio& ratio, std::uint64_t seed) {
  if (corpus.empty()) throw CorpusError("cannot split an empty corpus");
  std::vector<Example> out = corpus.examples();
  for (LabelClass label : {LabelClass::kHarmful, LabelClass::kNonHarmful}) {
    auto idx = class_indices(corpus, label);
    if (idx.empty()) continue;
    if (idx.size() < 3) {
      throw CorpusError(std::string(label == LabelClass::kHarmful ? "harmful" : "non-harmful") +
                        " class has " + std::to_string(idx.size()) +
                        " examples; at least 3 are needed to populate every split");
    }
    NoiseStream noise(seed, {0, static_cast<std::uint64_t>(label), NoisePurpose::kSplit});
    shuffle_with(noise, std::span<std::size_t>(idx));
    auto sizes = split_sizes(idx.size(), ratio);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Split s = k < sizes.train                ? Split::kTrain
                : k < sizes.train + sizes.val ? Split::kVal
                                              : Split::kTest;
      out[idx[k]].split = s;
    }
  }
  return Corpus(corpus.name(), std::move(out));
}

Corpus cap_class(const Corpus& corpus, LabelClass label, std::size_t max_count,
                 std::uint64_t seed) {
  auto idx = class_indices(corpus, label);
  if (idx.size() <= max_count) return corpus;
  NoiseStream noise(seed, {0, static_cast<std::uint64_t>(label), NoisePurpose::kCapSampling});
  auto chosen = sample_without_replacement(noise, idx.size(), max_count);
  std::vector<bool> keep(corpus.size(), true);
  for (auto i : idx) keep[i] = false;
  for (auto c : chosen) keep[idx[c]] = true;
  std::vector<Example> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i]) out.push_back(corpus.examples()[i]);
  }
  return Corpus(corpus.name(), std::move(out));
}

// ---------------------------------------------------------------------------
// Canonical jsonl

std::string to_jsonl_line(const Example& example) {
  ordered_json j;
  j["id"] = example.id;
  j["text"] = example.text;
  j["label"] = static_cast<int>(example.label);
  j["source"] = example.source;
  j["split"] = to_string(example.split);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_canonical_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot write " + path.string());
  for (const auto& e : corpus.examples()) out << to_jsonl_line(e) << '\n';
  if (!out) throw CorpusError("write failed for " + path.string());
}

Corpus read_canonical_jsonl(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file " + path.string());
  std::vector<Example> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      Example e;
      e.id = j.at("id").get<std::string>();
      e.text = j.at("text").get<std::string>();
      int label = j.at("label").get<int>();
      if (label != 0 && label != 1) throw CorpusError("label must be 0 or 1", line_no);
      e.label = static_cast<LabelClass>(label);
      e.source = j.value("source", std::string{});
      auto split = parse_split(j.value("split", std::string("unassigned")));
      if (!split) throw CorpusError("unknown split", line_no);
      e.split = *split;
      if (!ids.insert(e.id).second) throw CorpusError("duplicate id '" + e.id + "'", line_no);
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw CorpusError(e.what(), line_no);
    }
  }
  if (name.empty()) name = path.stem().string();
  return Corpus(std::move(name), std::move(out));
}

}  // namespace synthforge
