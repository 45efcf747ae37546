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

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace synthforge::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
class Reader {
 public:
  explicit Reader(std::istream& in, char delimiter = ',') : in_(in), delim_(delimiter) {}

  std::optional<Record> next() {
    Record rec;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool field_was_quoted = false;
    rec.line = line_;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"') {
        if (!field.empty() || field_was_quoted) {
          throw ParseError(line_, "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
      } else if (ch == delim_) {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (ch == '\r') {
        // swallowed; the following '\n' ends the record
      } else if (ch == '\n') {
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      } else {
        if (field_was_quoted) {
          throw ParseError(line_, "characters after closing quote");
        }
        field.push_back(ch);
      }
    }
    if (in_quotes) throw ParseError(rec.line, "unterminated quoted field");
    if (!any) return std::nullopt;
    rec.fields.push_back(std::move(field));
    return rec;
  }

 private:
  std::istream& in_;
  char delim_;
  std::size_t line_ = 1;
};

}  // namespace synthforge::csv
