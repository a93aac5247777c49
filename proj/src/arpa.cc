// Copyright 2026 The qgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "qgen/error.h"
#include "qgen/jsonl.h"
#include "qgen/lm.h"

namespace qgen {
namespace {

constexpr double kArpaZero = -99.0;
const double kLn10 = std::log(10.0);

std::string FormatLog10(double natural_log) {
  if (!std::isfinite(natural_log)) return "-99";
  double v = natural_log / kLn10;
  if (v <= kArpaZero) return "-99";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseLog10(std::string_view text, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error("ARPA line " + std::to_string(line) + ": bad number '" +
                std::string(text) + "'");
  }
  if (v <= kArpaZero) return -std::numeric_limits<double>::infinity();
  return v * kLn10;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    auto end = line.find_first_of(" \t", pos);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

}  // namespace

std::string ArpaString(const NgramModel& model) {
  std::ostringstream out;
  out << "\\data\\\n";
  for (int n = 1; n <= model.order(); ++n) {
    out << "ngram " << n << "=" << model.table(n).size() << "\n";
  }
  for (int n = 1; n <= model.order(); ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [ngram, entry] : model.table(n)) {
      out << FormatLog10(entry.log_prob) << '\t';
      auto words = model.Words(ngram);
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out << ' ';
        out << words[i];
      }
      if (entry.log_backoff) out << '\t' << FormatLog10(*entry.log_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
  return out.str();
}

void ExportArpa(const NgramModel& model, const std::filesystem::path& path) {
  WriteTextFile(path, ArpaString(model));
}

NgramModel ParseArpa(std::string_view text) {
  std::vector<std::size_t> declared;
  std::vector<std::map<std::vector<std::string>, NgramModel::Entry>> tables;
  std::vector<std::string> vocab;

  enum class State { kPreamble, kData, kSection, kEnd };
  State state = State::kPreamble;
  int section = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fields = SplitFields(line);
    if (fields.empty()) continue;
    const std::string where = "ARPA line " + std::to_string(line_no) + ": ";

    if (line == "\\data\\") {
      if (state != State::kPreamble) throw Error(where + "duplicate \\data\\");
      state = State::kData;
      continue;
    }
    if (line == "\\end\\") {
      if (state == State::kPreamble) throw Error(where + "\\end\\ before \\data\\");
      state = State::kEnd;
      break;
    }
    if (line.starts_with("\\") && line.ends_with("-grams:")) {
      if (state == State::kPreamble) throw Error(where + "section before \\data\\");
      int n = 0;
      auto digits = line.substr(1, line.size() - 1 - std::string_view("-grams:").size());
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      if (res.ec != std::errc() || n != section + 1 ||
          n > static_cast<int>(declared.size())) {
        throw Error(where + "unexpected section header '" + std::string(line) + "'");
      }
      section = n;
      state = State::kSection;
      continue;
    }
    switch (state) {
      case State::kPreamble:
        continue;  // free text before \data\ is allowed
      case State::kData: {
        if (fields.size() != 2 || fields[0] != "ngram") {
          throw Error(where + "expected 'ngram N=count'");
        }
        auto eq = fields[1].find('=');
        int n = 0;
        std::size_t count = 0;
        if (eq == std::string_view::npos ||
            std::from_chars(fields[1].data(), fields[1].data() + eq, n).ec != std::errc() ||
            std::from_chars(fields[1].data() + eq + 1,
                            fields[1].data() + fields[1].size(), count).ec != std::errc() ||
            n != static_cast<int>(declared.size()) + 1) {
          throw Error(where + "malformed ngram count line");
        }
        declared.push_back(count);
        tables.emplace_back();
        break;
      }
      case State::kSection: {
        const auto n = static_cast<std::size_t>(section);
        if (fields.size() != n + 1 && fields.size() != n + 2) {
          throw Error(where + "expected " + std::to_string(n) + " words");
        }
        NgramModel::Entry entry;
        entry.log_prob = ParseLog10(fields[0], line_no);
        std::vector<std::string> words;
        for (std::size_t i = 1; i <= n; ++i) words.emplace_back(fields[i]);
        if (fields.size() == n + 2) {
          entry.log_backoff = ParseLog10(fields[n + 1], line_no);
        }
        if (n == 1) vocab.push_back(words[0]);
        if (!tables[n - 1].emplace(std::move(words), entry).second) {
          throw Error(where + "duplicate n-gram");
        }
        break;
      }
      case State::kEnd:
        break;
    }
  }
  if (state != State::kEnd) throw Error("ARPA file is missing \\end\\");
  if (declared.empty()) throw Error("ARPA file declares no n-gram orders");
  for (std::size_t n = 0; n < declared.size(); ++n) {
    if (tables[n].size() != declared[n]) {
      throw Error("ARPA order " + std::to_string(n + 1) + ": header declares " +
                  std::to_string(declared[n]) + " n-grams but body has " +
                  std::to_string(tables[n].size()));
    }
  }
  // Markers missing from the file get probability zero.
  for (auto marker : {kSentenceBegin, kSentenceEnd, kUnknownToken}) {
    std::vector<std::string> key{std::string(marker)};
    if (!tables[0].contains(key)) {
      tables[0].emplace(key, NgramModel::Entry{
                                 -std::numeric_limits<double>::infinity(), {}});
    }
  }
  return NgramModel(static_cast<int>(declared.size()), std::move(vocab),
                    std::move(tables));
}

NgramModel ImportArpa(const std::filesystem::path& path) {
  return ParseArpa(ReadTextFile(path));
}

}  // namespace qgen
