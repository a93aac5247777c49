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

#include "qgen/textpipe.h"

#include <algorithm>
#include <fstream>

#include "qgen/error.h"

namespace qgen {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one UTF-8 code point starting at text[pos]; advances pos.
char32_t DecodeUtf8(std::string_view text, std::size_t& pos) {
  auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra;
  char32_t cp;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return kInvalid;
  }
  for (int i = 1; i <= extra; ++i) {
    unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += extra + 1;
  // Overlong forms and surrogates.
  if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
      (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
      (cp >= 0xD800 && cp <= 0xDFFF)) {
    return kInvalid;
  }
  return cp;
}

void EncodeUtf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII letters and digits, plus non-ASCII code points outside the
// punctuation, symbol, space and control blocks.
bool IsAlnum(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (cp == kInvalid) return false;
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xE000 && cp <= 0xF8FF) return false;
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;
  if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  return true;
}

// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic capitals. Other scripts pass through unchanged.
char32_t ToLower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0x80) return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return cp | 1;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

std::string Trim(const std::string& s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<std::string>& DefaultStopwords() {
  static const std::vector<std::string> kStopwords = {
      "a",    "an",   "and",   "are",  "as",    "at",    "be",
      "but",  "by",   "for",   "if",   "in",    "into",  "is",
      "it",   "no",   "not",   "of",   "on",    "or",    "such",
      "that", "the",  "their", "then", "there", "these", "they",
      "this", "to",   "was",   "will", "with"};
  return kStopwords;
}

PipelineConfig PipelineConfig::Default() {
  PipelineConfig cfg;
  cfg.stopwords.insert(DefaultStopwords().begin(), DefaultStopwords().end());
  cfg.wakewords.push_back({"hey", "va"});
  cfg.stemming_enabled = true;
  return cfg;
}

std::vector<TokenSpan> TokenizeWithOffsets(std::string_view text) {
  std::vector<TokenSpan> spans;
  TokenSpan current;
  bool in_token = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    char32_t cp = DecodeUtf8(text, pos);
    if (IsAlnum(cp)) {
      if (!in_token) {
        current = TokenSpan{};
        current.begin = start;
        in_token = true;
      }
      EncodeUtf8(ToLower(cp), current.token);
      current.end = pos;
    } else if (in_token) {
      spans.push_back(std::move(current));
      in_token = false;
    }
  }
  if (in_token) spans.push_back(std::move(current));
  return spans;
}

TokenSeq Tokenize(std::string_view text) {
  TokenSeq tokens;
  for (auto& span : TokenizeWithOffsets(text)) {
    tokens.push_back(std::move(span.token));
  }
  return tokens;
}

TokenSeq RemoveStopwords(const TokenSeq& tokens, const PipelineConfig& cfg) {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!cfg.stopwords.contains(t)) out.push_back(t);
  }
  return out;
}

TokenSeq PreprocessForRetrieval(std::string_view text,
                                const PipelineConfig& cfg) {
  TokenSeq tokens = RemoveStopwords(Tokenize(text), cfg);
  if (!cfg.stemming_enabled) return tokens;
  TokenSeq out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    std::string stem = PorterStem(t);
    if (!stem.empty()) out.push_back(std::move(stem));
  }
  return out;
}

std::size_t MatchWakeword(const TokenSeq& tokens, const PipelineConfig& cfg) {
  std::size_t best = 0;
  for (const auto& wake : cfg.wakewords) {
    if (wake.empty() || wake.size() > tokens.size()) continue;
    if (std::equal(wake.begin(), wake.end(), tokens.begin())) {
      best = std::max(best, wake.size());
    }
  }
  return best;
}

TokenSeq StripWakeword(const TokenSeq& tokens, const PipelineConfig& cfg) {
  std::size_t n = MatchWakeword(tokens, cfg);
  return TokenSeq(tokens.begin() + static_cast<std::ptrdiff_t>(n),
                  tokens.end());
}

std::string StripWakewordText(std::string_view text,
                              const PipelineConfig& cfg) {
  auto spans = TokenizeWithOffsets(text);
  TokenSeq tokens;
  tokens.reserve(spans.size());
  for (const auto& s : spans) tokens.push_back(s.token);
  std::size_t n = MatchWakeword(tokens, cfg);
  if (n == 0) return std::string(text);
  if (n == spans.size()) return "";
  return std::string(text.substr(spans[n].begin));
}

TokenSeq PreprocessForLm(std::string_view text, const PipelineConfig& cfg) {
  return StripWakeword(Tokenize(text), cfg);
}

std::string JoinTokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::set<std::string> LoadStopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword file: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& t : Tokenize(line)) words.insert(std::move(t));
  }
  return words;
}

std::vector<TokenSeq> LoadWakewords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open wakeword file: " + path.string());
  std::vector<TokenSeq> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    TokenSeq phrase = Tokenize(line);
    if (phrase.empty()) continue;
    phrases.push_back(std::move(phrase));
  }
  return phrases;
}

}  // namespace qgen
