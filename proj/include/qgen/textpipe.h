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

#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qgen {

// Ordered, non-empty, whitespace-free tokens.
using TokenSeq = std::vector<std::string>;

// Shared normalization settings for generation, LM scoring and retrieval.
struct PipelineConfig {
  std::set<std::string> stopwords;
  std::vector<TokenSeq> wakewords;
  bool stemming_enabled = true;

  // Default English stopword list, the "hey va" wakeword and stemming on.
  static PipelineConfig Default();
};

// The shipped default English stopword list (also in data/stopwords_en.txt).
const std::vector<std::string>& DefaultStopwords();

// A token together with the byte range [begin, end) it came from.
struct TokenSpan {
  std::string token;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Maps every non-alphanumeric code point to a space, lowercases, and splits.
// Input is UTF-8; invalid byte sequences are treated as separators.
TokenSeq Tokenize(std::string_view text);
std::vector<TokenSpan> TokenizeWithOffsets(std::string_view text);

TokenSeq RemoveStopwords(const TokenSeq& tokens, const PipelineConfig& cfg);

// Classic Porter (1980) stemmer. A lone "s" stems to the empty string;
// PreprocessForRetrieval drops such tokens.
std::string PorterStem(std::string_view token);

// tokenize -> remove stopwords -> stem, in that order.
TokenSeq PreprocessForRetrieval(std::string_view text,
                                const PipelineConfig& cfg);

// Number of leading tokens covered by the longest matching wakeword, or 0.
std::size_t MatchWakeword(const TokenSeq& tokens, const PipelineConfig& cfg);

// Removes at most one wakeword prefix.
TokenSeq StripWakeword(const TokenSeq& tokens, const PipelineConfig& cfg);

// Same as StripWakeword but on raw text: the matched prefix and the
// separators following it are cut, the rest is returned verbatim.
std::string StripWakewordText(std::string_view text,
                              const PipelineConfig& cfg);

// LM-side normalization: tokenize + strip_wakeword, no stopwords/stemming.
TokenSeq PreprocessForLm(std::string_view text, const PipelineConfig& cfg);

std::string JoinTokens(const TokenSeq& tokens);

// One token per line. Blank lines are ignored.
std::set<std::string> LoadStopwords(const std::filesystem::path& path);

// One space-separated phrase per line, tokenized with Tokenize.
std::vector<TokenSeq> LoadWakewords(const std::filesystem::path& path);

}  // namespace qgen
