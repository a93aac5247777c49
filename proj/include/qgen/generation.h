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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgen/catalog.h"
#include "qgen/textpipe.h"

namespace qgen {

class CompletionProvider;

// Method labels as they appear in query-set and score files.
inline constexpr std::string_view kEntityNameMethod = "entity_name";
inline constexpr std::string_view kTemplateMethod = "template";
std::string LlmMethodLabel(std::string_view provider_label);

inline constexpr std::string_view kArtistPlaceholder = "$ARTIST";

struct Template {
  std::string pattern;
  std::optional<double> weight;
};

// Reads `weight<TAB>pattern` lines (a line without a tab is a bare pattern
// with no weight). Returns templates ordered by descending weight, stable on
// ties; unweighted templates sort as weight 0. Templates consisting only of
// the placeholder are rejected unless allow_bare_placeholder is set.
// Templates without a placeholder produce a message in *warnings.
std::vector<Template> LoadTemplates(const std::filesystem::path& path,
                                    std::vector<std::string>* warnings,
                                    bool allow_bare_placeholder = false);

// Stable sort by descending weight.
void SortTemplates(std::vector<Template>& templates);

std::string InstantiateTemplate(std::string_view pattern,
                                std::string_view entity_name);

struct GeneratedQuery {
  std::string entity_id;
  std::string method;
  int rank = 0;  // 1-based
  std::string text;  // as produced, before wakeword stripping
  TokenSeq tokens;   // StripWakeword(Tokenize(text))

  // The text with any wakeword prefix removed, otherwise verbatim.
  std::string normalized_text;

  bool operator==(const GeneratedQuery&) const = default;
};

GeneratedQuery MakeQuery(std::string entity_id, std::string method, int rank,
                         std::string text, const PipelineConfig& cfg);

std::vector<GeneratedQuery> GenerateEntityName(const Entity& e,
                                               const PipelineConfig& cfg);

// First k templates instantiated with e.name. Throws if k exceeds the
// template count.
std::vector<GeneratedQuery> GenerateFromTemplates(
    const Entity& e, const std::vector<Template>& templates, int k,
    const PipelineConfig& cfg);

inline constexpr std::string_view kDefaultPromptExamples =
    "play, queue, turn on, etc";
inline constexpr int kPromptQueryCount = 40;

struct Prompt {
  std::string text;
  std::string entity_id;
  int k_requested = 0;
};

// Fills the prompt template in a single pass; placeholder-looking text
// inside the substituted values is left alone. Throws if the description
// is empty.
Prompt BuildPrompt(const Entity& e, int k,
                   std::string_view examples = kDefaultPromptExamples);

// Splits a completion into query lines, stripping enumeration markers
// (`12.`, `3)`, `-`, `*`) and surrounding quotes; drops blank lines.
std::vector<std::string> ParseCompletion(std::string_view raw);

struct LlmOutcome {
  std::string entity_id;
  std::vector<GeneratedQuery> queries;
  std::size_t parsed_lines = 0;
  bool shortfall = false;  // fewer than k lines were parsed
  int attempts = 0;
  std::optional<std::string> error;  // set when every attempt failed
};

struct LlmOptions {
  int k = kPromptQueryCount;
  std::string examples = std::string(kDefaultPromptExamples);
};

// One completion request for a 40-query prompt; keeps the first k lines.
LlmOutcome GenerateLlm(const Entity& e, CompletionProvider& provider,
                       const LlmOptions& options, const PipelineConfig& cfg);

// Runs GenerateLlm for every entity with at most max_in_flight concurrent
// requests. Output follows catalog order regardless of completion order.
std::vector<LlmOutcome> GenerateLlmBatch(const Catalog& catalog,
                                         CompletionProvider& provider,
                                         const LlmOptions& options,
                                         const PipelineConfig& cfg,
                                         int max_in_flight);

// Query-set files: one JSON record per line with entity_id, method, rank
// and text. Tokens are recomputed on read.
void WriteQuerySet(const std::filesystem::path& path,
                   const std::vector<GeneratedQuery>& queries);
std::vector<GeneratedQuery> ReadQuerySet(const std::filesystem::path& path,
                                         const PipelineConfig& cfg);

// Stand-in query log for LM training: each line instantiates a template
// drawn in proportion to its weight (unweighted counts as 1) with an
// entity drawn uniformly. Deterministic for a given seed.
std::vector<std::string> SynthesizeQueryLog(
    const Catalog& catalog, const std::vector<Template>& templates,
    std::size_t count, std::uint64_t seed);

// Sorts by (entity_id, method, rank) and checks ranks are 1..n per group.
void CanonicalizeQueries(std::vector<GeneratedQuery>& queries);

}  // namespace qgen
