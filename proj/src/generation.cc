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

#include "qgen/generation.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>
#include <tuple>

#include "qgen/error.h"
#include "qgen/jsonl.h"
#include "qgen/provider.h"
#include "rng.h"

namespace qgen {
namespace {

constexpr std::string_view kPromptTemplate =
    "[ARTIST DESCRIPTION]\n"
    "\n"
    "Generate [K] queries based on the information above about [ARTIST NAME] "
    "to play music or learn more about [ARTIST NAME].\n"
    "\n"
    "Here are some examples: [EXAMPLES]";

std::string_view TrimView(std::string_view s) {
  const char* ws = " \t\r\n\v\f";
  auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::string_view StripQuotes(std::string_view s) {
  static constexpr std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\"", "\""},
      {"'", "'"},
      {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // curly double
      {"\xE2\x80\x98", "\xE2\x80\x99"},  // curly single
  };
  for (const auto& [open, close] : kPairs) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) &&
        s.ends_with(close)) {
      return TrimView(
          s.substr(open.size(), s.size() - open.size() - close.size()));
    }
  }
  return s;
}

std::string_view StripEnumeration(std::string_view s) {
  std::size_t i = 0;
  if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
    i = 1;
  } else {
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == 0 || i >= s.size() || (s[i] != '.' && s[i] != ')')) return s;
    ++i;
  }
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

}  // namespace

std::string LlmMethodLabel(std::string_view provider_label) {
  return "llm:" + std::string(provider_label);
}

void SortTemplates(std::vector<Template>& templates) {
  std::stable_sort(templates.begin(), templates.end(),
                   [](const Template& a, const Template& b) {
                     return a.weight.value_or(0.0) > b.weight.value_or(0.0);
                   });
}

std::vector<Template> LoadTemplates(const std::filesystem::path& path,
                                    std::vector<std::string>* warnings,
                                    bool allow_bare_placeholder) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open templates file: " + path.string());
  std::vector<Template> templates;
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (TrimView(line).empty()) continue;
    Template t;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      t.pattern = std::string(TrimView(line));
    } else {
      std::string weight_text(TrimView(std::string_view(line).substr(0, tab)));
      t.pattern = std::string(TrimView(std::string_view(line).substr(tab + 1)));
      try {
        std::size_t used = 0;
        double w = std::stod(weight_text, &used);
        if (used != weight_text.size() || w < 0.0) throw std::invalid_argument("");
        t.weight = w;
      } catch (const std::exception&) {
        throw Error(where() + ": invalid template weight '" + weight_text +
                    "'");
      }
    }
    if (t.pattern.empty()) throw Error(where() + ": empty template pattern");
    if (t.pattern == kArtistPlaceholder && !allow_bare_placeholder) {
      throw Error(where() +
                  ": template consisting only of the entity name is not "
                  "allowed");
    }
    if (t.pattern.find(kArtistPlaceholder) == std::string::npos &&
        warnings != nullptr) {
      warnings->push_back(where() + ": template '" + t.pattern +
                          "' has no $ARTIST placeholder");
    }
    templates.push_back(std::move(t));
  }
  SortTemplates(templates);
  return templates;
}

std::string InstantiateTemplate(std::string_view pattern,
                                std::string_view entity_name) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto hit = pattern.find(kArtistPlaceholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(pattern.substr(pos, hit - pos));
    out.append(entity_name);
    pos = hit + kArtistPlaceholder.size();
  }
  out.append(pattern.substr(pos));
  return out;
}

GeneratedQuery MakeQuery(std::string entity_id, std::string method, int rank,
                         std::string text, const PipelineConfig& cfg) {
  GeneratedQuery q;
  q.entity_id = std::move(entity_id);
  q.method = std::move(method);
  q.rank = rank;
  q.tokens = PreprocessForLm(text, cfg);
  q.normalized_text = StripWakewordText(text, cfg);
  q.text = std::move(text);
  return q;
}

std::vector<GeneratedQuery> GenerateEntityName(const Entity& e,
                                               const PipelineConfig& cfg) {
  return {MakeQuery(e.id, std::string(kEntityNameMethod), 1, e.name, cfg)};
}

std::vector<GeneratedQuery> GenerateFromTemplates(
    const Entity& e, const std::vector<Template>& templates, int k,
    const PipelineConfig& cfg) {
  if (k < 0) throw Error("template cut-off must be non-negative");
  if (static_cast<std::size_t>(k) > templates.size()) {
    throw Error("requested " + std::to_string(k) + " templates but only " +
                std::to_string(templates.size()) + " are available");
  }
  std::vector<GeneratedQuery> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    out.push_back(MakeQuery(e.id, std::string(kTemplateMethod), i + 1,
                            InstantiateTemplate(templates[i].pattern, e.name),
                            cfg));
  }
  return out;
}

Prompt BuildPrompt(const Entity& e, int k, std::string_view examples) {
  if (TrimView(e.description).empty()) {
    throw Error("entity '" + e.id +
                "' has an empty description and cannot be prompted");
  }
  if (k <= 0) throw Error("prompt query count must be positive");
  const std::string k_text = std::to_string(k);
  const std::pair<std::string_view, std::string_view> slots[] = {
      {"[ARTIST DESCRIPTION]", e.description},
      {"[ARTIST NAME]", e.name},
      {"[K]", k_text},
      {"[EXAMPLES]", examples},
  };
  Prompt prompt;
  prompt.entity_id = e.id;
  prompt.k_requested = k;
  std::string_view rest = kPromptTemplate;
  while (!rest.empty()) {
    bool matched = false;
    if (rest.front() == '[') {
      for (const auto& [slot, value] : slots) {
        if (rest.starts_with(slot)) {
          prompt.text.append(value);
          rest.remove_prefix(slot.size());
          matched = true;
          break;
        }
      }
    }
    if (!matched) {
      prompt.text.push_back(rest.front());
      rest.remove_prefix(1);
    }
  }
  return prompt;
}

std::vector<std::string> ParseCompletion(std::string_view raw) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = TrimView(raw.substr(pos, nl - pos));
    line = TrimView(StripEnumeration(line));
    line = StripQuotes(line);
    if (!line.empty()) lines.emplace_back(line);
    pos = nl + 1;
  }
  return lines;
}

LlmOutcome GenerateLlm(const Entity& e, CompletionProvider& provider,
                       const LlmOptions& options, const PipelineConfig& cfg) {
  LlmOutcome outcome;
  outcome.entity_id = e.id;
  const std::string method = LlmMethodLabel(provider.label());

  Prompt prompt;
  try {
    prompt = BuildPrompt(e, kPromptQueryCount, options.examples);
  } catch (const Error& err) {
    outcome.error = err.what();
    outcome.shortfall = options.k > 0;
    return outcome;
  }

  std::optional<std::string> response;
  const int max_attempts = std::max(1, provider.max_attempts());
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    outcome.attempts = attempt;
    try {
      response = provider.Complete(prompt);
      break;
    } catch (const TransportError& err) {
      outcome.error = err.what();
      if (attempt < max_attempts) {
        std::this_thread::sleep_for(provider.retry_delay() * attempt);
      }
    } catch (const Error& err) {
      outcome.error = err.what();
      break;
    }
  }
  if (!response) {
    outcome.shortfall = options.k > 0;
    return outcome;
  }
  outcome.error.reset();

  auto lines = ParseCompletion(*response);
  outcome.parsed_lines = lines.size();
  std::size_t keep = std::min(lines.size(), static_cast<std::size_t>(
                                                std::max(0, options.k)));
  outcome.shortfall = lines.size() < static_cast<std::size_t>(options.k);
  for (std::size_t i = 0; i < keep; ++i) {
    outcome.queries.push_back(MakeQuery(e.id, method, static_cast<int>(i + 1),
                                        std::move(lines[i]), cfg));
  }
  return outcome;
}

std::vector<LlmOutcome> GenerateLlmBatch(const Catalog& catalog,
                                         CompletionProvider& provider,
                                         const LlmOptions& options,
                                         const PipelineConfig& cfg,
                                         int max_in_flight) {
  const auto& entities = catalog.entities();
  std::vector<LlmOutcome> results(entities.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= entities.size()) return;
      try {
        results[i] = GenerateLlm(entities[i], provider, options, cfg);
      } catch (const std::exception& err) {
        results[i].entity_id = entities[i].id;
        results[i].error = err.what();
      }
    }
  };
  std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_in_flight)),
                            std::max<std::size_t>(1, entities.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

std::vector<std::string> SynthesizeQueryLog(
    const Catalog& catalog, const std::vector<Template>& templates,
    std::size_t count, std::uint64_t seed) {
  if (catalog.empty()) throw Error("cannot synthesize queries for an empty catalog");
  if (templates.empty()) throw Error("cannot synthesize queries without templates");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& t : templates) {
    total += t.weight.value_or(1.0);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error("template weights sum to zero");
  internal::SplitMix rng(seed);
  std::vector<std::string> lines;
  lines.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = rng.Uniform() * total;
    auto t = std::upper_bound(cumulative.begin(), cumulative.end(), u) -
             cumulative.begin();
    t = std::min<std::ptrdiff_t>(t, static_cast<std::ptrdiff_t>(templates.size()) - 1);
    const Entity& e = catalog.entities()[rng.Below(catalog.size())];
    lines.push_back(InstantiateTemplate(templates[static_cast<std::size_t>(t)].pattern, e.name));
  }
  return lines;
}

void WriteQuerySet(const std::filesystem::path& path,
                   const std::vector<GeneratedQuery>& queries) {
  std::vector<Json> records;
  records.reserve(queries.size());
  for (const auto& q : queries) {
    Json r = Json::object();
    r["entity_id"] = q.entity_id;
    r["method"] = q.method;
    r["rank"] = q.rank;
    r["text"] = q.text;
    records.push_back(std::move(r));
  }
  WriteJsonLines(path, records);
}

std::vector<GeneratedQuery> ReadQuerySet(const std::filesystem::path& path,
                                         const PipelineConfig& cfg) {
  std::vector<GeneratedQuery> queries;
  ForEachJsonLine(path, [&](const Json& r, std::size_t line) {
    try {
      auto rank = RequireInt(r, "rank", line);
      if (rank < 1) throw Error(std::to_string(line) + ": rank < 1");
      queries.push_back(MakeQuery(RequireString(r, "entity_id", line),
                                  RequireString(r, "method", line),
                                  static_cast<int>(rank),
                                  RequireString(r, "text", line), cfg));
    } catch (const Error& err) {
      throw Error(path.string() + ":" + err.what());
    }
  });
  CanonicalizeQueries(queries);
  return queries;
}

void CanonicalizeQueries(std::vector<GeneratedQuery>& queries) {
  std::stable_sort(queries.begin(), queries.end(),
                   [](const GeneratedQuery& a, const GeneratedQuery& b) {
                     return std::tie(a.entity_id, a.method, a.rank) <
                            std::tie(b.entity_id, b.method, b.rank);
                   });
  for (std::size_t i = 0; i < queries.size(); ++i) {
    bool first = i == 0 || queries[i].entity_id != queries[i - 1].entity_id ||
                 queries[i].method != queries[i - 1].method;
    int expected = first ? 1 : queries[i - 1].rank + 1;
    if (queries[i].rank != expected) {
      throw Error("ranks for entity '" + queries[i].entity_id + "' method '" +
                  queries[i].method + "' are not contiguous from 1");
    }
  }
}

}  // namespace qgen
