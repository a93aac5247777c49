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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qgen/textpipe.h"

namespace qgen {

inline constexpr std::string_view kSentenceBegin = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";
inline constexpr std::string_view kUnknownToken = "<unk>";

enum class Smoothing { kGoodTuring, kMleUnsmoothed };

struct LmTrainConfig {
  int order = 4;
  // N-grams of order >= 2 seen fewer times than this are dropped.
  int prune_min_count = 3;
  // Counts above this are not discounted.
  int gt_max_count = 5;
  Smoothing smoothing = Smoothing::kGoodTuring;
  // Good-Turing mode only: lower bound on the unigram <unk> probability
  // and on the back-off mass of every context, which keeps NLL finite.
  double unk_mass_floor = 1e-7;

  void Validate() const;
};

// Katz back-off n-gram model. Probabilities and back-off weights are kept
// as natural logs; -infinity stands for probability zero.
class NgramModel {
 public:
  using WordId = std::uint32_t;
  using Ngram = std::vector<WordId>;

  struct Entry {
    double log_prob = 0.0;
    // Only present when the n-gram is a context of some stored higher-order
    // n-gram. Absent means a weight of 1.
    std::optional<double> log_backoff;

    bool operator==(const Entry&) const = default;
  };

  NgramModel() = default;

  // `vocab` must contain the three markers; it is sorted and deduplicated.
  // tables[n-1] holds the order-n entries keyed by words of `words`.
  NgramModel(int order, std::vector<std::string> vocab,
             std::vector<std::map<std::vector<std::string>, Entry>> tables);

  int order() const { return order_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  std::optional<WordId> Lookup(std::string_view word) const;
  // Lookup with unknown words mapped to <unk>.
  WordId IdOrUnknown(std::string_view word) const;
  WordId begin_id() const { return bos_; }
  WordId end_id() const { return eos_; }
  WordId unknown_id() const { return unk_; }

  // Order-n table, n in [1, order].
  const std::map<Ngram, Entry>& table(int n) const { return tables_[n - 1]; }
  const Entry* Find(std::span<const WordId> ngram) const;

  // ln P(word | history) following the back-off chain. Only the last
  // order-1 history words are used.
  double LogProb(std::span<const WordId> history, WordId word) const;

  // Messages about discounting fallbacks raised during training.
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::vector<std::string> Words(std::span<const WordId> ngram) const;

 private:
  friend NgramModel TrainLm(const std::vector<TokenSeq>&,
                            const LmTrainConfig&);

  void IndexVocab();

  int order_ = 0;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, WordId> ids_;
  WordId bos_ = 0;
  WordId eos_ = 0;
  WordId unk_ = 0;
  std::vector<std::map<Ngram, Entry>> tables_;
  std::vector<std::string> warnings_;
};

// Each sentence is padded with one <s> and one </s>. Throws on an empty
// corpus or invalid config.
NgramModel TrainLm(const std::vector<TokenSeq>& corpus,
                   const LmTrainConfig& cfg);

struct NllScore {
  TokenSeq tokens;
  double nll = 0.0;  // natural-log units, includes the </s> term
  int oov_count = 0;

  // nll / (|tokens| + 1); auxiliary, the reported measure is unnormalized.
  double PerToken() const {
    return nll / static_cast<double>(tokens.size() + 1);
  }
};

// Negative log-likelihood of a query. Empty queries are not scored.
std::optional<NllScore> ScoreNll(const NgramModel& model,
                                 const TokenSeq& query);

// Reads one query per line, applying LM-side normalization. Blank lines
// (after normalization) are skipped.
std::vector<TokenSeq> LoadCorpus(const std::filesystem::path& path,
                                 const PipelineConfig& cfg);

// ARPA text format, log10 in-file. Zero probabilities are written as -99.
void ExportArpa(const NgramModel& model, const std::filesystem::path& path);
std::string ArpaString(const NgramModel& model);
NgramModel ImportArpa(const std::filesystem::path& path);
NgramModel ParseArpa(std::string_view text);

}  // namespace qgen
