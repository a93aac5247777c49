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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qgen/catalog.h"
#include "qgen/textpipe.h"

namespace qgen {

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
  double delta = 0.5;

  void Validate() const;
};

struct Posting {
  std::uint32_t doc = 0;  // ordinal into Index::entity_ids()
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

// Inverted index over preprocessed entity documents. Immutable once built.
class Index {
 public:
  Index() = default;

  const std::vector<std::string>& entity_ids() const { return entity_ids_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
  std::size_t doc_count() const { return entity_ids_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const PipelineConfig& pipeline() const { return pipeline_; }

  // Empty span for unknown terms.
  const std::vector<Posting>& postings(std::string_view term) const;
  std::size_t doc_freq(std::string_view term) const {
    return postings(term).size();
  }
  const std::map<std::string, std::vector<Posting>, std::less<>>& terms() const {
    return postings_;
  }

  // Ordinal of an entity id, or -1.
  long Ordinal(std::string_view entity_id) const;

  bool operator==(const Index& other) const;

 private:
  friend Index BuildIndex(const Catalog&, const PipelineConfig&);
  friend Index LoadIndex(const std::filesystem::path&);

  void Finish();

  std::vector<std::string> entity_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::unordered_map<std::string, std::uint32_t> ordinals_;
  PipelineConfig pipeline_;
};

// Every document goes through PreprocessForRetrieval with cfg. Throws on an
// empty catalog or a document that preprocesses to nothing.
Index BuildIndex(const Catalog& catalog, const PipelineConfig& cfg);

// Versioned JSON file; the pipeline config travels with the index so that
// queries can be preprocessed the same way.
inline constexpr int kIndexFormatVersion = 1;
void SaveIndex(const Index& index, const std::filesystem::path& path);
Index LoadIndex(const std::filesystem::path& path);

struct ScoredEntity {
  std::string entity_id;
  double score = 0.0;
};

// Full ranking of every indexed entity: score descending, ties by
// ascending entity id.
class RankedResult {
 public:
  RankedResult(TokenSeq query, std::vector<ScoredEntity> ranking);

  const TokenSeq& query() const { return query_; }
  const std::vector<ScoredEntity>& ranking() const { return ranking_; }

  // 1-based rank; throws Error for an id that is not indexed.
  std::size_t RankOf(std::string_view entity_id) const;
  double ScoreOf(std::string_view entity_id) const;

 private:
  TokenSeq query_;
  std::vector<ScoredEntity> ranking_;
  std::unordered_map<std::string, std::size_t> position_;
};

// BM25L: per matching term idf * (k1 + 1)(c + delta) / (k1 + c + delta),
// c = tf / (1 - b + b * |d| / avgdl), idf = ln((N + 1) / (df + 0.5)).
// Each occurrence of a term in the query contributes.
RankedResult ScoreBm25L(const Index& index, const TokenSeq& query,
                        const Bm25Params& params = {});

enum class RrMode {
  kFullRanking,    // every entity gets a rank, zero scores included
  kZeroIfUnscored  // RR is 0 when the target scores 0
};

double ReciprocalRank(const RankedResult& result, std::string_view target,
                      RrMode mode = RrMode::kFullRanking);

}  // namespace qgen
