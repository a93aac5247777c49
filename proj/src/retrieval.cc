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

#include "qgen/retrieval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qgen/error.h"
#include "qgen/jsonl.h"

namespace qgen {

void Bm25Params::Validate() const {
  if (!(k1 > 0.0)) throw Error("BM25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw Error("BM25 b must be in [0, 1]");
  if (!(delta >= 0.0)) throw Error("BM25 delta must be non-negative");
}

const std::vector<Posting>& Index::postings(std::string_view term) const {
  static const std::vector<Posting> kEmpty;
  auto it = postings_.find(term);
  return it == postings_.end() ? kEmpty : it->second;
}

long Index::Ordinal(std::string_view entity_id) const {
  auto it = ordinals_.find(std::string(entity_id));
  return it == ordinals_.end() ? -1 : static_cast<long>(it->second);
}

bool Index::operator==(const Index& other) const {
  return entity_ids_ == other.entity_ids_ &&
         doc_lengths_ == other.doc_lengths_ &&
         avg_doc_length_ == other.avg_doc_length_ &&
         postings_ == other.postings_ &&
         pipeline_.stopwords == other.pipeline_.stopwords &&
         pipeline_.wakewords == other.pipeline_.wakewords &&
         pipeline_.stemming_enabled == other.pipeline_.stemming_enabled;
}

void Index::Finish() {
  ordinals_.clear();
  for (std::size_t i = 0; i < entity_ids_.size(); ++i) {
    if (!ordinals_.emplace(entity_ids_[i], static_cast<std::uint32_t>(i)).second) {
      throw Error("duplicate entity id in index: " + entity_ids_[i]);
    }
  }
  double total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), 0.0);
  avg_doc_length_ = entity_ids_.empty()
                        ? 0.0
                        : total / static_cast<double>(entity_ids_.size());
}

Index BuildIndex(const Catalog& catalog, const PipelineConfig& cfg) {
  if (catalog.empty()) throw Error("cannot index an empty catalog");
  Index index;
  index.pipeline_ = cfg;
  for (const auto& e : catalog) {
    TokenSeq tokens = PreprocessForRetrieval(e.document, cfg);
    if (tokens.empty()) {
      throw Error("document of entity '" + e.id + "' is empty after preprocessing");
    }
    auto doc = static_cast<std::uint32_t>(index.entity_ids_.size());
    index.entity_ids_.push_back(e.id);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::map<std::string, std::uint32_t> tf;
    for (auto& t : tokens) ++tf[std::move(t)];
    for (auto& [term, count] : tf) {
      auto it = index.postings_.find(term);
      if (it == index.postings_.end()) {
        it = index.postings_.emplace(term, std::vector<Posting>{}).first;
      }
      it->second.push_back({doc, count});
    }
  }
  index.Finish();
  return index;
}

void SaveIndex(const Index& index, const std::filesystem::path& path) {
  Json j = Json::object();
  j["format"] = "qgen-index";
  j["version"] = kIndexFormatVersion;
  Json pipeline = Json::object();
  pipeline["stopwords"] = Json(std::vector<std::string>(
      index.pipeline().stopwords.begin(), index.pipeline().stopwords.end()));
  pipeline["wakewords"] = Json(index.pipeline().wakewords);
  pipeline["stemming"] = index.pipeline().stemming_enabled;
  j["pipeline"] = std::move(pipeline);
  Json entities = Json::array();
  for (std::size_t i = 0; i < index.doc_count(); ++i) {
    entities.push_back(Json::array({index.entity_ids()[i], index.doc_lengths()[i]}));
  }
  j["documents"] = std::move(entities);
  Json postings = Json::object();
  for (const auto& [term, list] : index.terms()) {
    Json arr = Json::array();
    for (const auto& p : list) arr.push_back(Json::array({p.doc, p.tf}));
    postings[term] = std::move(arr);
  }
  j["postings"] = std::move(postings);
  WriteTextFile(path, j.dump() + "\n");
}

Index LoadIndex(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(ReadTextFile(path));
  } catch (const Json::parse_error& e) {
    throw Error("malformed index file " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "qgen-index") {
    throw Error(path.string() + " is not a qgen index");
  }
  if (j.value("version", 0) != kIndexFormatVersion) {
    throw Error(path.string() + ": unsupported index version " +
                std::to_string(j.value("version", 0)));
  }
  Index index;
  try {
    const auto& p = j.at("pipeline");
    for (const auto& s : p.at("stopwords")) {
      index.pipeline_.stopwords.insert(s.get<std::string>());
    }
    index.pipeline_.wakewords = p.at("wakewords").get<std::vector<TokenSeq>>();
    index.pipeline_.stemming_enabled = p.at("stemming").get<bool>();
    for (const auto& d : j.at("documents")) {
      index.entity_ids_.push_back(d.at(0).get<std::string>());
      index.doc_lengths_.push_back(d.at(1).get<std::uint32_t>());
    }
    for (const auto& [term, list] : j.at("postings").items()) {
      std::vector<Posting> postings;
      for (const auto& entry : list) {
        Posting posting{entry.at(0).get<std::uint32_t>(),
                        entry.at(1).get<std::uint32_t>()};
        if (posting.doc >= index.entity_ids_.size() || posting.tf == 0) {
          throw Error("posting out of range for term '" + term + "'");
        }
        postings.push_back(posting);
      }
      index.postings_.emplace(term, std::move(postings));
    }
  } catch (const Json::exception& e) {
    throw Error("malformed index file " + path.string() + ": " + e.what());
  }
  if (index.entity_ids_.empty()) throw Error(path.string() + ": empty index");
  index.Finish();
  return index;
}

RankedResult::RankedResult(TokenSeq query, std::vector<ScoredEntity> ranking)
    : query_(std::move(query)), ranking_(std::move(ranking)) {
  std::sort(ranking_.begin(), ranking_.end(),
            [](const ScoredEntity& a, const ScoredEntity& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.entity_id < b.entity_id;
            });
  for (std::size_t i = 0; i < ranking_.size(); ++i) {
    position_.emplace(ranking_[i].entity_id, i);
  }
}

std::size_t RankedResult::RankOf(std::string_view entity_id) const {
  auto it = position_.find(std::string(entity_id));
  if (it == position_.end()) {
    throw Error("entity '" + std::string(entity_id) + "' is not indexed");
  }
  return it->second + 1;
}

double RankedResult::ScoreOf(std::string_view entity_id) const {
  return ranking_[RankOf(entity_id) - 1].score;
}

RankedResult ScoreBm25L(const Index& index, const TokenSeq& query,
                        const Bm25Params& params) {
  params.Validate();
  const double n = static_cast<double>(index.doc_count());
  const double avgdl = index.avg_doc_length();
  std::vector<double> scores(index.doc_count(), 0.0);
  for (const auto& term : query) {
    const auto& list = index.postings(term);
    if (list.empty()) continue;
    const double idf = std::log((n + 1.0) / (static_cast<double>(list.size()) + 0.5));
    for (const auto& p : list) {
      const double len = static_cast<double>(index.doc_lengths()[p.doc]);
      const double c = static_cast<double>(p.tf) /
                       (1.0 - params.b + params.b * len / avgdl);
      scores[p.doc] += idf * (params.k1 + 1.0) * (c + params.delta) /
                       (params.k1 + c + params.delta);
    }
  }
  std::vector<ScoredEntity> ranking;
  ranking.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ranking.push_back({index.entity_ids()[i], scores[i]});
  }
  return RankedResult(query, std::move(ranking));
}

double ReciprocalRank(const RankedResult& result, std::string_view target,
                      RrMode mode) {
  std::size_t rank = result.RankOf(target);
  if (mode == RrMode::kZeroIfUnscored && result.ScoreOf(target) <= 0.0) {
    return 0.0;
  }
  return 1.0 / static_cast<double>(rank);
}

}  // namespace qgen
