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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qgen/generation.h"
#include "qgen/jsonl.h"

namespace qgen {

// Per-query scores of one entity, position i holding rank i+1. An empty
// optional marks a query that was not scored (empty after normalization).
using RankedScores = std::vector<std::optional<double>>;
using EntityScores = std::map<std::string, RankedScores>;

// Pooled median over every entity's first min(k, n_e) scores; even-sized
// pools average the two central values. Throws on an empty pool.
double MedianNllAtK(const EntityScores& scores, int k);

// Pooled arithmetic mean of every entity's first min(k, n_e) scores.
double MeanRrAtK(const EntityScores& scores, int k);

struct QueryStats {
  std::size_t entity_count = 0;  // entities with at least one query
  std::size_t query_count = 0;
  double unique_mean = 0.0;      // distinct token sequences per entity
  double unique_std = 0.0;
  double length_mean = 0.0;      // per-entity mean query length, in tokens
  double length_std = 0.0;
  double pct_over_15_terms = 0.0;  // over all queries
};

// Statistics for a single method's queries. Standard deviations are
// population deviations across entities.
QueryStats ComputeQueryStats(const std::vector<GeneratedQuery>& queries);

using EntityQuerySets = std::map<std::string, std::set<std::string>>;

// Space-joined token sequences per entity.
EntityQuerySets QuerySetsByEntity(const std::vector<GeneratedQuery>& queries);

struct JaccardSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t entities = 0;
  std::size_t skipped = 0;  // entities present on only one side
};

// Per-entity |A n B| / |A u B|, defined as 0 when both sets are empty.
JaccardSummary JaccardComplementarity(const EntityQuerySets& a,
                                      const EntityQuerySets& b);

// ---- score files ----

enum class ScoreKind { kNll, kRr };

struct ScoreRecord {
  std::string entity_id;
  std::string method;
  int rank = 0;
  std::optional<double> value;
};

// Line-delimited records with entity_id, method, rank and either "nll" or
// "rr" (null for unscored queries).
void WriteScores(const std::filesystem::path& path, ScoreKind kind,
                 const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> ReadScores(const std::filesystem::path& path,
                                    ScoreKind* kind);

// Groups records of one method by entity, placing each at rank - 1.
EntityScores GroupScores(const std::vector<ScoreRecord>& records,
                         const std::string& method);

// ---- report ----

struct EvalConfig {
  std::vector<int> cutoffs = {10, 20, 30, 40};
  void Validate() const;
};

struct MetricPoint {
  std::string method;
  int k = 0;
  std::optional<double> median_nll;
  std::optional<double> mean_rr;
};

struct JaccardRow {
  std::string method_a;
  std::string method_b;
  JaccardSummary summary;
};

struct EvalReport {
  std::vector<int> cutoffs;
  std::vector<std::string> methods;
  std::vector<MetricPoint> metrics;  // methods x cutoffs, method-major
  std::map<std::string, QueryStats> stats;
  std::vector<JaccardRow> jaccard;

  const MetricPoint* Find(const std::string& method, int k) const;
  Json ToJson() const;
};

struct EvalInputs {
  std::vector<GeneratedQuery> queries;  // any mix of methods
  std::vector<ScoreRecord> nll;
  std::vector<ScoreRecord> rr;
};

// Methods are ordered entity_name, template, then the rest by label.
std::vector<std::string> OrderMethods(std::set<std::string> methods);

EvalReport BuildReport(const EvalInputs& inputs, const EvalConfig& cfg);

// Reads every *.jsonl under dir and sorts records into queries, NLL
// scores and RR scores by their fields.
EvalInputs LoadEvalInputs(const std::filesystem::path& dir,
                          const PipelineConfig& cfg);

inline constexpr const char* kMetricsHeader = "method\tk\tmedian_nll\tmean_rr";

// Writes report.json, metrics.tsv, query_stats.tsv and jaccard.tsv.
void EmitReport(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace qgen
