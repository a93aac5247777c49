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

#include "qgen/evaluation.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.h"
#include "qgen/error.h"

namespace qgen {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GeneratedQuery Q(const std::string& entity, const std::string& method, int rank,
                 const std::string& text) {
  PipelineConfig cfg;
  cfg.stemming_enabled = false;
  return MakeQuery(entity, method, rank, text, cfg);
}

TEST(MedianNll, OddAndEvenPools) {
  EntityScores s = {{"a", {1.0, 5.0, 9.0}}, {"b", {3.0}}};
  EXPECT_DOUBLE_EQ(MedianNllAtK(s, 1), 2.0);
  EXPECT_DOUBLE_EQ(MedianNllAtK(s, 2), 3.0);
  EXPECT_DOUBLE_EQ(MedianNllAtK(s, 3), 4.0);
  EXPECT_DOUBLE_EQ(MedianNllAtK(s, 40), 4.0);
}

TEST(MedianNll, SkipsUnscoredAndRejectsEmpty) {
  EntityScores s = {{"a", {std::nullopt, 2.0}}, {"b", {std::nullopt}}};
  EXPECT_DOUBLE_EQ(MedianNllAtK(s, 10), 2.0);
  EXPECT_THROW(MedianNllAtK(s, 1), Error);
  EXPECT_THROW(MedianNllAtK({}, 10), Error);
  EXPECT_THROW(MedianNllAtK(s, 0), Error);
}

TEST(MedianNll, MatchesSortedPoolOnRandomScores) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    EntityScores s;
    std::vector<double> pool10;
    for (int e = 0; e < 1 + trial; ++e) {
      auto& list = s["e" + std::to_string(e)];
      int n = 1 + static_cast<int>(rng() % 25);
      for (int i = 0; i < n; ++i) {
        list.push_back(u(rng));
        if (i < 10) pool10.push_back(*list.back());
      }
    }
    EXPECT_DOUBLE_EQ(MedianNllAtK(s, 10), oracle::Median(pool10));
  }
}

TEST(MeanRr, PooledAcrossEntities) {
  EntityScores s = {{"a", {1.0, 0.5, 0.25}}, {"b", {0.0}}};
  EXPECT_DOUBLE_EQ(MeanRrAtK(s, 1), 0.5);
  EXPECT_DOUBLE_EQ(MeanRrAtK(s, 3), 1.75 / 4.0);
  EXPECT_THROW(MeanRrAtK({{"a", {std::nullopt}}}, 5), Error);
}

TEST(QueryStats, ByHand) {
  std::vector<GeneratedQuery> qs = {
      Q("a", "m", 1, "play a song"),
      Q("a", "m", 2, "Play A Song"),  // same tokens
      Q("a", "m", 3, "one two three four five six seven eight nine ten eleven "
                     "twelve thirteen fourteen fifteen sixteen"),
      Q("b", "m", 1, "hello"),
  };
  auto s = ComputeQueryStats(qs);
  EXPECT_EQ(s.entity_count, 2u);
  EXPECT_EQ(s.query_count, 4u);
  EXPECT_DOUBLE_EQ(s.unique_mean, 1.5);
  EXPECT_DOUBLE_EQ(s.unique_std, 0.5);
  // entity a: (3 + 3 + 16) / 3, entity b: 1
  const double a_len = 22.0 / 3.0;
  EXPECT_DOUBLE_EQ(s.length_mean, (a_len + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(s.length_std, (a_len - 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(s.pct_over_15_terms, 25.0);
}

TEST(QueryStats, EntityNameIsOnePerEntity) {
  std::vector<GeneratedQuery> qs;
  for (int i = 0; i < 7; ++i) qs.push_back(Q("e" + std::to_string(i), "entity_name", 1, "Name"));
  auto s = ComputeQueryStats(qs);
  EXPECT_EQ(s.unique_mean, 1.0);
  EXPECT_EQ(s.unique_std, 0.0);
  EXPECT_EQ(s.pct_over_15_terms, 0.0);
  EXPECT_EQ(ComputeQueryStats({}).entity_count, 0u);
}

TEST(Jaccard, ByHandWithSkippedEntities) {
  std::vector<GeneratedQuery> a = {Q("x", "p", 1, "play one"), Q("x", "p", 2, "play two"),
                                   Q("y", "p", 1, "alpha"), Q("only_a", "p", 1, "z")};
  std::vector<GeneratedQuery> b = {Q("x", "q", 1, "PLAY one"), Q("x", "q", 2, "play three"),
                                   Q("y", "q", 1, "beta"), Q("only_b", "q", 1, "z")};
  auto sa = QuerySetsByEntity(a);
  EXPECT_EQ(sa.at("x"), (std::set<std::string>{"play one", "play two"}));
  auto j = JaccardComplementarity(sa, QuerySetsByEntity(b));
  EXPECT_EQ(j.entities, 2u);
  EXPECT_EQ(j.skipped, 2u);
  // x: 1/3, y: 0
  EXPECT_DOUBLE_EQ(j.mean, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(j.std, 1.0 / 6.0);
}

TEST(Jaccard, IdenticalAndEmptySets) {
  EntityQuerySets a = {{"x", {"q1", "q2"}}, {"y", {}}};
  auto j = JaccardComplementarity(a, a);
  EXPECT_DOUBLE_EQ(j.mean, 0.5);  // x: 1, y: empty union counts as 0
  EXPECT_EQ(j.entities, 2u);
}

TEST(ScoreFile, RoundTripKeepsNullAndInfinity) {
  auto dir = TempDir("qgen_eval_scores");
  std::vector<ScoreRecord> recs = {
      {"a", "template", 1, 3.25},
      {"a", "template", 2, std::nullopt},
      {"b", "template", 1, std::numeric_limits<double>::infinity()},
      {"b", "template", 2, 0.1 + 0.2},
  };
  WriteScores(dir / "s.jsonl", ScoreKind::kNll, recs);
  EXPECT_NE(Slurp(dir / "s.jsonl").find("\"nll\":null"), std::string::npos);
  ScoreKind kind = ScoreKind::kRr;
  auto back = ReadScores(dir / "s.jsonl", &kind);
  EXPECT_EQ(kind, ScoreKind::kNll);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].entity_id, recs[i].entity_id);
    EXPECT_EQ(back[i].rank, recs[i].rank);
    EXPECT_EQ(back[i].value, recs[i].value);
  }
  WriteScores(dir / "r.jsonl", ScoreKind::kRr, {{"a", "m", 1, 0.5}});
  ReadScores(dir / "r.jsonl", &kind);
  EXPECT_EQ(kind, ScoreKind::kRr);
  fs::remove_all(dir);
}

TEST(ScoreFile, ErrorsNameTheLine) {
  auto dir = TempDir("qgen_eval_bad");
  WriteTextFile(dir / "bad.jsonl",
                "{\"entity_id\":\"a\",\"method\":\"m\",\"rank\":1,\"rr\":1}\n"
                "{\"entity_id\":\"a\",\"method\":\"m\",\"rank\":2,\"rr\":\"x\"}\n");
  try {
    ReadScores(dir / "bad.jsonl", nullptr);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:2"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(GroupScores, PlacesByRankAndFiltersMethod) {
  std::vector<ScoreRecord> recs = {{"a", "m", 2, 2.0}, {"a", "m", 1, 1.0},
                                   {"a", "other", 1, 9.0}, {"b", "m", 3, 3.0}};
  auto g = GroupScores(recs, "m");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g["a"], (RankedScores{1.0, 2.0}));
  EXPECT_EQ(g["b"], (RankedScores{std::nullopt, std::nullopt, 3.0}));
}

TEST(EvalConfig, Validation) {
  EXPECT_NO_THROW(EvalConfig{}.Validate());
  EXPECT_THROW((EvalConfig{{}}.Validate()), Error);
  EXPECT_THROW((EvalConfig{{10, 10}}.Validate()), Error);
  EXPECT_THROW((EvalConfig{{0, 10}}.Validate()), Error);
}

TEST(OrderMethods, BaselinesFirst) {
  EXPECT_EQ(OrderMethods({"llm:b", "template", "llm:a", "entity_name"}),
            (std::vector<std::string>{"entity_name", "template", "llm:a", "llm:b"}));
}

EvalInputs SmallInputs() {
  EvalInputs in;
  in.queries = {Q("a", "entity_name", 1, "Alpha"), Q("b", "entity_name", 1, "Beta"),
                Q("a", "template", 1, "play Alpha"), Q("a", "template", 2, "queue Alpha"),
                Q("b", "template", 1, "play Beta")};
  in.nll = {{"a", "entity_name", 1, 4.0}, {"b", "entity_name", 1, 6.0},
            {"a", "template", 1, 7.0}, {"a", "template", 2, 9.0},
            {"b", "template", 1, 8.0}};
  in.rr = {{"a", "entity_name", 1, 1.0}, {"b", "entity_name", 1, 1.0},
           {"a", "template", 1, 1.0}, {"a", "template", 2, 0.5},
           {"b", "template", 1, 0.25}};
  return in;
}

TEST(Report, BuildsMetricsStatsAndJaccard) {
  auto r = BuildReport(SmallInputs(), EvalConfig{{1, 2}});
  EXPECT_EQ(r.methods, (std::vector<std::string>{"entity_name", "template"}));
  ASSERT_EQ(r.metrics.size(), 4u);
  EXPECT_DOUBLE_EQ(*r.Find("entity_name", 1)->median_nll, 5.0);
  EXPECT_DOUBLE_EQ(*r.Find("template", 1)->median_nll, 7.5);
  EXPECT_DOUBLE_EQ(*r.Find("template", 2)->median_nll, 8.0);
  EXPECT_DOUBLE_EQ(*r.Find("template", 2)->mean_rr, 1.75 / 3.0);
  EXPECT_EQ(r.Find("template", 3), nullptr);
  EXPECT_EQ(r.stats.at("entity_name").unique_mean, 1.0);
  ASSERT_EQ(r.jaccard.size(), 1u);
  EXPECT_EQ(r.jaccard[0].summary.mean, 0.0);
  EXPECT_EQ(r.jaccard[0].summary.entities, 2u);
}

TEST(Report, MethodWithoutScoresHasNoMetric) {
  EvalInputs in = SmallInputs();
  in.rr.clear();
  auto r = BuildReport(in, EvalConfig{{10}});
  EXPECT_FALSE(r.Find("template", 10)->mean_rr.has_value());
  EXPECT_TRUE(r.Find("template", 10)->median_nll.has_value());
  EXPECT_TRUE(r.ToJson()["metrics"][1]["mean_rr"].is_null());
}

TEST(Report, EmitsFilesAndReloadsInputs) {
  auto dir = TempDir("qgen_eval_report");
  auto in = SmallInputs();
  PipelineConfig cfg;
  cfg.stemming_enabled = false;
  WriteQuerySet(dir / "scores" / "q.queries.jsonl", in.queries);
  WriteScores(dir / "scores" / "q.nll.jsonl", ScoreKind::kNll, in.nll);
  WriteScores(dir / "scores" / "q.rr.jsonl", ScoreKind::kRr, in.rr);
  auto loaded = LoadEvalInputs(dir / "scores", cfg);
  ASSERT_EQ(loaded.queries.size(), in.queries.size());
  for (const auto& q : in.queries) {
    EXPECT_NE(std::find(loaded.queries.begin(), loaded.queries.end(), q), loaded.queries.end())
        << q.text;
  }
  EXPECT_EQ(loaded.nll.size(), in.nll.size());
  EXPECT_EQ(loaded.rr.size(), in.rr.size());

  auto r = BuildReport(loaded, EvalConfig{{1, 2}});
  EmitReport(r, dir / "report");
  std::string metrics = Slurp(dir / "report" / "metrics.tsv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), kMetricsHeader);
  EXPECT_NE(metrics.find("template\t2\t8\t"), std::string::npos) << metrics;
  EXPECT_NE(Slurp(dir / "report" / "query_stats.tsv").find("entity_name\t2\t2\t1\t0\t"),
            std::string::npos);
  EXPECT_NE(Slurp(dir / "report" / "jaccard.tsv").find("entity_name\ttemplate\t0\t0\t2\t0"),
            std::string::npos);
  auto j = Json::parse(Slurp(dir / "report" / "report.json"));
  EXPECT_EQ(j["cutoffs"], Json::parse("[1,2]"));
  EXPECT_EQ(j["query_stats"]["template"]["queries"], 3);
  EXPECT_THROW(LoadEvalInputs(dir / "missing", cfg), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace qgen
