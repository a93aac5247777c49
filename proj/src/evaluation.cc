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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "qgen/error.h"

namespace qgen {
namespace {

std::vector<double> Pool(const EntityScores& scores, int k) {
  if (k < 1) throw Error("cut-off must be positive");
  std::vector<double> pool;
  for (const auto& [entity, list] : scores) {
    std::size_t n = std::min(list.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
      if (list[i]) pool.push_back(*list[i]);
    }
  }
  return pool;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd Describe(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

std::string Num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Num(const std::optional<double>& v) {
  return v ? Num(*v) : std::string("NA");
}

// JSON has no infinity; an impossible query under an unsmoothed model is
// stored as the string "inf".
Json ScoreJson(const std::optional<double>& v) {
  if (!v) return Json(nullptr);
  if (std::isinf(*v) && *v > 0) return Json("inf");
  return Json(*v);
}

}  // namespace

double MedianNllAtK(const EntityScores& scores, int k) {
  auto pool = Pool(scores, k);
  if (pool.empty()) throw Error("no NLL scores to aggregate");
  std::sort(pool.begin(), pool.end());
  std::size_t mid = pool.size() / 2;
  if (pool.size() % 2 == 1) return pool[mid];
  return (pool[mid - 1] + pool[mid]) / 2.0;
}

double MeanRrAtK(const EntityScores& scores, int k) {
  auto pool = Pool(scores, k);
  if (pool.empty()) throw Error("no RR scores to aggregate");
  double sum = 0.0;
  for (double v : pool) sum += v;
  return sum / static_cast<double>(pool.size());
}

QueryStats ComputeQueryStats(const std::vector<GeneratedQuery>& queries) {
  std::map<std::string, std::vector<const GeneratedQuery*>> by_entity;
  for (const auto& q : queries) by_entity[q.entity_id].push_back(&q);
  QueryStats stats;
  stats.entity_count = by_entity.size();
  stats.query_count = queries.size();
  if (queries.empty()) return stats;
  std::vector<double> unique;
  std::vector<double> lengths;
  std::size_t over = 0;
  for (const auto& [entity, list] : by_entity) {
    std::set<std::string> distinct;
    double total_len = 0.0;
    for (const auto* q : list) {
      distinct.insert(JoinTokens(q->tokens));
      total_len += static_cast<double>(q->tokens.size());
      if (q->tokens.size() > 15) ++over;
    }
    unique.push_back(static_cast<double>(distinct.size()));
    lengths.push_back(total_len / static_cast<double>(list.size()));
  }
  auto u = Describe(unique);
  auto l = Describe(lengths);
  stats.unique_mean = u.mean;
  stats.unique_std = u.std;
  stats.length_mean = l.mean;
  stats.length_std = l.std;
  stats.pct_over_15_terms =
      100.0 * static_cast<double>(over) / static_cast<double>(queries.size());
  return stats;
}

EntityQuerySets QuerySetsByEntity(const std::vector<GeneratedQuery>& queries) {
  EntityQuerySets sets;
  for (const auto& q : queries) sets[q.entity_id].insert(JoinTokens(q.tokens));
  return sets;
}

JaccardSummary JaccardComplementarity(const EntityQuerySets& a,
                                      const EntityQuerySets& b) {
  JaccardSummary summary;
  std::vector<double> values;
  for (const auto& [entity, set_a] : a) {
    auto it = b.find(entity);
    if (it == b.end()) {
      ++summary.skipped;
      continue;
    }
    const auto& set_b = it->second;
    std::size_t inter = 0;
    for (const auto& q : set_a) inter += set_b.contains(q) ? 1 : 0;
    std::size_t uni = set_a.size() + set_b.size() - inter;
    values.push_back(uni == 0 ? 0.0
                              : static_cast<double>(inter) /
                                    static_cast<double>(uni));
  }
  for (const auto& [entity, set_b] : b) {
    if (!a.contains(entity)) ++summary.skipped;
  }
  auto d = Describe(values);
  summary.mean = d.mean;
  summary.std = d.std;
  summary.entities = values.size();
  return summary;
}

void WriteScores(const std::filesystem::path& path, ScoreKind kind,
                 const std::vector<ScoreRecord>& records) {
  const char* key = kind == ScoreKind::kNll ? "nll" : "rr";
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) {
    Json j = Json::object();
    j["entity_id"] = r.entity_id;
    j["method"] = r.method;
    j["rank"] = r.rank;
    j[key] = ScoreJson(r.value);
    lines.push_back(std::move(j));
  }
  WriteJsonLines(path, lines);
}

std::vector<ScoreRecord> ReadScores(const std::filesystem::path& path,
                                    ScoreKind* kind) {
  std::vector<ScoreRecord> records;
  std::optional<ScoreKind> seen;
  ForEachJsonLine(path, [&](const Json& j, std::size_t line) {
    ScoreKind k;
    const char* key;
    if (j.contains("nll")) {
      k = ScoreKind::kNll;
      key = "nll";
    } else if (j.contains("rr")) {
      k = ScoreKind::kRr;
      key = "rr";
    } else {
      throw Error(path.string() + ":" + std::to_string(line) +
                  ": record has neither 'nll' nor 'rr'");
    }
    if (seen && *seen != k) {
      throw Error(path.string() + ":" + std::to_string(line) +
                  ": mixed score kinds in one file");
    }
    seen = k;
    ScoreRecord r;
    try {
      r.entity_id = RequireString(j, "entity_id", line);
      r.method = RequireString(j, "method", line);
      r.rank = static_cast<int>(RequireInt(j, "rank", line));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + e.what());
    }
    if (r.rank < 1) {
      throw Error(path.string() + ":" + std::to_string(line) + ": rank < 1");
    }
    const auto& v = j.at(key);
    if (v.is_number()) {
      r.value = v.get<double>();
    } else if (v.is_string() && v.get<std::string>() == "inf") {
      r.value = std::numeric_limits<double>::infinity();
    } else if (!v.is_null()) {
      throw Error(path.string() + ":" + std::to_string(line) +
                  ": score must be a number or null");
    }
    records.push_back(std::move(r));
  });
  if (kind != nullptr && seen) *kind = *seen;
  return records;
}

EntityScores GroupScores(const std::vector<ScoreRecord>& records,
                         const std::string& method) {
  EntityScores out;
  for (const auto& r : records) {
    if (r.method != method) continue;
    auto& list = out[r.entity_id];
    auto pos = static_cast<std::size_t>(r.rank - 1);
    if (list.size() <= pos) list.resize(pos + 1);
    list[pos] = r.value;
  }
  return out;
}

void EvalConfig::Validate() const {
  if (cutoffs.empty()) throw Error("at least one cut-off is required");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < 1) throw Error("cut-offs must be positive");
    if (i > 0 && cutoffs[i] <= cutoffs[i - 1]) {
      throw Error("cut-offs must be strictly ascending");
    }
  }
}

const MetricPoint* EvalReport::Find(const std::string& method, int k) const {
  for (const auto& m : metrics) {
    if (m.method == method && m.k == k) return &m;
  }
  return nullptr;
}

Json EvalReport::ToJson() const {
  Json j = Json::object();
  j["cutoffs"] = cutoffs;
  j["methods"] = methods;
  Json metric_rows = Json::array();
  for (const auto& m : metrics) {
    Json row = Json::object();
    row["method"] = m.method;
    row["k"] = m.k;
    row["median_nll"] = ScoreJson(m.median_nll);
    row["mean_rr"] = ScoreJson(m.mean_rr);
    metric_rows.push_back(std::move(row));
  }
  j["metrics"] = std::move(metric_rows);
  Json stat_rows = Json::object();
  for (const auto& method : methods) {
    auto it = stats.find(method);
    if (it == stats.end()) continue;
    const auto& s = it->second;
    Json row = Json::object();
    row["entities"] = s.entity_count;
    row["queries"] = s.query_count;
    row["unique_queries_per_entity"] = {{"mean", s.unique_mean}, {"std", s.unique_std}};
    row["query_length"] = {{"mean", s.length_mean}, {"std", s.length_std}};
    row["pct_over_15_terms"] = s.pct_over_15_terms;
    stat_rows[method] = std::move(row);
  }
  j["query_stats"] = std::move(stat_rows);
  Json jac = Json::array();
  for (const auto& r : jaccard) {
    Json row = Json::object();
    row["a"] = r.method_a;
    row["b"] = r.method_b;
    row["mean"] = r.summary.mean;
    row["std"] = r.summary.std;
    row["entities"] = r.summary.entities;
    row["skipped"] = r.summary.skipped;
    jac.push_back(std::move(row));
  }
  j["jaccard"] = std::move(jac);
  return j;
}

std::vector<std::string> OrderMethods(std::set<std::string> methods) {
  std::vector<std::string> out(methods.begin(), methods.end());
  auto rank = [](const std::string& m) {
    if (m == kEntityNameMethod) return 0;
    if (m == kTemplateMethod) return 1;
    return 2;
  };
  std::stable_sort(out.begin(), out.end(),
                   [&](const std::string& a, const std::string& b) {
                     return rank(a) < rank(b);
                   });
  return out;
}

EvalReport BuildReport(const EvalInputs& inputs, const EvalConfig& cfg) {
  cfg.Validate();
  EvalReport report;
  report.cutoffs = cfg.cutoffs;
  std::set<std::string> methods;
  std::map<std::string, std::vector<GeneratedQuery>> queries_by_method;
  for (const auto& q : inputs.queries) {
    methods.insert(q.method);
    queries_by_method[q.method].push_back(q);
  }
  for (const auto& r : inputs.nll) methods.insert(r.method);
  for (const auto& r : inputs.rr) methods.insert(r.method);
  report.methods = OrderMethods(std::move(methods));

  for (const auto& method : report.methods) {
    auto nll = GroupScores(inputs.nll, method);
    auto rr = GroupScores(inputs.rr, method);
    for (int k : cfg.cutoffs) {
      MetricPoint point;
      point.method = method;
      point.k = k;
      if (!Pool(nll, k).empty()) point.median_nll = MedianNllAtK(nll, k);
      if (!Pool(rr, k).empty()) point.mean_rr = MeanRrAtK(rr, k);
      report.metrics.push_back(std::move(point));
    }
    if (auto it = queries_by_method.find(method); it != queries_by_method.end()) {
      report.stats[method] = ComputeQueryStats(it->second);
    }
  }
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < report.methods.size(); ++j) {
      auto a = queries_by_method.find(report.methods[i]);
      auto b = queries_by_method.find(report.methods[j]);
      if (a == queries_by_method.end() || b == queries_by_method.end()) continue;
      report.jaccard.push_back({a->first, b->first,
                                JaccardComplementarity(QuerySetsByEntity(a->second),
                                                       QuerySetsByEntity(b->second))});
    }
  }
  return report;
}

EvalInputs LoadEvalInputs(const std::filesystem::path& dir,
                          const PipelineConfig& cfg) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("scores directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  EvalInputs inputs;
  for (const auto& path : files) {
    bool is_query_file = false;
    bool empty = true;
    ForEachJsonLine(path, [&](const Json& j, std::size_t) {
      if (empty) is_query_file = j.contains("text");
      empty = false;
    });
    if (empty) continue;
    if (is_query_file) {
      auto qs = ReadQuerySet(path, cfg);
      inputs.queries.insert(inputs.queries.end(), qs.begin(), qs.end());
    } else {
      ScoreKind kind = ScoreKind::kNll;
      auto records = ReadScores(path, &kind);
      auto& target = kind == ScoreKind::kNll ? inputs.nll : inputs.rr;
      target.insert(target.end(), records.begin(), records.end());
    }
  }
  return inputs;
}

void EmitReport(const EvalReport& report, const std::filesystem::path& dir) {
  WriteTextFile(dir / "report.json", report.ToJson().dump(2) + "\n");

  std::ostringstream metrics;
  metrics << kMetricsHeader << '\n';
  for (const auto& m : report.metrics) {
    metrics << m.method << '\t' << m.k << '\t' << Num(m.median_nll) << '\t'
            << Num(m.mean_rr) << '\n';
  }
  WriteTextFile(dir / "metrics.tsv", metrics.str());

  std::ostringstream stats;
  stats << "method\tentities\tqueries\tunique_mean\tunique_std\tlength_mean"
           "\tlength_std\tpct_over_15_terms\n";
  for (const auto& method : report.methods) {
    auto it = report.stats.find(method);
    if (it == report.stats.end()) continue;
    const auto& s = it->second;
    stats << method << '\t' << s.entity_count << '\t' << s.query_count << '\t'
          << Num(s.unique_mean) << '\t' << Num(s.unique_std) << '\t'
          << Num(s.length_mean) << '\t' << Num(s.length_std) << '\t'
          << Num(s.pct_over_15_terms) << '\n';
  }
  WriteTextFile(dir / "query_stats.tsv", stats.str());

  std::ostringstream jac;
  jac << "method_a\tmethod_b\tmean\tstd\tentities\tskipped\n";
  for (const auto& r : report.jaccard) {
    jac << r.method_a << '\t' << r.method_b << '\t' << Num(r.summary.mean)
        << '\t' << Num(r.summary.std) << '\t' << r.summary.entities << '\t'
        << r.summary.skipped << '\n';
  }
  WriteTextFile(dir / "jaccard.tsv", jac.str());
}

}  // namespace qgen
