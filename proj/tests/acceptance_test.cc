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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "qgen/pipeline.h"

namespace {

using namespace qgen;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kFixtures = QGEN_FIXTURES;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

fs::path TempDir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// `failure` stays empty when the criterion holds. `detail` carries the
// measured values for the log line.
struct Outcome {
  std::string failure;
  std::string detail;
};

LmTrainConfig Mle(int prune) {
  LmTrainConfig cfg;
  cfg.smoothing = Smoothing::kMleUnsmoothed;
  cfg.prune_min_count = prune;
  return cfg;
}

std::vector<NgramModel::WordId> Ids(const NgramModel& m, const TokenSeq& words) {
  std::vector<NgramModel::WordId> out;
  for (const auto& w : words) out.push_back(m.IdOrUnknown(w));
  return out;
}

double WorstNormalizationError(const NgramModel& m) {
  std::vector<NgramModel::Ngram> contexts = {{}};
  for (int n = 1; n < m.order(); ++n) {
    for (const auto& [g, e] : m.table(n)) {
      if (e.log_backoff) contexts.push_back(g);
    }
  }
  double worst = 0.0;
  for (const auto& c : contexts) {
    double sum = 0.0;
    for (NgramModel::WordId w = 0; w < m.vocab().size(); ++w) {
      if (w != m.begin_id()) sum += std::exp(m.LogProb(c, w));
    }
    worst = std::max(worst, std::abs(1.0 - sum));
  }
  return worst;
}

Outcome Normalization() {
  auto start = Clock::now();
  double worst = 0.0;
  for (std::uint32_t seed = 1; seed <= 20; ++seed) {
    auto corpus = oracle::RandomCorpus(seed, 50, 20);
    worst = std::max(worst, WorstNormalizationError(TrainLm(corpus, LmTrainConfig{})));
    worst = std::max(worst, WorstNormalizationError(TrainLm(corpus, Mle(3))));
  }
  double secs = Seconds(start);
  Outcome o;
  o.detail = "max |1 - sum| = " + Sci(worst) + ", " + std::to_string(secs) + " s";
  if (worst > 1e-6) o.failure = "distribution does not sum to 1";
  if (secs >= 10.0) o.failure = "took too long";
  return o;
}

Outcome CountRatio() {
  Outcome o;
  std::vector<TokenSeq> nine;
  for (int i = 0; i < 6; ++i) nine.push_back({"play", "music"});
  for (int i = 0; i < 3; ++i) nine.push_back({"play", "jazz"});
  double worked = ScoreNll(TrainLm(nine, Mle(3)), {"play", "music"})->nll;
  if (std::abs(worked + std::log(2.0 / 3.0)) > 1e-9) {
    o.failure = "worked example gives " + std::to_string(worked);
  }
  double worst = 0.0;
  for (std::uint32_t seed = 1; seed <= 20; ++seed) {
    auto corpus = oracle::RandomCorpus(seed, 50, 20);
    auto m = TrainLm(corpus, Mle(1));
    oracle::NgramCounts counts(corpus, 4);
    for (const auto& s : corpus) {
      double want = oracle::SentenceNll(counts, s, [&](auto h, auto w) {
        return oracle::CountRatioProb(counts, h, w);
      });
      worst = std::max(worst, std::abs(ScoreNll(m, s)->nll - want));
    }
  }
  o.detail = "max deviation " + Sci(worst);
  if (worst > 1e-9) o.failure = "NLL differs from count ratios";
  return o;
}

Outcome Pruning() {
  Outcome o;
  std::size_t checked = 0, wrong = 0;
  double worst = 0.0;
  for (std::uint32_t seed = 1; seed <= 20; ++seed) {
    auto corpus = oracle::RandomCorpus(seed, 50, 8);
    oracle::NgramCounts counts(corpus, 4);
    for (const auto& model : {TrainLm(corpus, LmTrainConfig{}), TrainLm(corpus, Mle(3))}) {
      std::size_t kept = 0;
      for (const auto& [g, c] : counts.count) {
        if (g.size() < 2) continue;
        bool present = model.Find(Ids(model, g)) != nullptr;
        ++checked;
        if (present != (c >= 3)) ++wrong;
        if (present) ++kept;
      }
      std::size_t stored = 0;
      for (int n = 2; n <= 4; ++n) stored += model.table(n).size();
      if (stored != kept) ++wrong;
    }
    auto mle = TrainLm(corpus, Mle(3));
    for (const auto& s : corpus) {
      double want = oracle::SentenceNll(counts, s, [&](auto h, auto w) {
        return oracle::KatzMleProb(counts, 3, h, w);
      });
      worst = std::max(worst, std::abs(ScoreNll(mle, s)->nll - want));
    }
  }
  o.detail = std::to_string(checked) + " n-grams checked, back-off deviation " +
             Sci(worst);
  if (wrong > 0) o.failure = std::to_string(wrong) + " n-grams kept or dropped wrongly";
  if (worst > 1e-9) o.failure = "pruned model differs from back-off recursion";
  return o;
}

Outcome ArpaRoundTrip() {
  Outcome o;
  auto corpus = LoadCorpus(kFixtures / "query_log.txt", PipelineConfig::Default());
  auto model = TrainLm(corpus, LmTrainConfig{});
  auto path = fs::temp_directory_path() / "qgen_acceptance.arpa";
  ExportArpa(model, path);
  auto back = ImportArpa(path);
  fs::remove(path);
  std::mt19937 rng(2026);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    TokenSeq probe;
    if (i % 2 == 0) {
      probe = corpus[rng() % corpus.size()];
    } else {
      int len = 1 + static_cast<int>(rng() % 6);
      for (int j = 0; j < len; ++j) {
        probe.push_back(rng() % 10 == 0 ? "unseen" + std::to_string(j)
                                        : model.vocab()[rng() % model.vocab().size()]);
      }
    }
    double a = ScoreNll(model, probe)->nll, b = ScoreNll(back, probe)->nll;
    if (!std::isfinite(a) || !std::isfinite(b)) {
      o.failure = "non-finite NLL for probe " + std::to_string(i);
      continue;
    }
    worst = std::max(worst, std::abs(a - b));
  }
  o.detail = "100 probes, max deviation " + Sci(worst);
  if (worst > 1e-9) o.failure = "scores change after re-import";
  return o;
}

Outcome Bm25() {
  Outcome o;
  PipelineConfig verbatim;
  verbatim.stemming_enabled = false;
  Index two = BuildIndex(Catalog({{"d1", "Taylor Swift", "", "taylor swift singer"},
                                  {"d2", "Ed Sheeran", "", "ed sheeran singer"}}),
                         verbatim);
  double example = ScoreBm25L(two, {"taylor"}).ScoreOf("d1");
  if (std::abs(example - 0.8664) > 5e-5) o.failure = "example scores " + std::to_string(example);

  std::mt19937 rng(17);
  std::size_t rankings = 0, mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n_docs = 1 + static_cast<int>(rng() % 100);
    const int vocab = 5 + static_cast<int>(rng() % 40);
    std::vector<Entity> entities;
    std::vector<oracle::Bm25Doc> docs;
    for (int d = 0; d < n_docs; ++d) {
      oracle::Bm25Doc doc{"e" + std::to_string(1000 + d), {}};
      int len = 1 + static_cast<int>(rng() % 30);
      for (int i = 0; i < len; ++i) doc.terms.push_back("t" + std::to_string(rng() % vocab));
      entities.push_back({doc.id, doc.id, "", JoinTokens(doc.terms)});
      docs.push_back(doc);
    }
    Index idx = BuildIndex(Catalog(entities), verbatim);
    Bm25Params params;
    for (int q = 0; q < 10; ++q) {
      TokenSeq query;
      int len = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < len; ++i) query.push_back("t" + std::to_string(rng() % (vocab + 3)));
      auto want = oracle::Bm25LRanking(docs, query, params.k1, params.b, params.delta);
      auto got = ScoreBm25L(idx, query, params);
      ++rankings;
      for (std::size_t i = 0; i < want.size(); ++i) {
        if (got.ranking()[i].entity_id != want[i].id) ++mismatches;
        worst = std::max(worst, std::abs(got.ranking()[i].score - want[i].score));
      }
    }
  }
  o.detail = "example " + std::to_string(example) + ", " + std::to_string(rankings) +
             " rankings, max score deviation " + Sci(worst);
  if (mismatches > 0) o.failure = std::to_string(mismatches) + " rank positions differ";
  if (worst > 1e-9) o.failure = "scores differ from brute force";
  return o;
}

// Fixture pipeline run shared by the metric criteria.
struct FixtureRun {
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  EvalReport report;
};

const FixtureRun& RunFixture() {
  static FixtureRun run = [] {
    FixtureRun r;
    auto out = TempDir("qgen_acceptance_run");
    try {
      auto cfg = RunConfig::Load(kFixtures / "run_config.json");
      cfg.out_dir = out;
      auto start = Clock::now();
      RunPipeline(cfg, nullptr);
      r.seconds = Seconds(start);
      auto pipeline = LoadPipelineConfig(cfg.stopwords, cfg.wakewords, cfg.stemming);
      r.report = BuildReport(LoadEvalInputs(out / "scores", pipeline), EvalConfig{cfg.cutoffs});
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    fs::remove_all(out);
    return r;
  }();
  return run;
}

std::string LlmMethod(const EvalReport& report) {
  for (const auto& m : report.methods) {
    if (m.starts_with("llm:")) return m;
  }
  return "";
}

Outcome RrOrdering() {
  Outcome o;
  const auto& run = RunFixture();
  if (!run.ok) return {"pipeline failed: " + run.error, ""};
  const auto* name = run.report.Find("entity_name", 10);
  const auto* tmpl = run.report.Find("template", 10);
  const auto* llm = run.report.Find(LlmMethod(run.report), 10);
  if (!name || !tmpl || !llm || !name->mean_rr || !tmpl->mean_rr || !llm->mean_rr) {
    return {"missing RR@10", ""};
  }
  o.detail = "entity_name " + std::to_string(*name->mean_rr) + ", template " +
             std::to_string(*tmpl->mean_rr) + ", " + llm->method + " " +
             std::to_string(*llm->mean_rr) + ", " + std::to_string(run.seconds) + " s";
  if (!(*name->mean_rr >= *tmpl->mean_rr && *tmpl->mean_rr > *llm->mean_rr)) {
    o.failure = "ordering violated";
  }
  if (*name->mean_rr < 0.95) o.failure = "entity-name RR below 0.95";
  if (run.seconds >= 30.0) o.failure = "took too long";
  return o;
}

Outcome NllOrdering() {
  Outcome o;
  const auto& run = RunFixture();
  if (!run.ok) return {"pipeline failed: " + run.error, ""};
  const std::string llm = LlmMethod(run.report);
  for (int k : {10, 20, 30, 40}) {
    const auto* a = run.report.Find("entity_name", k);
    const auto* b = run.report.Find("template", k);
    const auto* c = run.report.Find(llm, k);
    if (!a || !b || !c || !a->median_nll || !b->median_nll || !c->median_nll) {
      return {"missing NLL at K=" + std::to_string(k), o.detail};
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%sK=%d: %.3f/%.3f/%.3f", o.detail.empty() ? "" : ", ", k,
                  *a->median_nll, *b->median_nll, *c->median_nll);
    o.detail += buf;
    if (!(*a->median_nll <= *b->median_nll && *b->median_nll < *c->median_nll)) {
      o.failure = "ordering violated at K=" + std::to_string(k);
    }
  }
  return o;
}

Outcome JaccardTemplatesVsLlm() {
  const auto& run = RunFixture();
  if (!run.ok) return {"pipeline failed: " + run.error, ""};
  const std::string llm = LlmMethod(run.report);
  for (const auto& row : run.report.jaccard) {
    if ((row.method_a == "template" && row.method_b == llm) ||
        (row.method_a == llm && row.method_b == "template")) {
      Outcome o;
      o.detail = "mean " + std::to_string(row.summary.mean) + " over " +
                 std::to_string(row.summary.entities) + " entities";
      if (!(row.summary.mean < 0.05)) o.failure = "overlap too high";
      return o;
    }
  }
  return {"no template/llm Jaccard row", ""};
}

Outcome EntityNameUnique() {
  const auto& run = RunFixture();
  if (!run.ok) return {"pipeline failed: " + run.error, ""};
  auto it = run.report.stats.find("entity_name");
  if (it == run.report.stats.end()) return {"no entity_name statistics", ""};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f +- %.2f", it->second.unique_mean, it->second.unique_std);
  Outcome o{"", buf};
  if (std::string(buf) != "1.00 +- 0.00") o.failure = "expected exactly one query per entity";
  return o;
}

// Replies with a fixed completion.
class FixedProvider : public CompletionProvider {
 public:
  explicit FixedProvider(std::string reply) : reply_(std::move(reply)) {}
  std::string Complete(const Prompt&) override { return reply_; }
  std::string label() const override { return "fixed"; }
  int max_attempts() const override { return 1; }
  std::chrono::milliseconds timeout() const override { return std::chrono::seconds(1); }

 private:
  std::string reply_;
};

Outcome WakewordStrip() {
  Outcome o;
  auto cfg = LoadPipelineConfig(kFixtures / "stopwords.txt", kFixtures / "wakewords.txt", true);
  FixedProvider provider("1. hey VA play Moderat");
  auto out = GenerateLlm({"moderat", "Moderat", "Moderat is a German band.", "doc"}, provider,
                         LlmOptions{}, cfg);
  if (out.queries.size() != 1) return {"expected one query", ""};
  const auto& q = out.queries[0];
  o.detail = "\"" + q.text + "\" -> \"" + q.normalized_text + "\" [" + JoinTokens(q.tokens) + "]";
  if (q.normalized_text != "play Moderat") o.failure = "wakeword not stripped";
  if (q.tokens != TokenSeq{"play", "moderat"}) o.failure = "unexpected tokens";
  return o;
}

int RunCli(const std::string& args) {
  std::string cmd = std::string("\"") + QGEN_CLI + "\" " + args + " > /dev/null 2>&1";
  int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::map<std::string, std::string> OutputDigests(const fs::path& out_dir) {
  auto m = Json::parse(Slurp(out_dir / "manifest.json"));
  std::map<std::string, std::string> out;
  for (const auto& stage : m["stages"]) {
    for (const auto& f : stage["outputs"]) {
      out[fs::relative(f["path"].get<std::string>(), out_dir).string()] =
          f["sha256"].get<std::string>();
    }
  }
  return out;
}

Outcome CliReproducible() {
  Outcome o;
  auto a = TempDir("qgen_acceptance_cli_a");
  auto b = TempDir("qgen_acceptance_cli_b");
  const std::string cfg = "\"" + (kFixtures / "run_config.json").string() + "\"";
  auto start = Clock::now();
  int sa = RunCli("-q run --config " + cfg + " --out-dir \"" + a.string() + "\"");
  int sb = RunCli("-q run --config " + cfg + " --out-dir \"" + b.string() + "\"");
  double secs = Seconds(start);
  if (sa != 0 || sb != 0) {
    o.failure = "run exited with " + std::to_string(sa) + "/" + std::to_string(sb);
  } else {
    auto da = OutputDigests(a), db = OutputDigests(b);
    o.detail = std::to_string(da.size()) + " outputs, " + std::to_string(secs) + " s";
    if (da.empty() || da != db) o.failure = "output digests differ";
    if (secs >= 60.0) o.failure = "took too long";
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"LM distributions sum to 1 on random corpora", Normalization},
      {"unsmoothed LM matches count ratios", CountRatio},
      {"pruning keeps exactly the n-grams with count >= 3", Pruning},
      {"ARPA export/import preserves scores", ArpaRoundTrip},
      {"BM25L matches brute force", Bm25},
      {"RR@10 entity-name >= templates > LLM", RrOrdering},
      {"median NLL entity-name <= templates < LLM", NllOrdering},
      {"templates vs LLM Jaccard below 0.05", JaccardTemplatesVsLlm},
      {"entity-name unique queries per entity", EntityNameUnique},
      {"wakeword stripped from generated queries", WakewordStrip},
      {"CLI run is reproducible", CliReproducible},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.failure = std::string("exception: ") + e.what();
    }
    bool pass = o.failure.empty();
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": "
              << criteria[i].first;
    if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
    if (!pass) std::cout << ": " << o.failure;
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
