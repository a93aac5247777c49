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

// qgen: query generation, language-model and retrieval evaluation tool.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qgen/pipeline.h"

namespace fs = std::filesystem;
using namespace qgen;

namespace {

struct GlobalOptions {
  std::optional<std::string> stopwords;
  std::optional<std::string> wakewords;
  bool no_stemming = false;
  bool quiet = false;

  PipelineConfig Pipeline() const {
    auto path = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
      if (s) return fs::path(*s);
      return std::nullopt;
    };
    return LoadPipelineConfig(path(stopwords), path(wakewords), !no_stemming);
  }
  std::ostream* log() const { return quiet ? nullptr : &std::cerr; }
};

template <typename Fn>
void Staged(const std::string& stage, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

Smoothing ParseSmoothing(const std::string& s) {
  if (s == "good-turing" || s == "good_turing") return Smoothing::kGoodTuring;
  if (s == "mle" || s == "mle_unsmoothed") return Smoothing::kMleUnsmoothed;
  throw Error("unknown smoothing '" + s + "' (expected good-turing or mle)");
}

RrMode ParseRrMode(const std::string& s) {
  if (s == "full-ranking" || s == "full_ranking") return RrMode::kFullRanking;
  if (s == "zero-if-unscored" || s == "zero_if_unscored") return RrMode::kZeroIfUnscored;
  throw Error("unknown rr mode '" + s + "' (expected full-ranking or zero-if-unscored)");
}

std::vector<int> ParseCutoffs(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error("invalid cutoff '" + part + "'");
    }
  }
  EvalConfig{out}.Validate();
  return out;
}

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgen: generate entity queries and evaluate them with an n-gram "
               "language model and BM25L retrieval"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--stopwords", global.stopwords, "Stopword list, one word per line")
      ->check(CLI::ExistingFile);
  app.add_option("--wakewords", global.wakewords,
                 "Wakeword list, one phrase per line")
      ->check(CLI::ExistingFile);
  app.add_flag("--no-stemming", global.no_stemming, "Disable Porter stemming for retrieval");
  app.add_flag("-q,--quiet", global.quiet, "Suppress progress and warnings on stderr");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a catalog and print its statistics");
  std::string ingest_catalog;
  ingest->add_option("--catalog", ingest_catalog, "Catalog JSONL")->required();
  ingest->callback([&] {
    Staged("ingest", [&] {
      Catalog catalog = LoadCatalog(ingest_catalog);
      auto stats = ComputeCatalogStats(catalog);
      Json j = {{"entities", stats.entity_count}};
      if (stats.mean_description_tokens) {
        j["description_tokens_mean"] = *stats.mean_description_tokens;
        j["description_tokens_std"] = *stats.std_description_tokens;
      }
      std::cout << j.dump() << '\n';
    });
  });

  // generate
  auto* generate = app.add_subcommand("generate", "Generate queries for every catalog entity");
  std::string gen_method, gen_catalog, gen_out;
  std::optional<std::string> gen_templates, gen_provider;
  int gen_k = kPromptQueryCount;
  std::string gen_examples(kDefaultPromptExamples);
  generate->add_option("--method", gen_method, "entity-name, templates or llm")->required();
  generate->add_option("--catalog", gen_catalog, "Catalog JSONL")->required();
  generate->add_option("--templates", gen_templates, "Weighted template TSV");
  generate->add_option("--provider", gen_provider, "Provider config JSON (llm method)");
  generate->add_option("--k", gen_k, "Queries per entity")->capture_default_str();
  generate->add_option("--examples", gen_examples, "Example phrases for the prompt")
      ->capture_default_str();
  generate->add_option("--out", gen_out, "Output query-set JSONL")->required();
  generate->callback([&] {
    Staged("generate", [&] {
      PipelineConfig cfg = global.Pipeline();
      MethodChoice method = ParseMethodChoice(gen_method);
      if (gen_k < 1) throw Error("--k must be positive");
      Catalog catalog = LoadCatalog(gen_catalog);
      std::vector<Template> templates;
      if (method == MethodChoice::kTemplates) {
        if (!gen_templates) throw Error("--templates is required for method templates");
        std::vector<std::string> warnings;
        templates = LoadTemplates(*gen_templates, &warnings);
        if (global.log()) {
          for (const auto& w : warnings) *global.log() << "warning: " << w << '\n';
        }
      }
      ProviderConfig provider_cfg;
      std::unique_ptr<CompletionProvider> provider;
      if (method == MethodChoice::kLlm) {
        if (gen_provider) provider_cfg = LoadProviderConfig(*gen_provider);
        provider = MakeProvider(provider_cfg);
      }
      auto queries = GenerateForCatalog(method, catalog, &templates, provider.get(),
                                        gen_k, provider_cfg.max_in_flight,
                                        gen_examples, cfg, global.log());
      WriteQuerySet(gen_out, queries);
      if (global.log()) *global.log() << "wrote " << queries.size() << " queries\n";
    });
  });

  // synth-corpus
  auto* synth = app.add_subcommand(
      "synth-corpus", "Write a synthetic query log for language-model training");
  std::string synth_catalog, synth_templates, synth_out;
  std::size_t synth_count = 20000;
  std::uint64_t synth_seed = 1;
  synth->add_option("--catalog", synth_catalog, "Catalog JSONL")->required();
  synth->add_option("--templates", synth_templates, "Weighted template TSV")->required();
  synth->add_option("--count", synth_count, "Number of lines")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output text file")->required();
  synth->callback([&] {
    Staged("synth-corpus", [&] {
      Catalog catalog = LoadCatalog(synth_catalog);
      auto templates = LoadTemplates(synth_templates, nullptr, true);
      std::string text;
      for (const auto& line : SynthesizeQueryLog(catalog, templates, synth_count, synth_seed)) {
        text += line;
        text += '\n';
      }
      WriteTextFile(synth_out, text);
    });
  });

  // train-lm
  auto* train = app.add_subcommand("train-lm", "Train a back-off n-gram model and write ARPA");
  std::string train_corpus, train_out, train_smoothing = "good-turing";
  LmTrainConfig lm_cfg;
  train->add_option("--corpus", train_corpus, "Query log, one query per line")->required();
  train->add_option("--order", lm_cfg.order, "N-gram order")->capture_default_str();
  train->add_option("--prune-min-count", lm_cfg.prune_min_count,
                    "Drop n-grams of order >= 2 seen fewer times")
      ->capture_default_str();
  train->add_option("--gt-max-count", lm_cfg.gt_max_count,
                    "Largest count that is discounted")
      ->capture_default_str();
  train->add_option("--unk-floor", lm_cfg.unk_mass_floor, "Minimum <unk> probability")
      ->capture_default_str();
  train->add_option("--smoothing", train_smoothing, "good-turing or mle")
      ->capture_default_str();
  train->add_option("--out", train_out, "Output ARPA file")->required();
  train->callback([&] {
    Staged("train-lm", [&] {
      lm_cfg.smoothing = ParseSmoothing(train_smoothing);
      auto corpus = LoadCorpus(train_corpus, global.Pipeline());
      auto model = TrainLm(corpus, lm_cfg);
      if (global.log()) {
        for (const auto& w : model.warnings()) *global.log() << "warning: " << w << '\n';
      }
      ExportArpa(model, train_out);
    });
  });

  // score-nll
  auto* score_nll = app.add_subcommand("score-nll", "Score queries by negative log-likelihood");
  std::string nll_lm, nll_queries, nll_out;
  score_nll->add_option("--lm", nll_lm, "ARPA model")->required();
  score_nll->add_option("--queries", nll_queries, "Query-set JSONL")->required();
  score_nll->add_option("--out", nll_out, "Output score JSONL")->required();
  score_nll->callback([&] {
    Staged("score-nll", [&] {
      NgramModel model = ImportArpa(nll_lm);
      auto queries = ReadQuerySet(nll_queries, global.Pipeline());
      WriteScores(nll_out, ScoreKind::kNll, ScoreQueriesNll(model, queries));
    });
  });

  // index
  auto* index_cmd = app.add_subcommand("index", "Build a BM25L index over catalog documents");
  std::string index_catalog, index_out;
  index_cmd->add_option("--catalog", index_catalog, "Catalog JSONL")->required();
  index_cmd->add_option("--out", index_out, "Output index JSON")->required();
  index_cmd->callback([&] {
    Staged("index", [&] {
      SaveIndex(BuildIndex(LoadCatalog(index_catalog), global.Pipeline()), index_out);
    });
  });

  // score-rr
  auto* score_rr = app.add_subcommand("score-rr", "Score queries by reciprocal rank");
  std::string rr_index, rr_queries, rr_out, rr_mode = "full-ranking";
  Bm25Params bm25;
  score_rr->add_option("--index", rr_index, "Index JSON")->required();
  score_rr->add_option("--queries", rr_queries, "Query-set JSONL")->required();
  score_rr->add_option("--out", rr_out, "Output score JSONL")->required();
  score_rr->add_option("--k1", bm25.k1, "BM25L k1")->capture_default_str();
  score_rr->add_option("--b", bm25.b, "BM25L b")->capture_default_str();
  score_rr->add_option("--delta", bm25.delta, "BM25L delta")->capture_default_str();
  score_rr->add_option("--rr-mode", rr_mode, "full-ranking or zero-if-unscored")
      ->capture_default_str();
  score_rr->callback([&] {
    Staged("score-rr", [&] {
      bm25.Validate();
      RrMode mode = ParseRrMode(rr_mode);
      Index index = LoadIndex(rr_index);
      auto queries = ReadQuerySet(rr_queries, global.Pipeline());
      WriteScores(rr_out, ScoreKind::kRr, ScoreQueriesRr(index, queries, bm25, mode));
    });
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate scores into tables");
  std::string report_scores, report_out, report_cutoffs = "10,20,30,40";
  report_cmd->add_option("--scores", report_scores,
                         "Directory of query-set and score JSONL files")
      ->required()
      ->check(CLI::ExistingDirectory);
  report_cmd->add_option("--cutoffs", report_cutoffs, "Comma-separated K values")
      ->capture_default_str();
  report_cmd->add_option("--out", report_out, "Output directory")->required();
  report_cmd->callback([&] {
    Staged("report", [&] {
      EvalConfig cfg{ParseCutoffs(report_cutoffs)};
      EvalReport report = BuildReport(LoadEvalInputs(report_scores, global.Pipeline()), cfg);
      EmitReport(report, report_out);
      std::cout << kMetricsHeader << '\n';
      for (const auto& m : report.metrics) {
        std::cout << m.method << '\t' << m.k << '\t'
                  << (m.median_nll ? Fmt(*m.median_nll) : "NA") << '\t'
                  << (m.mean_rr ? Fmt(*m.mean_rr) : "NA") << '\n';
      }
    });
  });

  // run
  auto* run = app.add_subcommand("run", "Run every stage from a JSON config");
  std::string run_config;
  std::optional<std::string> run_out_dir;
  std::optional<int> run_k;
  run->add_option("--config", run_config, "Run config JSON")->required();
  run->add_option("--out-dir", run_out_dir, "Override the output directory");
  run->add_option("--k", run_k, "Override queries per entity");
  run->callback([&] {
    RunConfig cfg;
    Staged("config", [&] {
      cfg = RunConfig::Load(run_config);
      if (run_out_dir) cfg.out_dir = *run_out_dir;
      if (run_k) cfg.k = *run_k;
      if (global.stopwords) cfg.stopwords = *global.stopwords;
      if (global.wakewords) cfg.wakewords = *global.wakewords;
      if (global.no_stemming) cfg.stemming = false;
    });
    RunPipeline(cfg, global.log());
  });

  // normalize
  auto* normalize = app.add_subcommand("normalize", "Print the normalized tokens of a text");
  std::string norm_text, norm_mode = "lm";
  normalize->add_option("--text", norm_text, "Input text")->required();
  normalize->add_option("--mode", norm_mode, "lm or retrieval")->capture_default_str();
  normalize->callback([&] {
    Staged("normalize", [&] {
      PipelineConfig cfg = global.Pipeline();
      if (norm_mode == "lm") {
        std::cout << JoinTokens(PreprocessForLm(norm_text, cfg)) << '\n';
      } else if (norm_mode == "retrieval") {
        std::cout << JoinTokens(PreprocessForRetrieval(StripWakewordText(norm_text, cfg), cfg))
                  << '\n';
      } else {
        throw Error("unknown mode '" + norm_mode + "'");
      }
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "qgen: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
