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

#include "qgen/pipeline.h"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace qgen {
namespace fs = std::filesystem;
namespace {

std::string NowUtc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string FileStem(const std::string& method) {
  std::string out = method;
  for (char& c : out) {
    if (c == ':' || c == '/' || c == ' ') c = '_';
  }
  return out;
}

FileDigest Digest(const fs::path& path) {
  return {path.string(), Sha256File(path)};
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename Fn>
auto RunStage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

MethodChoice ParseMethodChoice(const std::string& name) {
  if (name == "entity-name" || name == "entity_name") return MethodChoice::kEntityName;
  if (name == "templates" || name == "template") return MethodChoice::kTemplates;
  if (name == "llm") return MethodChoice::kLlm;
  throw Error("unknown generation method '" + name +
              "' (expected entity-name, templates or llm)");
}

std::string MethodChoiceName(MethodChoice m) {
  switch (m) {
    case MethodChoice::kEntityName: return "entity-name";
    case MethodChoice::kTemplates: return "templates";
    case MethodChoice::kLlm: return "llm";
  }
  return "";
}

PipelineConfig LoadPipelineConfig(const std::optional<fs::path>& stopwords,
                                  const std::optional<fs::path>& wakewords,
                                  bool stemming) {
  PipelineConfig cfg = PipelineConfig::Default();
  if (stopwords) cfg.stopwords = LoadStopwords(*stopwords);
  if (wakewords) cfg.wakewords = LoadWakewords(*wakewords);
  cfg.stemming_enabled = stemming;
  return cfg;
}

std::vector<GeneratedQuery> GenerateForCatalog(
    MethodChoice method, const Catalog& catalog,
    const std::vector<Template>* templates, CompletionProvider* provider,
    int k, int max_in_flight, const std::string& examples,
    const PipelineConfig& cfg, std::ostream* log) {
  std::vector<GeneratedQuery> out;
  switch (method) {
    case MethodChoice::kEntityName:
      for (const auto& e : catalog) {
        auto qs = GenerateEntityName(e, cfg);
        out.insert(out.end(), qs.begin(), qs.end());
      }
      break;
    case MethodChoice::kTemplates:
      if (templates == nullptr) throw Error("templates are required");
      for (const auto& e : catalog) {
        auto qs = GenerateFromTemplates(e, *templates, k, cfg);
        out.insert(out.end(), qs.begin(), qs.end());
      }
      break;
    case MethodChoice::kLlm: {
      if (provider == nullptr) throw Error("a completion provider is required");
      LlmOptions options;
      options.k = k;
      options.examples = examples;
      auto outcomes = GenerateLlmBatch(catalog, *provider, options, cfg, max_in_flight);
      for (auto& o : outcomes) {
        if (log != nullptr) {
          if (o.error) {
            *log << "warning: entity " << o.entity_id << ": " << *o.error << '\n';
          } else if (o.shortfall) {
            *log << "warning: entity " << o.entity_id << ": shortfall, parsed "
                 << o.parsed_lines << " of " << k << " queries\n";
          }
        }
        out.insert(out.end(), o.queries.begin(), o.queries.end());
      }
      break;
    }
  }
  CanonicalizeQueries(out);
  return out;
}

std::vector<ScoreRecord> ScoreQueriesNll(const NgramModel& model,
                                         const std::vector<GeneratedQuery>& queries) {
  std::vector<ScoreRecord> records;
  records.reserve(queries.size());
  for (const auto& q : queries) {
    ScoreRecord r{q.entity_id, q.method, q.rank, std::nullopt};
    if (auto s = ScoreNll(model, q.tokens)) r.value = s->nll;
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ScoreRecord> ScoreQueriesRr(const Index& index,
                                        const std::vector<GeneratedQuery>& queries,
                                        const Bm25Params& params, RrMode mode) {
  std::vector<ScoreRecord> records;
  records.reserve(queries.size());
  for (const auto& q : queries) {
    auto result = ScoreBm25L(
        index, PreprocessForRetrieval(q.normalized_text, index.pipeline()), params);
    records.push_back({q.entity_id, q.method, q.rank,
                       ReciprocalRank(result, q.entity_id, mode)});
  }
  return records;
}

std::string Sha256File(const fs::path& path) {
  std::string data = ReadTextFile(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

RunConfig RunConfig::Load(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(ReadTextFile(path));
  } catch (const Json::parse_error& e) {
    throw Error("malformed config " + path.string() + ": " + e.what());
  }
  fs::path base = fs::absolute(path).parent_path();
  return FromJson(j, base);
}

RunConfig RunConfig::FromJson(const Json& j, const fs::path& base) {
  RunConfig c;
  try {
    if (!j.contains("catalog")) throw Error("config is missing 'catalog'");
    c.catalog = Resolve(base, j.at("catalog").get<std::string>());
    if (j.contains("templates")) c.templates = Resolve(base, j.at("templates").get<std::string>());
    if (j.contains("corpus")) c.corpus = Resolve(base, j.at("corpus").get<std::string>());
    if (j.contains("stopwords")) c.stopwords = Resolve(base, j.at("stopwords").get<std::string>());
    if (j.contains("wakewords")) c.wakewords = Resolve(base, j.at("wakewords").get<std::string>());
    c.stemming = j.value("stemming", c.stemming);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(ParseMethodChoice(m.get<std::string>()));
    }
    c.k = j.value("k", c.k);
    if (j.contains("cutoffs")) c.cutoffs = j.at("cutoffs").get<std::vector<int>>();
    c.prompt_examples = j.value("prompt_examples", c.prompt_examples);
    if (j.contains("lm")) {
      const auto& lm = j.at("lm");
      c.lm.order = lm.value("order", c.lm.order);
      c.lm.prune_min_count = lm.value("prune_min_count", c.lm.prune_min_count);
      c.lm.gt_max_count = lm.value("gt_max_count", c.lm.gt_max_count);
      c.lm.unk_mass_floor = lm.value("unk_mass_floor", c.lm.unk_mass_floor);
      std::string smoothing = lm.value("smoothing", std::string("good_turing"));
      if (smoothing == "good_turing") {
        c.lm.smoothing = Smoothing::kGoodTuring;
      } else if (smoothing == "mle_unsmoothed") {
        c.lm.smoothing = Smoothing::kMleUnsmoothed;
      } else {
        throw Error("unknown smoothing mode '" + smoothing + "'");
      }
    }
    if (j.contains("bm25")) {
      const auto& b = j.at("bm25");
      c.bm25.k1 = b.value("k1", c.bm25.k1);
      c.bm25.b = b.value("b", c.bm25.b);
      c.bm25.delta = b.value("delta", c.bm25.delta);
    }
    std::string rr_mode = j.value("rr_mode", std::string("full_ranking"));
    if (rr_mode == "full_ranking") {
      c.rr_mode = RrMode::kFullRanking;
    } else if (rr_mode == "zero_if_unscored") {
      c.rr_mode = RrMode::kZeroIfUnscored;
    } else {
      throw Error("unknown rr_mode '" + rr_mode + "'");
    }
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      c.provider = p.is_string() ? LoadProviderConfig(Resolve(base, p.get<std::string>()))
                                 : ProviderConfig::FromJson(p);
    }
    if (j.contains("out_dir")) c.out_dir = Resolve(base, j.at("out_dir").get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
  return c;
}

void RunConfig::Validate() const {
  auto require_file = [](const fs::path& p, const std::string& what) {
    if (p.empty()) throw Error(what + " path is required");
    if (!fs::is_regular_file(p)) throw Error(what + " not found: " + p.string());
  };
  require_file(catalog, "catalog");
  require_file(corpus, "corpus");
  if (stopwords) require_file(*stopwords, "stopword list");
  if (wakewords) require_file(*wakewords, "wakeword list");
  if (methods.empty()) throw Error("at least one generation method is required");
  for (auto m : methods) {
    if (m == MethodChoice::kTemplates) {
      if (!templates) throw Error("method 'templates' requires a templates path");
      require_file(*templates, "templates");
    }
  }
  if (k < 1) throw Error("k must be positive");
  EvalConfig{cutoffs}.Validate();
  lm.Validate();
  bm25.Validate();
}

Json RunConfig::ToJson() const {
  Json j = Json::object();
  j["catalog"] = catalog.string();
  if (templates) j["templates"] = templates->string();
  j["corpus"] = corpus.string();
  if (stopwords) j["stopwords"] = stopwords->string();
  if (wakewords) j["wakewords"] = wakewords->string();
  j["stemming"] = stemming;
  Json ms = Json::array();
  for (auto m : methods) ms.push_back(MethodChoiceName(m));
  j["methods"] = std::move(ms);
  j["k"] = k;
  j["cutoffs"] = cutoffs;
  j["prompt_examples"] = prompt_examples;
  j["lm"] = {{"order", lm.order},
             {"prune_min_count", lm.prune_min_count},
             {"gt_max_count", lm.gt_max_count},
             {"unk_mass_floor", lm.unk_mass_floor},
             {"smoothing", lm.smoothing == Smoothing::kGoodTuring ? "good_turing"
                                                                  : "mle_unsmoothed"}};
  j["bm25"] = {{"k1", bm25.k1}, {"b", bm25.b}, {"delta", bm25.delta}};
  j["rr_mode"] = rr_mode == RrMode::kFullRanking ? "full_ranking" : "zero_if_unscored";
  j["provider"] = provider.ToJson();
  j["out_dir"] = out_dir.string();
  return j;
}

Json RunManifest::ToJson() const {
  Json j = Json::object();
  j["config"] = config;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  Json stage_list = Json::array();
  auto files = [](const std::vector<FileDigest>& ds) {
    Json arr = Json::array();
    for (const auto& d : ds) arr.push_back({{"path", d.path}, {"sha256", d.sha256}});
    return arr;
  };
  for (const auto& s : stages) {
    Json sj = Json::object();
    sj["name"] = s.name;
    sj["inputs"] = files(s.inputs);
    sj["outputs"] = files(s.outputs);
    sj["started_at"] = s.started_at;
    sj["finished_at"] = s.finished_at;
    stage_list.push_back(std::move(sj));
  }
  j["stages"] = std::move(stage_list);
  return j;
}

RunManifest RunPipeline(const RunConfig& config, std::ostream* log) {
  RunStage("config", [&] { config.Validate(); return 0; });

  RunManifest manifest;
  manifest.config = config.ToJson();
  manifest.started_at = NowUtc();
  auto say = [&](const std::string& msg) {
    if (log != nullptr) *log << msg << '\n';
  };

  const fs::path out = config.out_dir;
  const fs::path scores_dir = out / "scores";
  const fs::path report_dir = out / "report";
  const fs::path lm_path = out / "lm.arpa";
  const fs::path index_path = out / "index.json";
  fs::create_directories(scores_dir);

  auto begin_stage = [&](const std::string& name) {
    say("[" + name + "]");
    StageRecord r;
    r.name = name;
    r.started_at = NowUtc();
    return r;
  };
  auto end_stage = [&](StageRecord r) {
    r.finished_at = NowUtc();
    manifest.stages.push_back(std::move(r));
  };

  PipelineConfig cfg = RunStage("ingest", [&] {
    return LoadPipelineConfig(config.stopwords, config.wakewords, config.stemming);
  });
  auto text_inputs = [&] {
    std::vector<FileDigest> ds;
    if (config.stopwords) ds.push_back(Digest(*config.stopwords));
    if (config.wakewords) ds.push_back(Digest(*config.wakewords));
    return ds;
  };

  // ingest
  auto stage = begin_stage("ingest");
  Catalog catalog = RunStage("ingest", [&] {
    Catalog c = LoadCatalog(config.catalog);
    auto stats = ComputeCatalogStats(c);
    say("  entities: " + std::to_string(stats.entity_count));
    return c;
  });
  stage.inputs.push_back(Digest(config.catalog));
  end_stage(std::move(stage));

  // generate
  stage = begin_stage("generate");
  std::vector<std::pair<std::string, fs::path>> query_files;
  RunStage("generate", [&] {
    stage.inputs.push_back(Digest(config.catalog));
    std::vector<Template> templates;
    if (config.templates) {
      std::vector<std::string> warnings;
      templates = LoadTemplates(*config.templates, &warnings);
      for (const auto& w : warnings) say("  warning: " + w);
      stage.inputs.push_back(Digest(*config.templates));
    }
    for (auto& d : text_inputs()) stage.inputs.push_back(std::move(d));
    std::unique_ptr<CompletionProvider> provider;
    for (auto method : config.methods) {
      if (method == MethodChoice::kLlm && !provider) provider = MakeProvider(config.provider);
      auto queries = GenerateForCatalog(method, catalog, &templates, provider.get(),
                                        method == MethodChoice::kEntityName ? 1 : config.k,
                                        config.provider.max_in_flight,
                                        config.prompt_examples, cfg, log);
      std::string label = method == MethodChoice::kEntityName ? std::string(kEntityNameMethod)
                          : method == MethodChoice::kTemplates
                              ? std::string(kTemplateMethod)
                              : LlmMethodLabel(config.provider.label);
      fs::path path = scores_dir / (FileStem(label) + ".queries.jsonl");
      WriteQuerySet(path, queries);
      say("  " + label + ": " + std::to_string(queries.size()) + " queries");
      query_files.emplace_back(label, path);
      stage.outputs.push_back(Digest(path));
    }
    return 0;
  });
  end_stage(std::move(stage));

  // train-lm
  stage = begin_stage("train-lm");
  RunStage("train-lm", [&] {
    auto corpus = LoadCorpus(config.corpus, cfg);
    auto model = TrainLm(corpus, config.lm);
    for (const auto& w : model.warnings()) say("  warning: " + w);
    ExportArpa(model, lm_path);
    say("  sentences: " + std::to_string(corpus.size()));
    stage.inputs.push_back(Digest(config.corpus));
    for (auto& d : text_inputs()) stage.inputs.push_back(std::move(d));
    stage.outputs.push_back(Digest(lm_path));
    return 0;
  });
  end_stage(std::move(stage));

  // index
  stage = begin_stage("index");
  RunStage("index", [&] {
    SaveIndex(BuildIndex(catalog, cfg), index_path);
    stage.inputs.push_back(Digest(config.catalog));
    for (auto& d : text_inputs()) stage.inputs.push_back(std::move(d));
    stage.outputs.push_back(Digest(index_path));
    return 0;
  });
  end_stage(std::move(stage));

  // score-nll
  stage = begin_stage("score-nll");
  RunStage("score-nll", [&] {
    NgramModel model = ImportArpa(lm_path);
    stage.inputs.push_back(Digest(lm_path));
    for (const auto& [label, path] : query_files) {
      auto queries = ReadQuerySet(path, cfg);
      fs::path target = scores_dir / (FileStem(label) + ".nll.jsonl");
      WriteScores(target, ScoreKind::kNll, ScoreQueriesNll(model, queries));
      stage.inputs.push_back(Digest(path));
      stage.outputs.push_back(Digest(target));
    }
    return 0;
  });
  end_stage(std::move(stage));

  // score-rr
  stage = begin_stage("score-rr");
  RunStage("score-rr", [&] {
    Index index = LoadIndex(index_path);
    stage.inputs.push_back(Digest(index_path));
    for (const auto& [label, path] : query_files) {
      auto queries = ReadQuerySet(path, cfg);
      fs::path target = scores_dir / (FileStem(label) + ".rr.jsonl");
      WriteScores(target, ScoreKind::kRr,
                  ScoreQueriesRr(index, queries, config.bm25, config.rr_mode));
      stage.inputs.push_back(Digest(path));
      stage.outputs.push_back(Digest(target));
    }
    return 0;
  });
  end_stage(std::move(stage));

  // report
  stage = begin_stage("report");
  RunStage("report", [&] {
    EvalInputs inputs = LoadEvalInputs(scores_dir, cfg);
    std::vector<fs::path> score_files;
    for (const auto& e : fs::directory_iterator(scores_dir)) {
      if (e.path().extension() == ".jsonl") score_files.push_back(e.path());
    }
    std::sort(score_files.begin(), score_files.end());
    for (const auto& p : score_files) stage.inputs.push_back(Digest(p));
    EvalReport report = BuildReport(inputs, EvalConfig{config.cutoffs});
    EmitReport(report, report_dir);
    for (const char* name : {"report.json", "metrics.tsv", "query_stats.tsv", "jaccard.tsv"}) {
      stage.outputs.push_back(Digest(report_dir / name));
    }
    return 0;
  });
  end_stage(std::move(stage));

  manifest.finished_at = NowUtc();
  RunStage("manifest", [&] {
    WriteTextFile(out / "manifest.json", manifest.ToJson().dump(2) + "\n");
    return 0;
  });
  say("wrote " + (out / "manifest.json").string());
  return manifest;
}

}  // namespace qgen
