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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgen/catalog.h"
#include "qgen/evaluation.h"
#include "qgen/generation.h"
#include "qgen/jsonl.h"
#include "qgen/lm.h"
#include "qgen/provider.h"
#include "qgen/retrieval.h"
#include "qgen/textpipe.h"

namespace qgen {

// A failure inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Generation method names accepted on the command line and in configs.
enum class MethodChoice { kEntityName, kTemplates, kLlm };
MethodChoice ParseMethodChoice(const std::string& name);
std::string MethodChoiceName(MethodChoice m);

// ---- stage building blocks shared by the CLI subcommands and `run` ----

PipelineConfig LoadPipelineConfig(const std::optional<std::filesystem::path>& stopwords,
                                  const std::optional<std::filesystem::path>& wakewords,
                                  bool stemming);

std::vector<GeneratedQuery> GenerateForCatalog(
    MethodChoice method, const Catalog& catalog,
    const std::vector<Template>* templates, CompletionProvider* provider,
    int k, int max_in_flight, const std::string& examples,
    const PipelineConfig& cfg, std::ostream* log);

std::vector<ScoreRecord> ScoreQueriesNll(const NgramModel& model,
                                         const std::vector<GeneratedQuery>& queries);

// Queries are normalized with the pipeline config stored in the index.
std::vector<ScoreRecord> ScoreQueriesRr(const Index& index,
                                        const std::vector<GeneratedQuery>& queries,
                                        const Bm25Params& params, RrMode mode);

// ---- full pipeline ----

struct RunConfig {
  std::filesystem::path catalog;
  std::optional<std::filesystem::path> templates;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> wakewords;
  bool stemming = true;
  std::vector<MethodChoice> methods = {MethodChoice::kEntityName,
                                       MethodChoice::kTemplates,
                                       MethodChoice::kLlm};
  int k = kPromptQueryCount;
  std::vector<int> cutoffs = {10, 20, 30, 40};
  std::string prompt_examples = std::string(kDefaultPromptExamples);
  LmTrainConfig lm;
  Bm25Params bm25;
  RrMode rr_mode = RrMode::kFullRanking;
  ProviderConfig provider;
  std::filesystem::path out_dir = "qgen_run";

  // Relative paths resolve against the config file's directory.
  static RunConfig Load(const std::filesystem::path& path);
  static RunConfig FromJson(const Json& j, const std::filesystem::path& base);

  // Checks every precondition that can be checked before a stage runs.
  void Validate() const;
  Json ToJson() const;
};

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct StageRecord {
  std::string name;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string started_at;
  std::string finished_at;
};

struct RunManifest {
  Json config;
  std::vector<StageRecord> stages;
  std::string started_at;
  std::string finished_at;

  Json ToJson() const;
};

std::string Sha256File(const std::filesystem::path& path);

// Executes ingest -> generate -> train-lm -> index -> score-nll -> score-rr
// -> report and writes manifest.json last. Throws StageError.
RunManifest RunPipeline(const RunConfig& config, std::ostream* log);

}  // namespace qgen
