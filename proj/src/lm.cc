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

#include "qgen/lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "qgen/error.h"

namespace qgen {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Leftover mass below this is treated as exactly zero.
constexpr double kMassEpsilon = 1e-12;
// Below this, back-off denominators are summed word by word.
constexpr double kSmallMass = 1e-6;

double SafeLog(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Katz-renormalized Good-Turing discount ratios d_r = r*/r for 1 <= r <= k,
// indexed by r. Entries for r > k are 1.
std::vector<double> GoodTuringDiscounts(const std::map<long, long>& count_of_counts,
                                        int k, int order,
                                        std::vector<std::string>& warnings) {
  std::vector<double> d(static_cast<std::size_t>(k) + 2, 1.0);
  auto n = [&](long r) -> double {
    auto it = count_of_counts.find(r);
    return it == count_of_counts.end() ? 0.0 : static_cast<double>(it->second);
  };
  const std::string where = "order " + std::to_string(order) + ": ";
  if (k < 1) return d;
  if (n(1) == 0.0) {
    if (!count_of_counts.empty()) {
      warnings.push_back(where +
                         "no singletons, Good-Turing discounting disabled");
    }
    return d;
  }
  const double a = (k + 1) * n(k + 1) / n(1);
  for (int r = 1; r <= k; ++r) {
    if (n(r) == 0.0) continue;
    if (n(r + 1) == 0.0) {
      warnings.push_back(where + "n_" + std::to_string(r + 1) +
                         " = 0, no discount for count " + std::to_string(r));
      continue;
    }
    double r_star = (r + 1) * n(r + 1) / n(r);
    double ratio = (r_star / r - a) / (1.0 - a);
    if (!(1.0 - a > 0.0) || !(ratio > 0.0) || ratio > 1.0) {
      warnings.push_back(where + "invalid discount for count " +
                         std::to_string(r) + ", left undiscounted");
      continue;
    }
    d[static_cast<std::size_t>(r)] = ratio;
  }
  return d;
}

double Discount(const std::vector<double>& d, long count) {
  if (count < static_cast<long>(d.size())) {
    return d[static_cast<std::size_t>(count)];
  }
  return 1.0;
}

}  // namespace

void LmTrainConfig::Validate() const {
  if (order < 1) throw Error("LM order must be >= 1");
  if (prune_min_count < 1) throw Error("prune_min_count must be >= 1");
  if (gt_max_count < 0) throw Error("gt_max_count must be >= 0");
  if (!(unk_mass_floor >= 0.0 && unk_mass_floor < 1.0)) {
    throw Error("unk_mass_floor must be in [0, 1)");
  }
}

NgramModel::NgramModel(
    int order, std::vector<std::string> vocab,
    std::vector<std::map<std::vector<std::string>, Entry>> tables)
    : order_(order), vocab_(std::move(vocab)) {
  if (order_ < 1) throw Error("model order must be >= 1");
  if (tables.size() != static_cast<std::size_t>(order_)) {
    throw Error("expected one table per order");
  }
  IndexVocab();
  tables_.resize(tables.size());
  for (std::size_t n = 0; n < tables.size(); ++n) {
    for (auto& [words, entry] : tables[n]) {
      if (words.size() != n + 1) {
        throw Error("n-gram of wrong length in order " + std::to_string(n + 1));
      }
      Ngram key;
      for (const auto& w : words) {
        auto id = Lookup(w);
        if (!id) throw Error("n-gram uses word outside the vocabulary: " + w);
        key.push_back(*id);
      }
      tables_[n].emplace(std::move(key), entry);
    }
  }
}

void NgramModel::IndexVocab() {
  for (auto marker : {kSentenceBegin, kSentenceEnd, kUnknownToken}) {
    vocab_.emplace_back(marker);
  }
  std::sort(vocab_.begin(), vocab_.end());
  vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  ids_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    ids_.emplace(vocab_[i], static_cast<WordId>(i));
  }
  bos_ = ids_.at(std::string(kSentenceBegin));
  eos_ = ids_.at(std::string(kSentenceEnd));
  unk_ = ids_.at(std::string(kUnknownToken));
}

std::optional<NgramModel::WordId> NgramModel::Lookup(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

NgramModel::WordId NgramModel::IdOrUnknown(std::string_view word) const {
  return Lookup(word).value_or(unk_);
}

const NgramModel::Entry* NgramModel::Find(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() > tables_.size()) return nullptr;
  const auto& t = tables_[ngram.size() - 1];
  auto it = t.find(Ngram(ngram.begin(), ngram.end()));
  return it == t.end() ? nullptr : &it->second;
}

double NgramModel::LogProb(std::span<const WordId> history, WordId word) const {
  std::size_t ctx = std::min(history.size(), static_cast<std::size_t>(order_ - 1));
  std::span<const WordId> h = history.subspan(history.size() - ctx);
  double backoff = 0.0;
  Ngram ngram;
  while (true) {
    ngram.assign(h.begin(), h.end());
    ngram.push_back(word);
    if (const Entry* e = Find(ngram)) return backoff + e->log_prob;
    if (h.empty()) break;
    if (const Entry* e = Find(h); e != nullptr && e->log_backoff) {
      backoff += *e->log_backoff;
    }
    h = h.subspan(1);
  }
  // Word missing from the unigram table; fall back to <unk>.
  if (word != unk_) {
    const WordId unk[] = {unk_};
    if (const Entry* e = Find(unk)) return backoff + e->log_prob;
  }
  return kNegInf;
}

std::vector<std::string> NgramModel::Words(std::span<const WordId> ngram) const {
  std::vector<std::string> out;
  out.reserve(ngram.size());
  for (WordId id : ngram) out.push_back(vocab_.at(id));
  return out;
}

NgramModel TrainLm(const std::vector<TokenSeq>& corpus,
                   const LmTrainConfig& cfg) {
  cfg.Validate();
  if (corpus.empty()) throw Error("cannot train a language model on an empty corpus");

  NgramModel model;
  model.order_ = cfg.order;
  {
    std::set<std::string> words;
    for (const auto& s : corpus) {
      for (const auto& w : s) {
        if (w == kSentenceBegin || w == kSentenceEnd) {
          throw Error("corpus token collides with a sentence marker: " + w);
        }
        words.insert(w);
      }
    }
    model.vocab_.assign(words.begin(), words.end());
    model.IndexVocab();
  }
  using WordId = NgramModel::WordId;
  using Ngram = NgramModel::Ngram;
  const auto order = static_cast<std::size_t>(cfg.order);

  // Raw counts for every order. Windows ending on <s> are never counted.
  std::vector<std::map<Ngram, long>> counts(order);
  std::vector<WordId> sentence;
  for (const auto& s : corpus) {
    sentence.clear();
    sentence.push_back(model.bos_);
    for (const auto& w : s) sentence.push_back(model.ids_.at(w));
    sentence.push_back(model.eos_);
    for (std::size_t end = 1; end < sentence.size(); ++end) {
      for (std::size_t n = 1; n <= order && n <= end + 1; ++n) {
        Ngram g(sentence.begin() + static_cast<std::ptrdiff_t>(end + 1 - n),
                sentence.begin() + static_cast<std::ptrdiff_t>(end + 1));
        ++counts[n - 1][g];
      }
    }
  }

  model.tables_.assign(order, {});
  const bool good_turing = cfg.smoothing == Smoothing::kGoodTuring;

  // Counts-of-counts are taken from the unpruned tables.
  auto discounts_for = [&](std::size_t n) {
    if (!good_turing) return std::vector<double>(1, 1.0);
    std::map<long, long> coc;
    for (const auto& [g, c] : counts[n - 1]) ++coc[c];
    return GoodTuringDiscounts(coc, cfg.gt_max_count, static_cast<int>(n),
                               model.warnings_);
  };

  // Unigrams.
  {
    auto d = discounts_for(1);
    long total = 0;
    for (const auto& [g, c] : counts[0]) total += c;
    auto& table = model.tables_[0];
    double seen_mass = 0.0;
    for (const auto& [g, c] : counts[0]) {
      double p = Discount(d, c) * static_cast<double>(c) / static_cast<double>(total);
      table[g].log_prob = p;  // linear for now
      seen_mass += p;
    }
    double unk_mass = std::max(0.0, 1.0 - seen_mass);
    if (unk_mass < kMassEpsilon) unk_mass = 0.0;
    double scale = 1.0;
    if (good_turing && unk_mass < cfg.unk_mass_floor) {
      scale = (1.0 - cfg.unk_mass_floor) / seen_mass;
      unk_mass = cfg.unk_mass_floor;
    }
    for (auto& [g, e] : table) e.log_prob = SafeLog(e.log_prob * scale);
    Ngram unk{model.unk_};
    if (auto it = table.find(unk); it != table.end()) {
      it->second.log_prob = SafeLog(std::exp(it->second.log_prob) + unk_mass);
    } else {
      table[unk].log_prob = SafeLog(unk_mass);
    }
    table[Ngram{model.bos_}].log_prob = kNegInf;
  }

  // Higher orders, each built on the finished lower-order model.
  for (std::size_t n = 2; n <= order; ++n) {
    auto d = discounts_for(n);
    // Context totals over all raw continuations, pruned ones included, so
    // pruned mass is left to the back-off distribution.
    std::map<Ngram, long> context_total;
    for (const auto& [g, c] : counts[n - 1]) {
      context_total[Ngram(g.begin(), g.end() - 1)] += c;
    }
    std::map<Ngram, std::vector<std::pair<WordId, double>>> kept;
    for (const auto& [g, c] : counts[n - 1]) {
      if (c < cfg.prune_min_count) continue;
      Ngram h(g.begin(), g.end() - 1);
      double p = Discount(d, c) * static_cast<double>(c) /
                 static_cast<double>(context_total.at(h));
      kept[h].emplace_back(g.back(), p);
    }
    auto& table = model.tables_[n - 1];
    auto& lower = model.tables_[n - 2];
    std::size_t renormalized = 0;
    for (auto& [h, words] : kept) {
      double stored = 0.0;
      double lower_stored = 0.0;
      std::span<const WordId> shorter(h.begin() + 1, h.end());
      for (const auto& [w, p] : words) {
        stored += p;
        lower_stored += std::exp(model.LogProb(shorter, w));
      }
      double scale = 1.0;
      double left = 1.0 - stored;
      if (good_turing && left < cfg.unk_mass_floor) {
        // Keep some back-off mass so unseen words stay possible.
        scale = (1.0 - cfg.unk_mass_floor) / stored;
        left = cfg.unk_mass_floor;
      }
      double denom = 1.0 - lower_stored;
      if (denom < kSmallMass) {
        // Sum the complement directly; 1 - lower_stored cancels badly.
        std::set<WordId> seen;
        for (const auto& [w, p] : words) seen.insert(w);
        denom = 0.0;
        for (WordId w = 0; w < model.vocab_.size(); ++w) {
          if (w == model.bos_ || seen.contains(w)) continue;
          denom += std::exp(model.LogProb(shorter, w));
        }
      }
      double alpha;
      if (left < kMassEpsilon) {
        alpha = 0.0;
      } else if (!(denom > 0.0)) {
        // Lower order has nothing left to give; renormalize explicitly.
        ++renormalized;
        scale = 1.0 / stored;
        alpha = 0.0;
      } else {
        alpha = left / denom;
      }
      for (const auto& [w, p] : words) {
        Ngram g = h;
        g.push_back(w);
        table[std::move(g)].log_prob = SafeLog(p * scale);
      }
      lower.at(h).log_backoff = SafeLog(alpha);
    }
    if (renormalized > 0) {
      model.warnings_.push_back("order " + std::to_string(n) + ": " +
                                std::to_string(renormalized) +
                                " contexts without back-off mass, renormalized");
    }
  }
  return model;
}

std::optional<NllScore> ScoreNll(const NgramModel& model, const TokenSeq& query) {
  if (query.empty()) return std::nullopt;
  NllScore score;
  score.tokens = query;
  std::vector<NgramModel::WordId> history{model.begin_id()};
  auto add = [&](NgramModel::WordId id) {
    score.nll -= model.LogProb(history, id);
    history.push_back(id);
  };
  for (const auto& t : query) {
    auto id = model.Lookup(t);
    if (!id || *id == model.begin_id() || *id == model.end_id()) {
      ++score.oov_count;
      add(model.unknown_id());
    } else {
      add(*id);
    }
  }
  add(model.end_id());
  return score;
}

std::vector<TokenSeq> LoadCorpus(const std::filesystem::path& path,
                                 const PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus: " + path.string());
  std::vector<TokenSeq> corpus;
  std::string line;
  while (std::getline(in, line)) {
    TokenSeq tokens = PreprocessForLm(line, cfg);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  return corpus;
}

}  // namespace qgen
