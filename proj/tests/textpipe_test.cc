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

#include "qgen/textpipe.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "qgen/error.h"
#include "qgen/jsonl.h"

namespace qgen {
namespace {

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(Tokenize("Hey VA, play Moderat!"),
            (TokenSeq{"hey", "va", "play", "moderat"}));
  EXPECT_EQ(Tokenize("AC/DC's   \"Back in Black\""),
            (TokenSeq{"ac", "dc", "s", "back", "in", "black"}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_TRUE(Tokenize("  -- !! ").empty());
}

TEST(Tokenize, KeepsDigits) {
  EXPECT_EQ(Tokenize("Blink-182 live 2004"),
            (TokenSeq{"blink", "182", "live", "2004"}));
}

TEST(Tokenize, HandlesNonAsciiLetters) {
  EXPECT_EQ(Tokenize("Björk Guðmundsdóttir"),
            (TokenSeq{"björk", "guðmundsdóttir"}));
  EXPECT_EQ(Tokenize("MÖTLEY CRÜE"), (TokenSeq{"mötley", "crüe"}));
  EXPECT_EQ(Tokenize("ΣΩΚΡΑΤΗΣ Кино"), (TokenSeq{"σωκρατησ", "кино"}));
  // General punctuation and typographic quotes separate tokens.
  EXPECT_EQ(Tokenize("\u201cRóisín\u201d \u2014 live\u2026"), (TokenSeq{"róisín", "live"}));
}

TEST(Tokenize, InvalidUtf8Separates) {
  std::string s = "abc";
  s.push_back(static_cast<char>(0xff));
  s += "def";
  EXPECT_EQ(Tokenize(s), (TokenSeq{"abc", "def"}));
  std::string truncated = "xy";
  truncated.push_back(static_cast<char>(0xc3));
  EXPECT_EQ(Tokenize(truncated), (TokenSeq{"xy"}));
}

TEST(Tokenize, OffsetsPointIntoInput) {
  std::string text = "  Play  Mötley!";
  auto spans = TokenizeWithOffsets(text);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(text.substr(spans[0].begin, spans[0].end - spans[0].begin), "Play");
  EXPECT_EQ(text.substr(spans[1].begin, spans[1].end - spans[1].begin), "Mötley");
  EXPECT_EQ(spans[1].token, "mötley");
}

TEST(Stopwords, DefaultListMatchesShippedFile) {
  auto path = std::filesystem::path(QGEN_FIXTURES) / ".." / "stopwords_en.txt";
  auto loaded = LoadStopwords(path);
  std::set<std::string> expected(DefaultStopwords().begin(), DefaultStopwords().end());
  EXPECT_EQ(loaded, expected);
  EXPECT_EQ(PipelineConfig::Default().stopwords, expected);
}

TEST(Stopwords, Removal) {
  auto cfg = PipelineConfig::Default();
  EXPECT_EQ(RemoveStopwords({"play", "the", "best", "of", "abba"}, cfg),
            (TokenSeq{"play", "best", "abba"}));
  EXPECT_TRUE(RemoveStopwords({"the", "a"}, cfg).empty());
}

TEST(Porter, KnownStems) {
  EXPECT_EQ(PorterStem("caresses"), "caress");
  EXPECT_EQ(PorterStem("ponies"), "poni");
  EXPECT_EQ(PorterStem("running"), "run");
  EXPECT_EQ(PorterStem("relational"), "relat");
  EXPECT_EQ(PorterStem("generalization"), "gener");
  EXPECT_EQ(PorterStem("hopeful"), "hope");
  EXPECT_EQ(PorterStem("singers"), "singer");
  EXPECT_EQ(PorterStem("is"), "i");
  EXPECT_EQ(PorterStem("s"), "");
  EXPECT_EQ(PorterStem("ab"), "ab");
  EXPECT_EQ(PorterStem(""), "");
}

// Every entry of the frozen vocabulary was stemmed offline by an
// independent Porter implementation.
TEST(Porter, MatchesReferenceVocabulary) {
  std::ifstream in(std::string(QGEN_TEST_DATA) + "/porter_vocab.tsv");
  ASSERT_TRUE(in.good());
  std::string line;
  std::size_t checked = 0, mismatches = 0;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    std::string word = line.substr(0, tab), stem = line.substr(tab + 1);
    if (PorterStem(word) != stem) {
      ++mismatches;
      ADD_FAILURE() << word << ": got " << PorterStem(word) << ", want " << stem;
      if (mismatches > 20) break;
    }
    ++checked;
  }
  EXPECT_GT(checked, 5000u);
}

// Stemming twice equals stemming once on every token of the shipped
// fixture texts.
TEST(Porter, IdempotentOnFixtureTokens) {
  auto cfg = PipelineConfig::Default();
  std::set<std::string> tokens;
  auto dir = std::filesystem::path(QGEN_FIXTURES);
  for (const char* name : {"catalog.jsonl", "query_log.txt", "templates.tsv"}) {
    for (auto& t : PreprocessForRetrieval(ReadTextFile(dir / name), cfg)) tokens.insert(t);
  }
  ASSERT_GT(tokens.size(), 100u);
  for (const auto& t : tokens) EXPECT_EQ(PorterStem(t), t);
}

TEST(Retrieval, DropsEmptyStems) {
  EXPECT_EQ(PreprocessForRetrieval("Guns N' Roses's s", PipelineConfig::Default()),
            (TokenSeq{"gun", "n", "rose"}));
}

TEST(Retrieval, PreprocessOrder) {
  auto cfg = PipelineConfig::Default();
  EXPECT_EQ(PreprocessForRetrieval("Play the Songs by Running Singers", cfg),
            (TokenSeq{"plai", "song", "run", "singer"}));
  cfg.stemming_enabled = false;
  EXPECT_EQ(PreprocessForRetrieval("Play the Songs", cfg), (TokenSeq{"play", "songs"}));
  auto once = PreprocessForRetrieval("Play the Songs", cfg);
  EXPECT_EQ(PreprocessForRetrieval(JoinTokens(once), cfg), once);
}

TEST(Wakeword, StripsOnePrefix) {
  auto cfg = PipelineConfig::Default();
  EXPECT_EQ(StripWakeword({"hey", "va", "play", "moderat"}, cfg),
            (TokenSeq{"play", "moderat"}));
  EXPECT_EQ(StripWakeword({"play", "moderat"}, cfg), (TokenSeq{"play", "moderat"}));
  EXPECT_EQ(StripWakeword({"hey", "va", "hey", "va", "play"}, cfg),
            (TokenSeq{"hey", "va", "play"}));
  EXPECT_EQ(StripWakeword({"hey", "play"}, cfg), (TokenSeq{"hey", "play"}));
  EXPECT_TRUE(StripWakeword({"hey", "va"}, cfg).empty());
}

TEST(Wakeword, LongestMatchWins) {
  PipelineConfig cfg;
  cfg.wakewords = {{"va"}, {"hey"}, {"hey", "va"}};
  EXPECT_EQ(MatchWakeword({"hey", "va", "play"}, cfg), 2u);
  EXPECT_EQ(MatchWakeword({"va", "play"}, cfg), 1u);
  EXPECT_EQ(MatchWakeword({"play", "va"}, cfg), 0u);
}

TEST(Wakeword, RawTextKeepsCase) {
  auto cfg = PipelineConfig::Default();
  EXPECT_EQ(StripWakewordText("hey VA play Moderat", cfg), "play Moderat");
  EXPECT_EQ(StripWakewordText("Hey, VA!  play Moderat", cfg), "play Moderat");
  EXPECT_EQ(StripWakewordText("play Moderat", cfg), "play Moderat");
  EXPECT_EQ(JoinTokens(PreprocessForLm("hey VA play Moderat", cfg)), "play moderat");
}

TEST(Lists, LoadFromFiles) {
  auto dir = std::filesystem::temp_directory_path() / "qgen_textpipe_test";
  std::filesystem::create_directories(dir);
  WriteTextFile(dir / "stop.txt", "the\n\nA\nof\n");
  WriteTextFile(dir / "wake.txt", "hey va\n\nOK Computer\n");
  EXPECT_EQ(LoadStopwords(dir / "stop.txt"), (std::set<std::string>{"a", "of", "the"}));
  auto wake = LoadWakewords(dir / "wake.txt");
  ASSERT_EQ(wake.size(), 2u);
  EXPECT_EQ(wake[1], (TokenSeq{"ok", "computer"}));
  EXPECT_THROW(LoadStopwords(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace qgen
