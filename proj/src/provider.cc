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

#include "qgen/provider.h"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>

#include <httplib.h>

#include "qgen/textpipe.h"
#include "rng.h"

namespace qgen {
namespace {

using internal::Fnv1a;
using internal::SplitMix;

bool IsAsciiAlnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

// Strips leading/trailing ASCII punctuation from a whitespace-delimited word.
std::string CleanWord(std::string_view w) {
  std::size_t b = 0;
  std::size_t e = w.size();
  while (b < e && !IsAsciiAlnum(w[b]) &&
         static_cast<unsigned char>(w[b]) < 0x80) {
    ++b;
  }
  while (e > b && !IsAsciiAlnum(w[e - 1]) &&
         static_cast<unsigned char>(w[e - 1]) < 0x80) {
    --e;
  }
  std::string out(w.substr(b, e - b));
  // Possessives read badly once spliced into a new sentence.
  if (out.size() > 2 && out.ends_with("'s")) out.resize(out.size() - 2);
  return out;
}

struct ParsedPrompt {
  std::string description;
  std::string name;
  int k = 0;
};

std::optional<ParsedPrompt> ParsePrompt(std::string_view text) {
  constexpr std::string_view kGenerate = "\n\nGenerate ";
  constexpr std::string_view kAbout = " queries based on the information above about ";
  constexpr std::string_view kPlay = " to play music or learn more about ";
  auto g = text.find(kGenerate);
  if (g == std::string_view::npos) return std::nullopt;
  ParsedPrompt p;
  p.description = std::string(text.substr(0, g));
  auto num_begin = g + kGenerate.size();
  auto about = text.find(kAbout, num_begin);
  if (about == std::string_view::npos) return std::nullopt;
  try {
    p.k = std::stoi(std::string(text.substr(num_begin, about - num_begin)));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  auto name_begin = about + kAbout.size();
  auto play = text.find(kPlay, name_begin);
  if (play == std::string_view::npos) return std::nullopt;
  p.name = std::string(text.substr(name_begin, play - name_begin));
  return p;
}

std::string MockResponse(const Prompt& prompt) {
  auto parsed = ParsePrompt(prompt.text);
  if (!parsed || parsed->k <= 0) return "";

  const auto& stop = DefaultStopwords();
  std::set<std::string> stopset(stop.begin(), stop.end());
  auto name_tokens = Tokenize(parsed->name);
  std::set<std::string> name_set(name_tokens.begin(), name_tokens.end());

  std::vector<std::string> words;
  std::set<std::string> seen;
  std::size_t pos = 0;
  const std::string& d = parsed->description;
  while (pos < d.size()) {
    auto end = d.find_first_of(" \t\n", pos);
    if (end == std::string::npos) end = d.size();
    std::string w = CleanWord(std::string_view(d).substr(pos, end - pos));
    pos = end + 1;
    auto toks = Tokenize(w);
    if (toks.size() != 1 || toks[0].size() < 4) continue;
    if (stopset.contains(toks[0]) || name_set.contains(toks[0])) continue;
    if (!seen.insert(toks[0]).second) continue;
    words.push_back(w);
  }
  for (const char* filler : {"music", "songs", "hits"}) {
    if (words.size() >= 3) break;
    words.emplace_back(filler);
  }

  SplitMix rng(Fnv1a(prompt.entity_id));
  const std::string& name = parsed->name;
  std::string out;
  for (int i = 0; i < parsed->k; ++i) {
    const std::string& w1 = words[rng.Below(words.size())];
    const std::string& w2 = words[rng.Below(words.size())];
    const std::string& w3 = words[rng.Below(words.size())];
    std::string q;
    switch (rng.Below(8)) {
      case 0: q = "play " + name + "'s song " + w1 + " " + w2; break;
      case 1: q = "queue " + w1 + " " + w2 + " by " + name; break;
      case 2: q = "play the album " + w1 + " " + w2 + " " + w3; break;
      case 3: q = "turn on " + name + " music about " + w1 + " and " + w2; break;
      case 4: q = "play something " + w1 + " like " + w2 + " " + w3; break;
      case 5: q = "tell me more about " + name + " and " + w1 + " " + w2; break;
      case 6: q = "play " + w1 + " " + w2 + " from " + name + "'s " + w3 + " era"; break;
      default: q = "hey VA play " + name + " " + w1 + " " + w2; break;
    }
    if (i % 11 == 10) q = "\"" + q + "\"";
    if (i % 7 == 6) {
      out += "- " + q + "\n";
    } else {
      out += std::to_string(i + 1) + ". " + q + "\n";
    }
  }
  return out;
}

}  // namespace

MockProvider::MockProvider(std::string label, int max_attempts)
    : label_(std::move(label)), max_attempts_(max_attempts) {}

std::string MockProvider::Complete(const Prompt& prompt) {
  {
    std::lock_guard lock(mu_);
    ++calls_[prompt.entity_id];
    auto it = pending_failures_.find(prompt.entity_id);
    if (it != pending_failures_.end() && it->second > 0) {
      --it->second;
      throw TransportError("mock transport failure for '" + prompt.entity_id +
                           "'");
    }
    auto r = responses_.find(prompt.entity_id);
    if (r != responses_.end()) return r->second;
  }
  return MockResponse(prompt);
}

void MockProvider::FailNextCalls(const std::string& entity_id, int count) {
  std::lock_guard lock(mu_);
  pending_failures_[entity_id] = count;
}

void MockProvider::SetResponse(const std::string& entity_id,
                               std::string response) {
  std::lock_guard lock(mu_);
  responses_[entity_id] = std::move(response);
}

int MockProvider::calls(const std::string& entity_id) const {
  std::lock_guard lock(mu_);
  auto it = calls_.find(entity_id);
  return it == calls_.end() ? 0 : it->second;
}

ProviderConfig ProviderConfig::FromJson(const Json& j) {
  ProviderConfig c;
  c.type = j.value("type", c.type);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.label = j.value("label", c.type == "mock" ? std::string("mock") : c.model);
  c.auth_env = j.value("auth_env", c.auth_env);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.retry_delay_ms = j.value("retry_delay_ms", c.retry_delay_ms);
  if (c.type != "mock" && c.type != "openai") {
    throw Error("unknown provider type '" + c.type + "'");
  }
  if (c.type == "openai" && c.endpoint.empty()) {
    throw Error("provider endpoint is required for type 'openai'");
  }
  if (c.label.empty()) throw Error("provider label must not be empty");
  if (c.max_attempts < 1) throw Error("provider max_attempts must be >= 1");
  if (c.max_in_flight < 1) throw Error("provider max_in_flight must be >= 1");
  if (c.timeout_seconds <= 0) throw Error("provider timeout must be positive");
  if (j.contains("token") || j.contains("api_key")) {
    throw Error(
        "provider config must not contain credentials; set auth_env to the "
        "name of an environment variable instead");
  }
  return c;
}

Json ProviderConfig::ToJson() const {
  Json j = Json::object();
  j["type"] = type;
  j["label"] = label;
  if (!endpoint.empty()) j["endpoint"] = endpoint;
  if (!model.empty()) j["model"] = model;
  if (!auth_env.empty()) j["auth_env"] = auth_env;
  j["timeout_seconds"] = timeout_seconds;
  j["max_attempts"] = max_attempts;
  j["max_in_flight"] = max_in_flight;
  j["retry_delay_ms"] = retry_delay_ms;
  return j;
}

ProviderConfig LoadProviderConfig(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(ReadTextFile(path));
  } catch (const Json::parse_error& e) {
    throw Error("malformed provider config " + path.string() + ": " + e.what());
  }
  return ProviderConfig::FromJson(j);
}

HttpCompletionProvider::HttpCompletionProvider(ProviderConfig config)
    : config_(std::move(config)) {
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (token == nullptr) {
      throw Error("environment variable " + config_.auth_env + " is not set");
    }
    token_ = token;
  }
  auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error("provider endpoint must be an absolute URL: " +
                config_.endpoint);
  }
  auto slash = config_.endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) {
    scheme_host_port_ = config_.endpoint;
    path_ = "/";
  } else {
    scheme_host_port_ = config_.endpoint.substr(0, slash);
    path_ = config_.endpoint.substr(slash);
  }
}

std::chrono::milliseconds HttpCompletionProvider::timeout() const {
  return std::chrono::milliseconds(
      static_cast<long long>(config_.timeout_seconds * 1000.0));
}

std::string HttpCompletionProvider::Complete(const Prompt& prompt) {
  httplib::Client client(scheme_host_port_);
  auto t = timeout();
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(t);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(t - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  Json body = Json::object();
  body["model"] = config_.model;
  body["messages"] = Json::array(
      {Json{{"role", "user"}, {"content", prompt.text}}});
  body["temperature"] = 0;

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("request to " + config_.endpoint + " failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("provider returned HTTP " +
                         std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error("provider returned HTTP " + std::to_string(res->status));
  }
  Json reply;
  try {
    reply = Json::parse(res->body);
  } catch (const Json::parse_error&) {
    throw Error("provider returned a non-JSON body");
  }
  const auto choices = reply.find("choices");
  if (choices == reply.end() || !choices->is_array() || choices->empty()) {
    return "";
  }
  const auto& first = (*choices)[0];
  if (auto msg = first.find("message");
      msg != first.end() && msg->contains("content") &&
      (*msg)["content"].is_string()) {
    return (*msg)["content"].get<std::string>();
  }
  if (auto text = first.find("text");
      text != first.end() && text->is_string()) {
    return text->get<std::string>();
  }
  return "";
}

std::unique_ptr<CompletionProvider> MakeProvider(const ProviderConfig& config) {
  if (config.type == "mock") {
    return std::make_unique<MockProvider>(config.label, config.max_attempts);
  }
  return std::make_unique<HttpCompletionProvider>(config);
}

}  // namespace qgen
