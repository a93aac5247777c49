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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "qgen/error.h"
#include "qgen/generation.h"
#include "qgen/jsonl.h"

namespace qgen {

// A failure worth retrying: connection errors, timeouts, 429 and 5xx.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Text completion backend. Complete() may be called concurrently.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;

  virtual std::string Complete(const Prompt& prompt) = 0;

  virtual std::string label() const = 0;
  virtual int max_attempts() const = 0;
  virtual std::chrono::milliseconds timeout() const = 0;
  virtual std::chrono::milliseconds retry_delay() const {
    return std::chrono::milliseconds(0);
  }
};

// Offline, deterministic provider. Output depends only on the prompt text
// and the entity id: it reads the description and name back out of the
// prompt and writes verbose numbered queries mentioning description words.
class MockProvider : public CompletionProvider {
 public:
  explicit MockProvider(std::string label = "mock", int max_attempts = 3);

  std::string Complete(const Prompt& prompt) override;

  std::string label() const override { return label_; }
  int max_attempts() const override { return max_attempts_; }
  std::chrono::milliseconds timeout() const override {
    return std::chrono::milliseconds(1000);
  }

  // The next `count` calls for this entity throw TransportError.
  void FailNextCalls(const std::string& entity_id, int count);
  // Replaces the generated response for this entity.
  void SetResponse(const std::string& entity_id, std::string response);

  int calls(const std::string& entity_id) const;

 private:
  std::string label_;
  int max_attempts_;
  mutable std::mutex mu_;
  std::map<std::string, int> pending_failures_;
  std::map<std::string, std::string> responses_;
  std::map<std::string, int> calls_;
};

struct ProviderConfig {
  std::string type = "mock";  // "mock" or "openai"
  std::string label = "mock";
  std::string endpoint;       // full URL of the completion endpoint
  std::string model;
  std::string auth_env;       // name of the variable holding the token
  double timeout_seconds = 30.0;
  int max_attempts = 3;
  int max_in_flight = 4;
  int retry_delay_ms = 500;

  static ProviderConfig FromJson(const Json& j);
  // Never contains the token itself.
  Json ToJson() const;
};

ProviderConfig LoadProviderConfig(const std::filesystem::path& path);

// Chat-completions style HTTP client (OpenAI-compatible wire format).
class HttpCompletionProvider : public CompletionProvider {
 public:
  explicit HttpCompletionProvider(ProviderConfig config);

  std::string Complete(const Prompt& prompt) override;

  std::string label() const override { return config_.label; }
  int max_attempts() const override { return config_.max_attempts; }
  std::chrono::milliseconds timeout() const override;
  std::chrono::milliseconds retry_delay() const override {
    return std::chrono::milliseconds(config_.retry_delay_ms);
  }

 private:
  ProviderConfig config_;
  std::string token_;
  std::string scheme_host_port_;
  std::string path_;
};

std::unique_ptr<CompletionProvider> MakeProvider(const ProviderConfig& config);

}  // namespace qgen
