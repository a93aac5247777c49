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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qgen {

using Json = nlohmann::ordered_json;

// Calls fn(record, line_number) for every non-blank line. Line numbers are
// 1-based. Parse failures raise Error naming the file and line.
void ForEachJsonLine(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn);

// Writes one compact JSON record per line; keys keep insertion order.
void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<Json>& records);

// Writes text to path, raising Error on failure.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

// Required string / integer field accessors. Error messages start with
// "<line>: " so callers can prefix the file name.
std::string RequireString(const Json& record, const char* key,
                          std::size_t line);
long long RequireInt(const Json& record, const char* key, std::size_t line);

}  // namespace qgen
