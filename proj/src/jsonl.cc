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

#include "qgen/jsonl.h"

#include <fstream>
#include <sstream>

#include "qgen/error.h"

namespace qgen {

void ForEachJsonLine(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }
    if (!record.is_object()) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": record is not an object");
    }
    fn(record, line_no);
  }
}

void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<Json>& records) {
  std::ostringstream out;
  for (const auto& r : records) out << r.dump() << '\n';
  WriteTextFile(path, out.str());
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string RequireString(const Json& record, const char* key,
                          std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw Error(std::to_string(line) + ": missing string field '" +
                key + "'");
  }
  return it->get<std::string>();
}

long long RequireInt(const Json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_number_integer()) {
    throw Error(std::to_string(line) + ": missing integer field '" +
                key + "'");
  }
  return it->get<long long>();
}

}  // namespace qgen
