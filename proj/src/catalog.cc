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

#include "qgen/catalog.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "qgen/error.h"
#include "qgen/jsonl.h"
#include "qgen/textpipe.h"

namespace qgen {
namespace {

// Returns an error message for an invalid entity, or empty.
std::string ValidateEntity(const Entity& e) {
  if (e.id.empty()) return "empty id";
  if (e.name.empty()) return "empty name for id '" + e.id + "'";
  if (Tokenize(e.document).empty()) {
    return "document of '" + e.id + "' has no alphanumeric token";
  }
  return "";
}

}  // namespace

Catalog::Catalog(std::vector<Entity> entities, std::string source_path)
    : entities_(std::move(entities)), source_path_(std::move(source_path)) {
  for (const auto& e : entities_) {
    if (auto msg = ValidateEntity(e); !msg.empty()) throw Error(msg);
  }
  std::sort(entities_.begin(), entities_.end(),
            [](const Entity& a, const Entity& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entities_.size(); ++i) {
    if (entities_[i].id == entities_[i - 1].id) {
      throw Error("duplicate entity id '" + entities_[i].id + "'");
    }
  }
}

const Entity* Catalog::Find(std::string_view id) const {
  auto it = std::lower_bound(
      entities_.begin(), entities_.end(), id,
      [](const Entity& e, std::string_view key) { return e.id < key; });
  if (it == entities_.end() || it->id != id) return nullptr;
  return &*it;
}

Catalog LoadCatalog(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("catalog file not found: " + path.string());
  }
  std::vector<Entity> entities;
  std::map<std::string, std::size_t> first_line;
  ForEachJsonLine(path, [&](const Json& record, std::size_t line) {
    Entity e;
    try {
      e.id = RequireString(record, "id", line);
      e.name = RequireString(record, "name", line);
      e.description = RequireString(record, "description", line);
      e.document = RequireString(record, "document", line);
    } catch (const Error& err) {
      throw Error(path.string() + ":" + err.what());
    }
    if (auto msg = ValidateEntity(e); !msg.empty()) {
      throw Error(path.string() + ":" + std::to_string(line) + ": " + msg);
    }
    auto [it, inserted] = first_line.emplace(e.id, line);
    if (!inserted) {
      throw Error(path.string() + ": duplicate id '" + e.id + "' on lines " +
                  std::to_string(it->second) + " and " + std::to_string(line));
    }
    entities.push_back(std::move(e));
  });
  return Catalog(std::move(entities), path.string());
}

void WriteCatalog(const Catalog& catalog, const std::filesystem::path& path) {
  std::vector<Json> records;
  records.reserve(catalog.size());
  for (const auto& e : catalog) {
    Json r = Json::object();
    r["id"] = e.id;
    r["name"] = e.name;
    r["description"] = e.description;
    r["document"] = e.document;
    records.push_back(std::move(r));
  }
  WriteJsonLines(path, records);
}

CatalogStats ComputeCatalogStats(const Catalog& catalog) {
  CatalogStats stats;
  stats.entity_count = catalog.size();
  if (catalog.empty()) return stats;
  double sum = 0.0;
  std::vector<double> lengths;
  for (const auto& e : catalog) {
    lengths.push_back(static_cast<double>(Tokenize(e.description).size()));
    sum += lengths.back();
  }
  double mean = sum / static_cast<double>(lengths.size());
  double var = 0.0;
  for (double l : lengths) var += (l - mean) * (l - mean);
  var /= static_cast<double>(lengths.size());
  stats.mean_description_tokens = mean;
  stats.std_description_tokens = std::sqrt(var);
  return stats;
}

}  // namespace qgen
