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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qgen {

// One knowledge-base entity. `description` is the context given to the
// prompt; `document` is the text that gets indexed for retrieval.
struct Entity {
  std::string id;
  std::string name;
  std::string description;
  std::string document;

  bool operator==(const Entity&) const = default;
};

// Immutable, id-sorted collection of entities.
class Catalog {
 public:
  Catalog() = default;

  // Validates invariants (non-empty unique ids, non-empty names, documents
  // with at least one token) and sorts by id. Throws Error on violation.
  Catalog(std::vector<Entity> entities, std::string source_path = "");

  const std::vector<Entity>& entities() const { return entities_; }
  const std::string& source_path() const { return source_path_; }
  std::size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }

  auto begin() const { return entities_.begin(); }
  auto end() const { return entities_.end(); }

  const Entity* Find(std::string_view id) const;

  // Equality ignores source_path.
  bool operator==(const Catalog& other) const {
    return entities_ == other.entities_;
  }

 private:
  std::vector<Entity> entities_;
  std::string source_path_;
};

// Line-delimited JSON records with fields id, name, description, document.
Catalog LoadCatalog(const std::filesystem::path& path);
void WriteCatalog(const Catalog& catalog, const std::filesystem::path& path);

struct CatalogStats {
  std::size_t entity_count = 0;
  // Absent for an empty catalog.
  std::optional<double> mean_description_tokens;
  std::optional<double> std_description_tokens;  // population
};

CatalogStats ComputeCatalogStats(const Catalog& catalog);

}  // namespace qgen
