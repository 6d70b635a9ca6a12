// Copyright 2026 The Affordlab Authors.
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

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affordlab/util.hpp"

namespace affordlab {

// String id tagged with its ontology level so ids of different levels
// cannot be mixed up.
template <typename Tag>
struct Id {
  std::string value;

  Id() = default;
  explicit Id(std::string v) : value(std::move(v)) {}

  auto operator<=>(const Id&) const = default;
  bool operator==(const Id&) const = default;
};

using SuperordinateId = Id<struct SuperordinateTag>;
using ConceptId = Id<struct ConceptTag>;
using PartId = Id<struct PartTag>;
using AffordanceId = Id<struct AffordanceTag>;

struct Superordinate {
  SuperordinateId id;
  std::string name;
  bool operator==(const Superordinate&) const = default;
};

struct Affordance {
  AffordanceId id;
  std::string name;
  bool operator==(const Affordance&) const = default;
};

struct Part {
  PartId id;
  std::string name;
  std::vector<AffordanceId> affordances;
  bool operator==(const Part&) const = default;
};

struct Concept {
  ConceptId id;
  std::string name;
  SuperordinateId superordinate;
  std::vector<PartId> parts;
  std::vector<AffordanceId> affordances;
  bool operator==(const Concept&) const = default;
};

struct LevelStats {
  std::size_t superordinates = 0;
  std::size_t concepts = 0;
  std::size_t parts = 0;
  std::size_t affordances = 0;
  bool operator==(const LevelStats&) const = default;
};

struct Issue {
  std::string code;
  std::string message;
  std::string subject;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;
  LevelStats stats;

  bool is_valid() const { return errors.empty(); }
  json to_json() const;
};

enum class MatchMode { kAny, kAll };

// Immutable four-level hierarchy: superordinates, concepts, parts and
// affordances. Entities are stored sorted by id; references are resolved to
// dense indices at load so set operations run over sorted index vectors.
class Ontology {
 public:
  // Parses the JSON ontology document. Throws ParseError, DanglingReference
  // or DuplicateName. Remaining invariants are reported by validate().
  static Ontology from_json(const json& doc);
  static Ontology load(std::string_view source);
  static Ontology load_file(const std::filesystem::path& path);

  json to_json() const;

  ValidationReport validate() const;

  const std::string& version() const { return version_; }
  const std::vector<Superordinate>& superordinates() const { return superordinates_; }
  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::vector<Part>& parts() const { return parts_; }
  const std::vector<Affordance>& affordances() const { return affordances_; }
  LevelStats stats() const;

  std::optional<std::size_t> concept_index(const ConceptId& id) const;
  std::optional<std::size_t> affordance_index(const AffordanceId& id) const;
  std::optional<std::size_t> part_index(const PartId& id) const;

  const Concept& concept_at(const ConceptId& id) const;     // UnknownConcept
  const Affordance& affordance_at(const AffordanceId& id) const;  // UnknownAffordance

  // Index-level views used by the proximity computations. Each list is
  // sorted ascending and duplicate free.
  const std::vector<std::size_t>& concept_affordance_indices(std::size_t concept_idx) const {
    return concept_affordances_[concept_idx];
  }
  const std::vector<std::size_t>& concept_part_affordance_indices(std::size_t concept_idx) const {
    return concept_part_affordances_[concept_idx];
  }
  const std::vector<std::size_t>& concepts_with_affordance_indices(std::size_t affordance_idx) const {
    return affordance_concepts_[affordance_idx];
  }

  // Concepts holding `a` directly or through one of their parts, by id.
  std::vector<ConceptId> concepts_with_affordance(const AffordanceId& a) const;

  // Union of the part-level affordance sets of `c`, sorted by id.
  std::vector<AffordanceId> part_affordance_union(const ConceptId& c) const;

  // Existing concepts that already realise the target affordances.
  std::vector<ConceptId> negative_constraints(std::span<const AffordanceId> targets,
                                              MatchMode mode = MatchMode::kAny) const;

  bool operator==(const Ontology& other) const;

 private:
  void link();

  std::string version_;
  std::vector<Superordinate> superordinates_;
  std::vector<Concept> concepts_;
  std::vector<Part> parts_;
  std::vector<Affordance> affordances_;

  std::map<std::string, std::size_t, std::less<>> superordinate_lookup_;
  std::map<std::string, std::size_t, std::less<>> concept_lookup_;
  std::map<std::string, std::size_t, std::less<>> part_lookup_;
  std::map<std::string, std::size_t, std::less<>> affordance_lookup_;

  std::vector<std::vector<std::size_t>> concept_affordances_;
  std::vector<std::vector<std::size_t>> concept_part_affordances_;
  std::vector<std::vector<std::size_t>> affordance_concepts_;
  std::vector<std::size_t> part_reference_counts_;
};

// Builds an ontology from display names. Ids are slugs of the names, and a
// name used at both concept and part level maps to one affordance id.
class OntologyBuilder {
 public:
  explicit OntologyBuilder(std::string version = "1") : version_(std::move(version)) {}

  SuperordinateId add_superordinate(std::string_view name);
  AffordanceId add_affordance(std::string_view name);
  PartId add_part(std::string_view name, const std::vector<std::string>& affordance_names);
  ConceptId add_concept(std::string_view name, std::string_view superordinate,
                        const std::vector<std::string>& part_names,
                        const std::vector<std::string>& affordance_names);

  json to_json() const;
  Ontology build() const { return Ontology::from_json(to_json()); }

 private:
  std::string version_;
  std::map<std::string, std::string> superordinates_;
  std::map<std::string, std::string> affordances_;
  std::map<std::string, json> parts_;
  std::map<std::string, json> concepts_;
};

struct SyntheticOntologySpec {
  std::size_t superordinates = 30;
  std::size_t concepts = 590;
  std::size_t parts = 1172;
  std::size_t affordances = 686;
  std::size_t min_concept_affordances = 1;
  std::size_t max_concept_affordances = 3;
  std::size_t max_parts_per_concept = 4;
  std::size_t max_part_affordances = 2;
};

// Seeded random ontology with exactly the requested level counts and no
// validation errors or warnings. Used for scale testing.
Ontology synthetic_ontology(const SyntheticOntologySpec& spec, std::uint64_t seed);

}  // namespace affordlab
