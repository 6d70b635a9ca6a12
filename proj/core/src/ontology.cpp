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

#include "affordlab/ontology.hpp"

#include <algorithm>
#include <set>

#include "affordlab/error.hpp"
#include "affordlab/rng.hpp"

namespace affordlab {
namespace {

const json& require(const json& obj, std::string_view key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::kParseError,
                std::string(where) + " is missing key '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const json& obj, std::string_view key, std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError,
                std::string(where) + "." + std::string(key) + " must be a string");
  }
  return v.get<std::string>();
}

// Ordered set semantics: first occurrence wins.
std::vector<std::string> require_id_list(const json& obj, std::string_view key,
                                         std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) {
    throw Error(ErrorCode::kParseError,
                std::string(where) + "." + std::string(key) + " must be an array");
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw Error(ErrorCode::kParseError,
                  std::string(where) + "." + std::string(key) + " must hold string ids");
    }
    auto s = item.get<std::string>();
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

const json& require_array(const json& doc, std::string_view key) {
  const json& v = require(doc, key, "ontology");
  if (!v.is_array()) {
    throw Error(ErrorCode::kParseError, "ontology." + std::string(key) + " must be an array");
  }
  return v;
}

template <typename T>
void sort_by_id(std::vector<T>& items) {
  std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

// Registers ids and names of one level, rejecting duplicates of either.
template <typename T>
std::map<std::string, std::size_t, std::less<>> index_level(const std::vector<T>& items,
                                                            std::string_view level) {
  std::map<std::string, std::size_t, std::less<>> lookup;
  std::set<std::string> names;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!lookup.emplace(items[i].id.value, i).second) {
      throw Error(ErrorCode::kDuplicateName,
                  std::string(level) + " id '" + items[i].id.value + "' declared twice",
                  items[i].id.value);
    }
    if (!items[i].name.empty() && !names.insert(items[i].name).second) {
      throw Error(ErrorCode::kDuplicateName,
                  std::string(level) + " name '" + items[i].name + "' is not unique",
                  items[i].id.value);
    }
  }
  return lookup;
}

void sorted_unique(std::vector<std::size_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

json ValidationReport::to_json() const {
  auto issues = [](const std::vector<Issue>& list) {
    json out = json::array();
    for (const auto& i : list) {
      out.push_back({{"code", i.code}, {"message", i.message}, {"subject", i.subject}});
    }
    return out;
  };
  return {
      {"valid", is_valid()},
      {"errors", issues(errors)},
      {"warnings", issues(warnings)},
      {"stats",
       {{"superordinates", stats.superordinates},
        {"concepts", stats.concepts},
        {"parts", stats.parts},
        {"affordances", stats.affordances}}},
  };
}

Ontology Ontology::load(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return from_json(doc);
}

Ontology Ontology::load_file(const std::filesystem::path& path) {
  return load(read_file(path));
}

Ontology Ontology::from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "ontology must be a JSON object");
  Ontology o;
  o.version_ = require_string(doc, "version", "ontology");

  for (const auto& s : require_array(doc, "superordinates")) {
    o.superordinates_.push_back({SuperordinateId(require_string(s, "id", "superordinate")),
                                 require_string(s, "name", "superordinate")});
  }
  for (const auto& a : require_array(doc, "affordances")) {
    o.affordances_.push_back({AffordanceId(require_string(a, "id", "affordance")),
                              require_string(a, "name", "affordance")});
  }
  for (const auto& p : require_array(doc, "parts")) {
    Part part{PartId(require_string(p, "id", "part")), require_string(p, "name", "part"), {}};
    for (auto& id : require_id_list(p, "affordances", "part '" + part.id.value + "'")) {
      part.affordances.emplace_back(std::move(id));
    }
    o.parts_.push_back(std::move(part));
  }
  const json& concepts = require_array(doc, "concepts");
  if (concepts.empty()) throw Error(ErrorCode::kParseError, "ontology declares no concepts");
  for (const auto& c : concepts) {
    Concept con;
    con.id = ConceptId(require_string(c, "id", "concept"));
    const std::string where = "concept '" + con.id.value + "'";
    con.name = require_string(c, "name", where);
    con.superordinate = SuperordinateId(require_string(c, "superordinate", where));
    for (auto& id : require_id_list(c, "parts", where)) con.parts.emplace_back(std::move(id));
    for (auto& id : require_id_list(c, "affordances", where)) {
      con.affordances.emplace_back(std::move(id));
    }
    o.concepts_.push_back(std::move(con));
  }

  sort_by_id(o.superordinates_);
  sort_by_id(o.affordances_);
  sort_by_id(o.parts_);
  sort_by_id(o.concepts_);
  o.link();
  return o;
}

void Ontology::link() {
  superordinate_lookup_ = index_level(superordinates_, "superordinate");
  concept_lookup_ = index_level(concepts_, "concept");
  part_lookup_ = index_level(parts_, "part");
  affordance_lookup_ = index_level(affordances_, "affordance");

  auto level_of = [this](const std::string& id) -> std::string {
    if (superordinate_lookup_.count(id)) return "superordinate";
    if (concept_lookup_.count(id)) return "concept";
    if (part_lookup_.count(id)) return "part";
    if (affordance_lookup_.count(id)) return "affordance";
    return {};
  };
  auto dangling = [&](const std::string& from, const std::string& kind, const std::string& id) {
    std::string msg = from + " references unknown " + kind + " '" + id + "'";
    if (auto level = level_of(id); !level.empty()) {
      msg += " (id belongs to the " + level + " level)";
    }
    return Error(ErrorCode::kDanglingReference, msg, id);
  };
  auto affordance_idx = [&](const std::string& from, const AffordanceId& a) {
    auto it = affordance_lookup_.find(a.value);
    if (it == affordance_lookup_.end()) throw dangling(from, "affordance", a.value);
    return it->second;
  };

  std::vector<std::vector<std::size_t>> part_affordances(parts_.size());
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    for (const auto& a : parts_[p].affordances) {
      part_affordances[p].push_back(affordance_idx("part '" + parts_[p].id.value + "'", a));
    }
    sorted_unique(part_affordances[p]);
  }

  concept_affordances_.assign(concepts_.size(), {});
  concept_part_affordances_.assign(concepts_.size(), {});
  affordance_concepts_.assign(affordances_.size(), {});
  part_reference_counts_.assign(parts_.size(), 0);
  for (std::size_t c = 0; c < concepts_.size(); ++c) {
    const Concept& con = concepts_[c];
    const std::string from = "concept '" + con.id.value + "'";
    if (!superordinate_lookup_.count(con.superordinate.value)) {
      throw dangling(from, "superordinate", con.superordinate.value);
    }
    for (const auto& a : con.affordances) concept_affordances_[c].push_back(affordance_idx(from, a));
    sorted_unique(concept_affordances_[c]);
    for (const auto& p : con.parts) {
      auto it = part_lookup_.find(p.value);
      if (it == part_lookup_.end()) throw dangling(from, "part", p.value);
      ++part_reference_counts_[it->second];
      const auto& pa = part_affordances[it->second];
      concept_part_affordances_[c].insert(concept_part_affordances_[c].end(), pa.begin(), pa.end());
    }
    sorted_unique(concept_part_affordances_[c]);
    for (std::size_t a : concept_affordances_[c]) affordance_concepts_[a].push_back(c);
    for (std::size_t a : concept_part_affordances_[c]) affordance_concepts_[a].push_back(c);
  }
  for (auto& list : affordance_concepts_) sorted_unique(list);
}

json Ontology::to_json() const {
  json doc;
  doc["version"] = version_;
  doc["superordinates"] = json::array();
  for (const auto& s : superordinates_) {
    doc["superordinates"].push_back({{"id", s.id.value}, {"name", s.name}});
  }
  doc["affordances"] = json::array();
  for (const auto& a : affordances_) {
    doc["affordances"].push_back({{"id", a.id.value}, {"name", a.name}});
  }
  doc["parts"] = json::array();
  for (const auto& p : parts_) {
    json ids = json::array();
    for (const auto& a : p.affordances) ids.push_back(a.value);
    doc["parts"].push_back({{"id", p.id.value}, {"name", p.name}, {"affordances", ids}});
  }
  doc["concepts"] = json::array();
  for (const auto& c : concepts_) {
    json parts = json::array();
    for (const auto& p : c.parts) parts.push_back(p.value);
    json affs = json::array();
    for (const auto& a : c.affordances) affs.push_back(a.value);
    doc["concepts"].push_back({{"id", c.id.value},
                               {"name", c.name},
                               {"superordinate", c.superordinate.value},
                               {"parts", parts},
                               {"affordances", affs}});
  }
  return doc;
}

LevelStats Ontology::stats() const {
  return {superordinates_.size(), concepts_.size(), parts_.size(), affordances_.size()};
}

ValidationReport Ontology::validate() const {
  ValidationReport report;
  report.stats = stats();
  auto error = [&](std::string code, std::string msg, std::string subject) {
    report.errors.push_back({std::move(code), std::move(msg), std::move(subject)});
  };
  auto warn = [&](std::string code, std::string msg, std::string subject) {
    report.warnings.push_back({std::move(code), std::move(msg), std::move(subject)});
  };
  auto check_entity = [&](const std::string& level, const std::string& id, const std::string& name) {
    if (!is_valid_slug(id)) error("InvalidId", level + " id must match [a-z0-9-]+", id);
    if (name.empty()) error("EmptyName", level + " has an empty name", id);
  };

  for (const auto& s : superordinates_) check_entity("superordinate", s.id.value, s.name);
  for (const auto& a : affordances_) check_entity("affordance", a.id.value, a.name);
  for (const auto& p : parts_) check_entity("part", p.id.value, p.name);
  for (const auto& c : concepts_) check_entity("concept", c.id.value, c.name);

  std::vector<std::size_t> superordinate_use(superordinates_.size(), 0);
  for (const auto& c : concepts_) {
    ++superordinate_use[superordinate_lookup_.at(c.superordinate.value)];
    if (c.affordances.empty()) {
      error("EmptyAffordances", "concept has no concept-level affordances", c.id.value);
    }
  }
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    if (parts_[p].affordances.empty()) {
      error("EmptyAffordances", "part has no affordances", parts_[p].id.value);
    }
    if (part_reference_counts_[p] == 0) {
      warn("OrphanPart", "part is not referenced by any concept", parts_[p].id.value);
    }
  }
  for (std::size_t a = 0; a < affordances_.size(); ++a) {
    if (affordance_concepts_[a].empty()) {
      warn("OrphanAffordance", "affordance is not attached to any concept or part",
           affordances_[a].id.value);
    }
  }
  for (std::size_t s = 0; s < superordinates_.size(); ++s) {
    if (superordinate_use[s] == 0) {
      warn("EmptySuperordinate", "superordinate groups no concepts", superordinates_[s].id.value);
    }
  }
  return report;
}

std::optional<std::size_t> Ontology::concept_index(const ConceptId& id) const {
  auto it = concept_lookup_.find(id.value);
  if (it == concept_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Ontology::affordance_index(const AffordanceId& id) const {
  auto it = affordance_lookup_.find(id.value);
  if (it == affordance_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Ontology::part_index(const PartId& id) const {
  auto it = part_lookup_.find(id.value);
  if (it == part_lookup_.end()) return std::nullopt;
  return it->second;
}

const Concept& Ontology::concept_at(const ConceptId& id) const {
  auto idx = concept_index(id);
  if (!idx) throw Error(ErrorCode::kUnknownConcept, "no concept '" + id.value + "'", id.value);
  return concepts_[*idx];
}

const Affordance& Ontology::affordance_at(const AffordanceId& id) const {
  auto idx = affordance_index(id);
  if (!idx) {
    throw Error(ErrorCode::kUnknownAffordance, "no affordance '" + id.value + "'", id.value);
  }
  return affordances_[*idx];
}

std::vector<ConceptId> Ontology::concepts_with_affordance(const AffordanceId& a) const {
  auto idx = affordance_index(a);
  if (!idx) throw Error(ErrorCode::kUnknownAffordance, "no affordance '" + a.value + "'", a.value);
  std::vector<ConceptId> out;
  for (std::size_t c : affordance_concepts_[*idx]) out.push_back(concepts_[c].id);
  return out;
}

std::vector<AffordanceId> Ontology::part_affordance_union(const ConceptId& c) const {
  auto idx = concept_index(c);
  if (!idx) throw Error(ErrorCode::kUnknownConcept, "no concept '" + c.value + "'", c.value);
  std::vector<AffordanceId> out;
  for (std::size_t a : concept_part_affordances_[*idx]) out.push_back(affordances_[a].id);
  return out;
}

std::vector<ConceptId> Ontology::negative_constraints(std::span<const AffordanceId> targets,
                                                      MatchMode mode) const {
  if (targets.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "negative constraints need at least one target");
  }
  // Per concept, how many distinct targets it holds at either level.
  std::vector<std::size_t> hits(concepts_.size(), 0);
  std::set<std::size_t> distinct;
  for (const auto& t : targets) {
    auto idx = affordance_index(t);
    if (!idx) throw Error(ErrorCode::kUnknownAffordance, "no affordance '" + t.value + "'", t.value);
    if (!distinct.insert(*idx).second) continue;
    for (std::size_t c : affordance_concepts_[*idx]) ++hits[c];
  }
  const std::size_t needed = mode == MatchMode::kAll ? distinct.size() : 1;
  std::vector<ConceptId> out;
  for (std::size_t c = 0; c < concepts_.size(); ++c) {
    if (hits[c] >= needed) out.push_back(concepts_[c].id);
  }
  return out;
}

bool Ontology::operator==(const Ontology& other) const {
  return version_ == other.version_ && superordinates_ == other.superordinates_ &&
         concepts_ == other.concepts_ && parts_ == other.parts_ &&
         affordances_ == other.affordances_;
}

// --- OntologyBuilder -------------------------------------------------------

SuperordinateId OntologyBuilder::add_superordinate(std::string_view name) {
  std::string id = slugify(name);
  superordinates_.emplace(id, std::string(name));
  return SuperordinateId(id);
}

AffordanceId OntologyBuilder::add_affordance(std::string_view name) {
  std::string id = slugify(name);
  affordances_.emplace(id, std::string(name));
  return AffordanceId(id);
}

PartId OntologyBuilder::add_part(std::string_view name,
                                 const std::vector<std::string>& affordance_names) {
  std::string id = slugify(name);
  json ids = json::array();
  for (const auto& a : affordance_names) ids.push_back(add_affordance(a).value);
  auto [it, inserted] = parts_.emplace(id, json{{"id", id}, {"name", std::string(name)}, {"affordances", ids}});
  if (!inserted) {
    for (const auto& a : ids) {
      auto& existing = it->second["affordances"];
      if (std::find(existing.begin(), existing.end(), a) == existing.end()) existing.push_back(a);
    }
  }
  return PartId(id);
}

ConceptId OntologyBuilder::add_concept(std::string_view name, std::string_view superordinate,
                                       const std::vector<std::string>& part_names,
                                       const std::vector<std::string>& affordance_names) {
  std::string id = slugify(name);
  json parts = json::array();
  for (const auto& p : part_names) {
    std::string pid = slugify(p);
    if (!parts_.count(pid)) {
      throw Error(ErrorCode::kDanglingReference, "part '" + p + "' must be added before use", pid);
    }
    parts.push_back(pid);
  }
  json affs = json::array();
  for (const auto& a : affordance_names) affs.push_back(add_affordance(a).value);
  concepts_[id] = json{{"id", id},
                       {"name", std::string(name)},
                       {"superordinate", add_superordinate(superordinate).value},
                       {"parts", parts},
                       {"affordances", affs}};
  return ConceptId(id);
}

json OntologyBuilder::to_json() const {
  json doc;
  doc["version"] = version_;
  doc["superordinates"] = json::array();
  for (const auto& [id, name] : superordinates_) doc["superordinates"].push_back({{"id", id}, {"name", name}});
  doc["affordances"] = json::array();
  for (const auto& [id, name] : affordances_) doc["affordances"].push_back({{"id", id}, {"name", name}});
  doc["parts"] = json::array();
  for (const auto& [id, p] : parts_) doc["parts"].push_back(p);
  doc["concepts"] = json::array();
  for (const auto& [id, c] : concepts_) doc["concepts"].push_back(c);
  return doc;
}

// --- synthetic ontology ----------------------------------------------------

Ontology synthetic_ontology(const SyntheticOntologySpec& spec, std::uint64_t seed) {
  if (spec.superordinates == 0 || spec.concepts == 0 || spec.affordances == 0 ||
      spec.concepts < spec.superordinates ||
      spec.parts > spec.concepts * spec.max_parts_per_concept ||
      spec.max_concept_affordances < spec.min_concept_affordances ||
      spec.min_concept_affordances == 0 || spec.max_part_affordances == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic ontology spec is not satisfiable");
  }
  Rng rng(seed);
  auto pad = [](std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
  };

  json doc;
  doc["version"] = "synthetic-" + std::to_string(seed);
  doc["superordinates"] = json::array();
  for (std::size_t s = 0; s < spec.superordinates; ++s) {
    doc["superordinates"].push_back({{"id", "s" + pad(s)}, {"name", "superordinate " + pad(s)}});
  }
  doc["affordances"] = json::array();
  for (std::size_t a = 0; a < spec.affordances; ++a) {
    doc["affordances"].push_back({{"id", "a" + pad(a)}, {"name", "affordance " + pad(a)}});
  }

  auto random_affordances = [&](std::size_t count) {
    std::set<std::size_t> picked;
    while (picked.size() < std::min(count, spec.affordances)) {
      picked.insert(static_cast<std::size_t>(rng.uniform_index(spec.affordances)));
    }
    return std::vector<std::size_t>(picked.begin(), picked.end());
  };

  // Affordances are dealt round-robin first so none is orphaned, then topped
  // up at random.
  std::vector<std::vector<std::size_t>> concept_affs(spec.concepts);
  std::vector<std::vector<std::size_t>> part_affs(spec.parts);
  std::vector<std::size_t> order(spec.affordances);
  for (std::size_t a = 0; a < spec.affordances; ++a) order[a] = a;
  rng.shuffle(order);
  const std::size_t slots = spec.concepts + spec.parts;
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::size_t slot = k % slots;
    if (slot < spec.concepts) {
      concept_affs[slot].push_back(order[k]);
    } else {
      part_affs[slot - spec.concepts].push_back(order[k]);
    }
  }
  auto top_up = [&](std::vector<std::size_t>& affs, std::size_t lo, std::size_t hi) {
    std::size_t target = lo + static_cast<std::size_t>(rng.uniform_index(hi - lo + 1));
    for (std::size_t a : random_affordances(target)) {
      if (affs.size() >= std::max(target, std::size_t{1})) break;
      if (std::find(affs.begin(), affs.end(), a) == affs.end()) affs.push_back(a);
    }
    std::sort(affs.begin(), affs.end());
  };
  for (auto& affs : concept_affs) {
    top_up(affs, spec.min_concept_affordances, spec.max_concept_affordances);
  }
  for (auto& affs : part_affs) top_up(affs, 1, spec.max_part_affordances);

  doc["parts"] = json::array();
  for (std::size_t p = 0; p < spec.parts; ++p) {
    json ids = json::array();
    for (std::size_t a : part_affs[p]) ids.push_back("a" + pad(a));
    doc["parts"].push_back({{"id", "p" + pad(p)}, {"name", "part " + pad(p)}, {"affordances", ids}});
  }

  // Every part is owned by at least one concept; extra parts are shared.
  std::vector<std::vector<std::size_t>> concept_parts(spec.concepts);
  for (std::size_t p = 0; p < spec.parts; ++p) {
    std::size_t c = p < spec.concepts ? p : static_cast<std::size_t>(rng.uniform_index(spec.concepts));
    while (concept_parts[c].size() >= spec.max_parts_per_concept) c = (c + 1) % spec.concepts;
    concept_parts[c].push_back(p);
  }

  doc["concepts"] = json::array();
  for (std::size_t c = 0; c < spec.concepts; ++c) {
    json parts = json::array();
    for (std::size_t p : concept_parts[c]) parts.push_back("p" + pad(p));
    json affs = json::array();
    for (std::size_t a : concept_affs[c]) affs.push_back("a" + pad(a));
    const std::size_t sup = c < spec.superordinates
                                ? c
                                : static_cast<std::size_t>(rng.uniform_index(spec.superordinates));
    doc["concepts"].push_back({{"id", "c" + pad(c)},
                               {"name", "concept " + pad(c)},
                               {"superordinate", "s" + pad(sup)},
                               {"parts", parts},
                               {"affordances", affs}});
  }
  return Ontology::from_json(doc);
}

}  // namespace affordlab
