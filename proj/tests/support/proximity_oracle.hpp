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

// Brute-force proximity reference. Works from the raw JSON documents with
// string sets so it shares no code with the library's indexed build.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace affordlab::testing {

class ProximityOracle {
 public:
  ProximityOracle(const nlohmann::json& ontology, const std::string& embeddings_jsonl,
                  double alpha = 0.7, double beta = 0.3, bool clamp = true)
      : alpha_(alpha), beta_(beta), clamp_(clamp) {
    std::map<std::string, std::set<std::string>> part_affs;
    for (const auto& p : ontology["parts"]) {
      for (const auto& a : p["affordances"]) part_affs[p["id"]].insert(a.get<std::string>());
    }
    for (const auto& c : ontology["concepts"]) {
      Entry e;
      e.name = c["name"];
      for (const auto& a : c["affordances"]) e.direct.insert(a.get<std::string>());
      for (const auto& p : c["parts"]) {
        const auto& s = part_affs[p.get<std::string>()];
        e.via_parts.insert(s.begin(), s.end());
      }
      concepts_[c["id"]] = e;
    }
    for (const auto& a : ontology["affordances"]) affordances_.push_back(a["id"]);
    std::sort(affordances_.begin(), affordances_.end());

    std::size_t start = 0;
    bool header = true;
    while (start < embeddings_jsonl.size()) {
      auto end = embeddings_jsonl.find('\n', start);
      if (end == std::string::npos) end = embeddings_jsonl.size();
      auto line = embeddings_jsonl.substr(start, end - start);
      start = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto rec = nlohmann::json::parse(line);
      if (header) {
        header = false;
        continue;
      }
      vectors_[rec["term"]] = rec["vector"].get<std::vector<double>>();
    }
  }

  static double jaccard(const std::set<std::string>& x, const std::set<std::string>& y) {
    std::set<std::string> uni = x;
    uni.insert(y.begin(), y.end());
    if (uni.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& v : x) inter += y.count(v);
    return static_cast<double>(inter) / static_cast<double>(uni.size());
  }

  double cosine(const std::string& a, const std::string& b) const {
    const auto& x = vectors_.at(a);
    const auto& y = vectors_.at(b);
    long double dot = 0, nx = 0, ny = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      dot += static_cast<long double>(x[k]) * y[k];
      nx += static_cast<long double>(x[k]) * x[k];
      ny += static_cast<long double>(y[k]) * y[k];
    }
    return static_cast<double>(dot / std::sqrt(nx * ny));
  }

  double concept_score(const std::string& ci, const std::string& cj) const {
    const auto& a = concepts_.at(ci);
    const auto& b = concepts_.at(cj);
    double sim = cosine(a.name, b.name);
    if (clamp_) sim = std::clamp(sim, 0.0, 1.0);
    return alpha_ * (jaccard(a.direct, b.direct) + jaccard(a.via_parts, b.via_parts)) + beta_ * sim;
  }

  std::vector<std::string> holders(const std::string& affordance) const {
    std::vector<std::string> out;
    for (const auto& [id, e] : concepts_) {
      if (e.direct.count(affordance) || e.via_parts.count(affordance)) out.push_back(id);
    }
    return out;
  }

  double affordance(const std::string& ai, const std::string& aj) const {
    auto x = holders(ai);
    auto y = holders(aj);
    double sum = 0.0;
    for (const auto& p : x) {
      for (const auto& q : y) sum += concept_score(p, q);
    }
    return sum / static_cast<double>(x.size() * y.size());
  }

  // Affordances held by at least one concept, sorted by id.
  std::vector<std::string> reachable_affordances() const {
    std::vector<std::string> out;
    for (const auto& a : affordances_) {
      if (!holders(a).empty()) out.push_back(a);
    }
    return out;
  }

 private:
  struct Entry {
    std::string name;
    std::set<std::string> direct;
    std::set<std::string> via_parts;
  };

  double alpha_;
  double beta_;
  bool clamp_;
  std::map<std::string, Entry> concepts_;
  std::vector<std::string> affordances_;
  std::map<std::string, std::vector<double>> vectors_;
};

}  // namespace affordlab::testing
