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

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affordlab/ontology.hpp"

namespace affordlab {

// Term -> unit-norm vector. Vectors are re-normalized on insert.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim);

  // Header line {"dim": D, "normalized": bool} followed by JSONL records
  // {"term": ..., "vector": [...]}. When the header claims normalized
  // vectors, any norm off by more than 1e-3 is a ParseError.
  static EmbeddingStore parse(std::string_view text);
  static EmbeddingStore load_file(const std::filesystem::path& path);
  std::string serialize() const;

  void insert(std::string term, std::vector<double> vector);
  const std::vector<double>* find(std::string_view term) const;
  const std::vector<double>& at(std::string_view term) const;  // MissingEmbedding

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::map<std::string, std::vector<double>, std::less<>>& entries() const { return vectors_; }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

struct DistanceConfig {
  double alpha = 0.7;
  double beta = 0.3;
  bool clamp_negative_sim = true;
  bool normalize = false;

  void check() const;  // InvalidArgument
  double max_score() const { return normalize ? 1.0 : 2.0 * alpha + beta; }
  std::string hash() const;
  json to_json() const;
  static DistanceConfig from_json(const json& j);
};

// |x ∩ y| / |x ∪ y| over sorted, duplicate-free ranges; 0 when both are empty.
template <typename T>
double jaccard(std::span<const T> x, std::span<const T> y) {
  std::size_t inter = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = x.size() + y.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Convenience overload for unsorted inputs; sorts and dedupes copies.
template <typename T>
double jaccard(std::vector<T> x, std::vector<T> y) {
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  std::sort(y.begin(), y.end());
  y.erase(std::unique(y.begin(), y.end()), y.end());
  return jaccard<T>(std::span<const T>(x), std::span<const T>(y));
}

double cosine_similarity(std::span<const double> x, std::span<const double> y);

// Higher = closer. Concept proximity:
//   alpha * (J(A_ci, A_cj) + J(A_Pci, A_Pcj)) + beta * Sim(e_ci, e_cj)
// with concept embeddings looked up by concept name.
double concept_proximity(const Ontology& o, const EmbeddingStore& store,
                         const DistanceConfig& cfg, const ConceptId& ci, const ConceptId& cj);

// Mean concept proximity over C_ai x C_aj.
double affordance_proximity(const Ontology& o, const EmbeddingStore& store,
                            const DistanceConfig& cfg, const AffordanceId& ai,
                            const AffordanceId& aj);

std::size_t pair_count(std::size_t n);

// Symmetric all-pairs affordance proximities, stored as the packed upper
// triangle (row-major, i < j).
class ProximityMatrix {
 public:
  ProximityMatrix() = default;
  ProximityMatrix(std::vector<AffordanceId> ids, std::vector<double> packed,
                  std::string config_hash, std::vector<AffordanceId> excluded = {});

  const std::vector<AffordanceId>& affordance_ids() const { return ids_; }
  const std::vector<AffordanceId>& excluded() const { return excluded_; }
  const std::string& config_hash() const { return config_hash_; }
  const std::vector<double>& packed() const { return packed_; }

  std::size_t size() const { return ids_.size(); }
  std::size_t pair_count() const { return packed_.size(); }
  double at(std::size_t i, std::size_t j) const;
  std::optional<double> find(const AffordanceId& a, const AffordanceId& b) const;
  std::optional<std::size_t> index_of(const AffordanceId& a) const;

  // Invokes fn(i, j, score) for every i < j in packed order.
  template <typename Fn>
  void for_each_pair(Fn&& fn) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      for (std::size_t j = i + 1; j < ids_.size(); ++j) fn(i, j, packed_[k++]);
    }
  }

  json to_json() const;
  static ProximityMatrix from_json(const json& j);
  void save(const std::filesystem::path& path) const;
  // Refuses a cache written under a different DistanceConfig (CacheMismatch).
  static ProximityMatrix load(const std::filesystem::path& path, const DistanceConfig& active);

  bool operator==(const ProximityMatrix&) const = default;

 private:
  std::size_t packed_index(std::size_t i, std::size_t j) const;

  std::vector<AffordanceId> ids_;
  std::vector<double> packed_;
  std::string config_hash_;
  std::vector<AffordanceId> excluded_;
};

struct BuildOptions {
  std::size_t parallelism = 1;
};

// Precomputes the concept x concept proximity matrix once, then averages it
// over each affordance pair's concept sets. Affordances with no concepts are
// excluded and listed. Result is independent of parallelism.
ProximityMatrix build_proximity_matrix(const Ontology& o, const EmbeddingStore& store,
                                       const DistanceConfig& cfg, BuildOptions options = {});

struct DistributionSummary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> deciles;  // 10th..90th percentiles, linear interpolation

  json to_json() const;
};

DistributionSummary summarize(std::span<const double> values);

// One unit vector per concept name: a shared per-superordinate direction plus
// per-concept noise, so siblings are closer than strangers.
EmbeddingStore synthetic_embeddings(const Ontology& o, std::size_t dim, std::uint64_t seed);

}  // namespace affordlab
