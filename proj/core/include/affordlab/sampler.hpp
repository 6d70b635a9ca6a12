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

#include <array>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "affordlab/metrics.hpp"
#include "affordlab/rng.hpp"

namespace affordlab {

struct AffordancePair {
  AffordanceId a;  // a < b
  AffordanceId b;
  double proximity = 0.0;

  static AffordancePair make(AffordanceId x, AffordanceId y, double proximity);
  std::pair<std::string, std::string> key() const { return {a.value, b.value}; }
  bool operator==(const AffordancePair&) const = default;
};

struct SamplePlan {
  std::size_t n_train = 600;
  std::size_t n_test = 500;
  std::size_t n_bins = 10;
  std::uint64_t seed = 0;
  bool random_test = false;  // plain uniform draw for the test split

  void check() const;
  json to_json() const;
};

struct BinFallback {
  std::size_t short_bin;   // bin that could not meet its quota
  std::size_t donor_bin;   // nearest bin that supplied the pair instead
};

// What a binned draw did, for the manifest.
struct SampleReport {
  std::vector<double> bin_edges;          // n_bins + 1 edges
  std::vector<std::size_t> bin_population;
  std::vector<std::size_t> bin_drawn;
  std::vector<BinFallback> fallbacks;

  json to_json() const;
};

struct SampleResult {
  std::vector<AffordancePair> pairs;
  SampleReport report;
};

// Equal-width bins over the observed proximity range; ceil(n / bins) draws
// per bin without replacement, trimmed round-robin from the most populated
// bins. Short bins borrow from the nearest bins with spare pairs.
SampleResult binned_uniform_sample(std::vector<AffordancePair> candidates, std::size_t n,
                                   std::size_t n_bins, Rng& rng);

std::vector<AffordancePair> all_pairs(const ProximityMatrix& m);

SampleResult sample_uniform_spectrum(const ProximityMatrix& m, const SamplePlan& plan);

struct CurriculumStage {
  int index = 0;  // 1 = closest pairs, 3 = most distant
  std::vector<AffordancePair> pairs;
  double band_low = 0.0;
  double band_high = 0.0;

  double mean_proximity() const;
};

// Sorted by proximity descending (ties by pair id), cut at ranks ceil(n/3)
// and ceil(2n/3).
std::array<CurriculumStage, 3> split_curriculum(std::vector<AffordancePair> pairs);

using PairKeySet = std::set<std::pair<std::string, std::string>>;

SampleResult select_test(const ProximityMatrix& m, const PairKeySet& exclude,
                         const SamplePlan& plan);

struct Extremes {
  std::vector<AffordancePair> closest;   // proximity descending
  std::vector<AffordancePair> farthest;  // proximity ascending
};

Extremes extremes(std::vector<AffordancePair> candidates, std::size_t k);

// Pair manifest record:
// {"a","b","proximity","split","stage","seed","bins"}
json pair_record(const AffordancePair& p, std::string_view split, std::optional<int> stage,
                 std::uint64_t seed, std::size_t bins);
AffordancePair pair_from_record(const json& record);

}  // namespace affordlab
