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

#include "affordlab/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "affordlab/error.hpp"

namespace affordlab {
namespace {

bool by_key(const AffordancePair& x, const AffordancePair& y) { return x.key() < y.key(); }

bool closest_first(const AffordancePair& x, const AffordancePair& y) {
  if (x.proximity != y.proximity) return x.proximity > y.proximity;
  return x.key() < y.key();
}

bool farthest_first(const AffordancePair& x, const AffordancePair& y) {
  if (x.proximity != y.proximity) return x.proximity < y.proximity;
  return x.key() < y.key();
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Partial Fisher-Yates: moves `count` uniformly chosen items to the front.
void draw_prefix(std::vector<AffordancePair>& items, std::size_t count, Rng& rng) {
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.uniform_index(items.size() - k));
    std::swap(items[k], items[j]);
  }
}

}  // namespace

AffordancePair AffordancePair::make(AffordanceId x, AffordanceId y, double proximity) {
  if (x == y) throw Error(ErrorCode::kInvalidArgument, "pair needs two distinct affordances", x.value);
  if (y < x) std::swap(x, y);
  return {std::move(x), std::move(y), proximity};
}

void SamplePlan::check() const {
  if (n_bins == 0) throw Error(ErrorCode::kInvalidArgument, "n_bins must be at least 1");
}

json SamplePlan::to_json() const {
  return {{"n_train", n_train},
          {"n_test", n_test},
          {"n_bins", n_bins},
          {"seed", seed},
          {"random_test", random_test},
          {"rng", std::string(Rng::kAlgorithm)}};
}

json SampleReport::to_json() const {
  json fb = json::array();
  for (const auto& f : fallbacks) fb.push_back({{"short_bin", f.short_bin}, {"donor_bin", f.donor_bin}});
  return {{"bin_edges", bin_edges},
          {"bin_population", bin_population},
          {"bin_drawn", bin_drawn},
          {"fallbacks", fb}};
}

SampleResult binned_uniform_sample(std::vector<AffordancePair> candidates, std::size_t n,
                                   std::size_t n_bins, Rng& rng) {
  if (n_bins == 0) throw Error(ErrorCode::kInvalidArgument, "n_bins must be at least 1");
  if (candidates.size() < n) {
    throw Error(ErrorCode::kInsufficientPairs,
                "requested " + std::to_string(n) + " pairs from " +
                    std::to_string(candidates.size()) + " candidates");
  }
  SampleResult result;
  std::sort(candidates.begin(), candidates.end(), by_key);

  double lo = 0.0;
  double hi = 0.0;
  if (!candidates.empty()) {
    auto [mn, mx] = std::minmax_element(candidates.begin(), candidates.end(),
                                        [](const auto& x, const auto& y) { return x.proximity < y.proximity; });
    lo = mn->proximity;
    hi = mx->proximity;
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b <= n_bins; ++b) {
    result.report.bin_edges.push_back(b == n_bins ? hi : lo + width * static_cast<double>(b));
  }

  std::vector<std::vector<AffordancePair>> bins(n_bins);
  for (auto& p : candidates) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = std::min(n_bins - 1, static_cast<std::size_t>(std::floor((p.proximity - lo) / width)));
    }
    bins[b].push_back(std::move(p));
  }

  const std::size_t quota = ceil_div(n, n_bins);
  std::vector<std::size_t> target(n_bins);
  std::size_t total = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    result.report.bin_population.push_back(bins[b].size());
    target[b] = std::min(quota, bins[b].size());
    total += target[b];
  }

  if (total > n) {
    std::vector<std::size_t> order(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) order[b] = b;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return bins[x].size() > bins[y].size(); });
    while (total > n) {
      for (std::size_t b : order) {
        if (total == n) break;
        if (target[b] > 0) {
          --target[b];
          --total;
        }
      }
    }
  } else if (total < n) {
    std::vector<std::size_t> owing(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) owing[b] = quota - target[b];
    while (total < n) {
      bool progressed = false;
      for (std::size_t b = 0; b < n_bins && total < n; ++b) {
        if (owing[b] == 0) continue;
        std::optional<std::size_t> donor;
        for (std::size_t d = 1; d < n_bins && !donor; ++d) {
          if (b >= d && target[b - d] < bins[b - d].size()) {
            donor = b - d;
          } else if (b + d < n_bins && target[b + d] < bins[b + d].size()) {
            donor = b + d;
          }
        }
        if (!donor) {
          throw Error(ErrorCode::kInsufficientPairs, "no bin has spare pairs to cover a short bin");
        }
        ++target[*donor];
        --owing[b];
        ++total;
        progressed = true;
        result.report.fallbacks.push_back({b, *donor});
      }
      if (!progressed) {
        throw Error(ErrorCode::kInsufficientPairs, "binned draw cannot reach the requested count");
      }
    }
  }

  for (std::size_t b = 0; b < n_bins; ++b) {
    draw_prefix(bins[b], target[b], rng);
    result.report.bin_drawn.push_back(target[b]);
    for (std::size_t k = 0; k < target[b]; ++k) result.pairs.push_back(bins[b][k]);
  }
  std::sort(result.pairs.begin(), result.pairs.end(), by_key);
  return result;
}

std::vector<AffordancePair> all_pairs(const ProximityMatrix& m) {
  std::vector<AffordancePair> out;
  out.reserve(m.pair_count());
  const auto& ids = m.affordance_ids();
  m.for_each_pair([&](std::size_t i, std::size_t j, double score) {
    out.push_back({ids[i], ids[j], score});
  });
  return out;
}

SampleResult sample_uniform_spectrum(const ProximityMatrix& m, const SamplePlan& plan) {
  plan.check();
  Rng rng(derive_seed(plan.seed, "train"));
  return binned_uniform_sample(all_pairs(m), plan.n_train, plan.n_bins, rng);
}

double CurriculumStage::mean_proximity() const {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.proximity;
  return sum / static_cast<double>(pairs.size());
}

std::array<CurriculumStage, 3> split_curriculum(std::vector<AffordancePair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "curriculum needs at least one pair");
  std::sort(pairs.begin(), pairs.end(), closest_first);
  const std::size_t n = pairs.size();
  const std::size_t cuts[4] = {0, ceil_div(n, 3), ceil_div(2 * n, 3), n};
  std::array<CurriculumStage, 3> stages;
  for (int s = 0; s < 3; ++s) {
    CurriculumStage& stage = stages[s];
    stage.index = s + 1;
    stage.pairs.assign(pairs.begin() + static_cast<std::ptrdiff_t>(cuts[s]),
                       pairs.begin() + static_cast<std::ptrdiff_t>(cuts[s + 1]));
    if (!stage.pairs.empty()) {
      stage.band_high = stage.pairs.front().proximity;
      stage.band_low = stage.pairs.back().proximity;
    }
  }
  return stages;
}

SampleResult select_test(const ProximityMatrix& m, const PairKeySet& exclude,
                         const SamplePlan& plan) {
  plan.check();
  std::vector<AffordancePair> candidates;
  for (auto& p : all_pairs(m)) {
    if (!exclude.count(p.key())) candidates.push_back(std::move(p));
  }
  if (candidates.size() < plan.n_test) {
    throw Error(ErrorCode::kInsufficientPairs,
                "only " + std::to_string(candidates.size()) + " pairs remain after exclusion, need " +
                    std::to_string(plan.n_test));
  }
  Rng rng(derive_seed(plan.seed, "test"));
  if (!plan.random_test) return binned_uniform_sample(std::move(candidates), plan.n_test, plan.n_bins, rng);

  SampleResult result;
  std::sort(candidates.begin(), candidates.end(), by_key);
  draw_prefix(candidates, plan.n_test, rng);
  result.pairs.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(plan.n_test));
  std::sort(result.pairs.begin(), result.pairs.end(), by_key);
  return result;
}

Extremes extremes(std::vector<AffordancePair> candidates, std::size_t k) {
  if (candidates.size() < k) {
    throw Error(ErrorCode::kInsufficientPairs,
                "need " + std::to_string(k) + " candidates, have " + std::to_string(candidates.size()));
  }
  Extremes out;
  std::sort(candidates.begin(), candidates.end(), closest_first);
  out.closest.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(candidates.begin(), candidates.end(), farthest_first);
  out.farthest.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

json pair_record(const AffordancePair& p, std::string_view split, std::optional<int> stage,
                 std::uint64_t seed, std::size_t bins) {
  return {{"a", p.a.value},
          {"b", p.b.value},
          {"proximity", p.proximity},
          {"split", std::string(split)},
          {"stage", stage ? json(*stage) : json(nullptr)},
          {"seed", seed},
          {"bins", bins}};
}

AffordancePair pair_from_record(const json& record) {
  try {
    return AffordancePair::make(AffordanceId(record.at("a").get<std::string>()),
                                AffordanceId(record.at("b").get<std::string>()),
                                record.at("proximity").get<double>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("pair record: ") + e.what());
  }
}

}  // namespace affordlab
