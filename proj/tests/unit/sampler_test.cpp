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

#include <gtest/gtest.h>

#include <set>

#include "affordlab/error.hpp"
#include "affordlab/sampler.hpp"

namespace affordlab {
namespace {

std::string id(std::size_t i) {
  std::string s = std::to_string(i);
  return "f" + std::string(3 - s.size(), '0') + s;
}

// n affordances with pseudo-random pair scores in [0, 2).
ProximityMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  std::vector<AffordanceId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.emplace_back(id(i));
  Rng rng(seed);
  std::vector<double> packed(pair_count(n));
  for (auto& v : packed) v = 2.0 * rng.uniform01();
  return ProximityMatrix(ids, packed, "test");
}

std::set<std::pair<std::string, std::string>> keys(const std::vector<AffordancePair>& pairs) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& p : pairs) out.insert(p.key());
  return out;
}

TEST(AffordancePair, OrdersEndpoints) {
  auto p = AffordancePair::make(AffordanceId("z"), AffordanceId("b"), 0.3);
  EXPECT_EQ(p.a.value, "b");
  EXPECT_EQ(p.b.value, "z");
  EXPECT_THROW(AffordancePair::make(AffordanceId("x"), AffordanceId("x"), 0), Error);
  auto rec = pair_record(p, "train", 2, 7, 10);
  EXPECT_EQ(rec["stage"], 2);
  EXPECT_EQ(pair_from_record(rec), p);
  EXPECT_TRUE(pair_record(p, "test", std::nullopt, 7, 10)["stage"].is_null());
}

TEST(BinnedSample, DrawsDistinctCandidatesEvenlyAcrossBins) {
  auto m = random_matrix(60, 1);
  Rng rng(2);
  auto result = binned_uniform_sample(all_pairs(m), 600, 10, rng);
  ASSERT_EQ(result.pairs.size(), 600u);
  auto drawn = keys(result.pairs);
  EXPECT_EQ(drawn.size(), 600u);
  auto all = keys(all_pairs(m));
  for (const auto& k : drawn) EXPECT_TRUE(all.count(k));
  ASSERT_EQ(result.report.bin_edges.size(), 11u);
  for (std::size_t b = 0; b < 10; ++b) {
    EXPECT_EQ(result.report.bin_drawn[b], 60u);
    std::size_t in_bin = 0;
    for (const auto& p : result.pairs) {
      const bool last = b == 9;
      if (p.proximity >= result.report.bin_edges[b] &&
          (p.proximity < result.report.bin_edges[b + 1] || (last && p.proximity <= result.report.bin_edges[b + 1]))) {
        ++in_bin;
      }
    }
    EXPECT_EQ(in_bin, 60u) << "bin " << b;
  }
  EXPECT_TRUE(result.report.fallbacks.empty());
}

TEST(BinnedSample, ShortBinBorrowsFromNearestNeighbour) {
  // Bin 0 holds one pair, bins 1..3 hold five each.
  std::vector<AffordancePair> cands;
  std::size_t k = 0;
  auto add = [&](double prox) {
    cands.push_back(AffordancePair::make(AffordanceId(id(k)), AffordanceId(id(k + 1)), prox));
    k += 2;
  };
  add(0.0);
  for (int b = 1; b < 4; ++b) {
    for (int i = 0; i < 5; ++i) add(b + 0.5);
  }
  cands.push_back(AffordancePair::make(AffordanceId("zz0"), AffordanceId("zz1"), 4.0));
  Rng rng(3);
  auto result = binned_uniform_sample(cands, 12, 4, rng);
  EXPECT_EQ(result.pairs.size(), 12u);
  ASSERT_EQ(result.report.fallbacks.size(), 2u);
  EXPECT_EQ(result.report.fallbacks[0].short_bin, 0u);
  EXPECT_EQ(result.report.fallbacks[0].donor_bin, 1u);
  EXPECT_EQ(result.report.bin_drawn[0], 1u);
  EXPECT_EQ(result.report.bin_drawn[1], 5u);
}

TEST(BinnedSample, InsufficientPairs) {
  auto m = random_matrix(5, 1);
  Rng rng(1);
  try {
    binned_uniform_sample(all_pairs(m), 11, 2, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientPairs);
  }
}

TEST(BinnedSample, ConstantScoresUseOneBin) {
  std::vector<AffordancePair> cands;
  for (std::size_t i = 0; i < 20; ++i) {
    cands.push_back(AffordancePair::make(AffordanceId(id(2 * i)), AffordanceId(id(2 * i + 1)), 1.0));
  }
  Rng rng(1);
  auto result = binned_uniform_sample(cands, 20, 10, rng);
  EXPECT_EQ(result.pairs.size(), 20u);
}

TEST(SampleSpectrum, DeterministicPerSeed) {
  auto m = random_matrix(50, 4);
  SamplePlan plan;
  plan.seed = 9;
  auto a = sample_uniform_spectrum(m, plan);
  auto b = sample_uniform_spectrum(m, plan);
  EXPECT_EQ(a.pairs, b.pairs);
  plan.seed = 10;
  EXPECT_NE(sample_uniform_spectrum(m, plan).pairs, a.pairs);
}

TEST(Curriculum, SplitsIntoDecreasingThirds) {
  auto m = random_matrix(50, 5);
  SamplePlan plan;
  auto sample = sample_uniform_spectrum(m, plan);
  auto stages = split_curriculum(sample.pairs);
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(stages[s].index, s + 1);
    EXPECT_EQ(stages[s].pairs.size(), 200u);
  }
  EXPECT_GT(stages[0].mean_proximity(), stages[1].mean_proximity());
  EXPECT_GT(stages[1].mean_proximity(), stages[2].mean_proximity());
  EXPECT_GE(stages[0].band_low, stages[1].band_high);
  EXPECT_GE(stages[1].band_low, stages[2].band_high);
}

TEST(Curriculum, UnevenCountsUseCeilingCuts) {
  std::vector<AffordancePair> pairs;
  for (std::size_t i = 0; i < 7; ++i) {
    pairs.push_back(AffordancePair::make(AffordanceId(id(2 * i)), AffordanceId(id(2 * i + 1)),
                                         static_cast<double>(i)));
  }
  auto stages = split_curriculum(pairs);
  EXPECT_EQ(stages[0].pairs.size(), 3u);
  EXPECT_EQ(stages[1].pairs.size(), 2u);
  EXPECT_EQ(stages[2].pairs.size(), 2u);
  EXPECT_EQ(stages[0].pairs.front().proximity, 6.0);
  EXPECT_EQ(stages[2].pairs.back().proximity, 0.0);
  EXPECT_THROW(split_curriculum({}), Error);
}

TEST(SelectTest, DisjointFromTraining) {
  auto m = random_matrix(50, 6);
  SamplePlan plan;
  auto train = sample_uniform_spectrum(m, plan);
  auto exclude = keys(train.pairs);
  for (bool random : {false, true}) {
    plan.random_test = random;
    auto test = select_test(m, exclude, plan);
    EXPECT_EQ(test.pairs.size(), 500u);
    for (const auto& p : test.pairs) EXPECT_FALSE(exclude.count(p.key()));
    EXPECT_EQ(keys(test.pairs).size(), 500u);
  }
  plan.n_test = pair_count(50);
  EXPECT_THROW(select_test(m, exclude, plan), Error);
}

TEST(Extremes, OrderedAndTieBrokenByKey) {
  std::vector<AffordancePair> cands;
  const double scores[] = {0.5, 1.5, 0.1, 1.5, 0.9};
  for (std::size_t i = 0; i < 5; ++i) {
    cands.push_back(AffordancePair::make(AffordanceId(id(2 * i)), AffordanceId(id(2 * i + 1)), scores[i]));
  }
  auto e = extremes(cands, 2);
  ASSERT_EQ(e.closest.size(), 2u);
  EXPECT_EQ(e.closest[0].a.value, id(2));
  EXPECT_EQ(e.closest[1].a.value, id(6));
  EXPECT_EQ(e.farthest[0].proximity, 0.1);
  EXPECT_EQ(e.farthest[1].proximity, 0.5);
  EXPECT_THROW(extremes(cands, 6), Error);
}

}  // namespace
}  // namespace affordlab
