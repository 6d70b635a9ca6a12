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

#include <algorithm>
#include <cmath>

#include "affordlab/error.hpp"
#include "affordlab/metrics.hpp"
#include "proximity_oracle.hpp"
#include "test_support.hpp"

namespace affordlab {
namespace {

struct Fixture {
  json doc;
  std::string embeddings_text;
  Ontology ontology;
  EmbeddingStore store;
};

Fixture load(const std::string& name) {
  auto doc = json::parse(read_file(testing::data_path("fixtures/ontology/" + name)));
  auto text = read_file(testing::data_path("fixtures/embeddings/small.jsonl"));
  return {doc, text, Ontology::from_json(doc), EmbeddingStore::parse(text)};
}

class MetricOracle : public ::testing::TestWithParam<std::string> {};

TEST_P(MetricOracle, MatrixMatchesBruteForce) {
  auto f = load(GetParam());
  DistanceConfig cfg;
  testing::ProximityOracle oracle(f.doc, f.embeddings_text);
  auto m = build_proximity_matrix(f.ontology, f.store, cfg);
  auto ids = oracle.reachable_affordances();
  ASSERT_EQ(m.size(), ids.size());
  ASSERT_EQ(m.pair_count(), ids.size() * (ids.size() - 1) / 2);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EXPECT_EQ(m.affordance_ids()[i].value, ids[i]);
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      EXPECT_NEAR(m.at(i, j), oracle.affordance(ids[i], ids[j]), 1e-12) << ids[i] << "," << ids[j];
      EXPECT_EQ(m.at(i, j), m.at(j, i));
      EXPECT_EQ(m.at(i, j), affordance_proximity(f.ontology, f.store, cfg,
                                                 AffordanceId(ids[i]), AffordanceId(ids[j])));
    }
  }
}

TEST_P(MetricOracle, ParallelBuildIsBitIdentical) {
  auto f = load(GetParam());
  DistanceConfig cfg;
  auto serial = build_proximity_matrix(f.ontology, f.store, cfg, {1});
  auto parallel = build_proximity_matrix(f.ontology, f.store, cfg, {4});
  EXPECT_EQ(serial, parallel);
}

TEST_P(MetricOracle, UnclampedAndNormalizedVariants) {
  auto f = load(GetParam());
  DistanceConfig cfg;
  cfg.alpha = 0.4;
  cfg.beta = 0.6;
  cfg.clamp_negative_sim = false;
  testing::ProximityOracle oracle(f.doc, f.embeddings_text, 0.4, 0.6, false);
  auto m = build_proximity_matrix(f.ontology, f.store, cfg);
  cfg.normalize = true;
  auto n = build_proximity_matrix(f.ontology, f.store, cfg);
  const auto& ids = m.affordance_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double expected = oracle.affordance(ids[i].value, ids[j].value);
      EXPECT_NEAR(m.at(i, j), expected, 1e-12);
      EXPECT_NEAR(n.at(i, j), expected / 1.4, 1e-12);
      EXPECT_LE(n.at(i, j), 1.0 + 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, MetricOracle,
                         ::testing::Values("sofa_chair_car.json", "table_leg_drawer.json"));

TEST(ConceptProximity, SofaChairByHand) {
  auto f = load("sofa_chair_car.json");
  // Direct sets {sit, lie} vs {sit}: 1/2. Part sets {sit, support, rest-arm,
  // lie} vs {sit, support}: 2/4.
  const double cos = cosine_similarity(f.store.at("sofa"), f.store.at("chair"));
  const double expected = 0.7 * (0.5 + 0.5) + 0.3 * std::clamp(cos, 0.0, 1.0);
  EXPECT_NEAR(concept_proximity(f.ontology, f.store, DistanceConfig{}, ConceptId("sofa"),
                                ConceptId("chair")),
              expected, 1e-15);
}

TEST(ConceptProximity, SelfProximityIsMaximal) {
  auto f = load("sofa_chair_car.json");
  DistanceConfig cfg;
  for (const auto& c : f.ontology.concepts()) {
    EXPECT_NEAR(concept_proximity(f.ontology, f.store, cfg, c.id, c.id), cfg.max_score(), 1e-12);
  }
}

TEST(ConceptProximity, Errors) {
  auto f = load("sofa_chair_car.json");
  DistanceConfig cfg;
  EXPECT_THROW(concept_proximity(f.ontology, f.store, cfg, ConceptId("boat"), ConceptId("car")),
               Error);
  EmbeddingStore empty(8);
  try {
    concept_proximity(f.ontology, empty, cfg, ConceptId("sofa"), ConceptId("car"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingEmbedding);
  }
  cfg.alpha = -1;
  EXPECT_THROW(cfg.check(), Error);
}

TEST(AffordanceProximity, RejectsSelfPairAndOrphans) {
  auto f = load("sofa_chair_car.json");
  DistanceConfig cfg;
  try {
    affordance_proximity(f.ontology, f.store, cfg, AffordanceId("sit"), AffordanceId("sit"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  auto doc = f.doc;
  doc["affordances"].push_back({{"id", "fly"}, {"name", "fly"}});
  auto o = Ontology::from_json(doc);
  try {
    affordance_proximity(o, f.store, cfg, AffordanceId("sit"), AffordanceId("fly"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyConceptSet);
  }
  auto m = build_proximity_matrix(o, f.store, cfg);
  ASSERT_EQ(m.excluded().size(), 1u);
  EXPECT_EQ(m.excluded()[0].value, "fly");
  EXPECT_EQ(m.size(), 8u);
}

TEST(Jaccard, Properties) {
  std::vector<int> a{1, 2, 3};
  std::vector<int> b{2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(jaccard(a, b), 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(jaccard(b, a), jaccard(a, b));
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(std::vector<int>{}, std::vector<int>{}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(std::vector<int>{1, 1, 2}, std::vector<int>{2}), 0.5);
}

TEST(Cosine, Basics) {
  std::vector<double> x{1, 0};
  std::vector<double> y{0, 2};
  std::vector<double> z{-3, 0};
  EXPECT_DOUBLE_EQ(cosine_similarity(x, y), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(x, z), -1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(x, std::vector<double>{0, 0}), 0.0);
  EXPECT_THROW(cosine_similarity(x, std::vector<double>{1}), Error);
}

TEST(EmbeddingStore, ParsesAndRoundTrips) {
  auto store = EmbeddingStore::load_file(testing::data_path("fixtures/embeddings/small.jsonl"));
  EXPECT_EQ(store.dim(), 8u);
  EXPECT_EQ(store.size(), 8u);
  ASSERT_NE(store.find("vacuum cleaner"), nullptr);
  auto again = EmbeddingStore::parse(store.serialize());
  // Parsing renormalizes, which may move the last bit.
  ASSERT_EQ(again.size(), store.size());
  for (const auto& [term, v] : store.entries()) {
    const auto* w = again.find(term);
    ASSERT_NE(w, nullptr) << term;
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR((*w)[k], v[k], 1e-15) << term;
  }
}

TEST(EmbeddingStore, ValidatesDimAndClaimedNorm) {
  EXPECT_THROW(EmbeddingStore::parse(R"({"dim": 2}
{"term": "x", "vector": [1, 2, 3]})"),
               Error);
  EXPECT_THROW(EmbeddingStore::parse(R"({"dim": 2, "normalized": true}
{"term": "x", "vector": [1, 1]})"),
               Error);
  EXPECT_THROW(EmbeddingStore::parse(R"({"dimension": 2})"), Error);
  auto store = EmbeddingStore::parse(R"({"dim": 2}
{"term": "x", "vector": [3, 4]})");
  EXPECT_DOUBLE_EQ(store.at("x")[0], 0.6);
  EXPECT_THROW(store.at("y"), Error);
}

TEST(EmbeddingStore, OrderingOnFixtureVectors) {
  auto store = EmbeddingStore::load_file(testing::data_path("fixtures/embeddings/small.jsonl"));
  EXPECT_GT(cosine_similarity(store.at("sofa"), store.at("chair")),
            cosine_similarity(store.at("sofa"), store.at("vacuum cleaner")));
}

TEST(ProximityMatrix, CacheRoundTripAndMismatch) {
  auto f = load("table_leg_drawer.json");
  DistanceConfig cfg;
  auto m = build_proximity_matrix(f.ontology, f.store, cfg);
  testing::TempDir dir;
  m.save(dir / "p.json");
  EXPECT_EQ(ProximityMatrix::load(dir / "p.json", cfg), m);
  DistanceConfig other;
  other.alpha = 0.5;
  try {
    ProximityMatrix::load(dir / "p.json", other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheMismatch);
  }
  EXPECT_NE(cfg.hash(), other.hash());
}

TEST(ProximityMatrix, PackedIndexingAndFind) {
  std::vector<AffordanceId> ids{AffordanceId("a"), AffordanceId("b"), AffordanceId("c"),
                                AffordanceId("d")};
  ProximityMatrix m(ids, {1, 2, 3, 4, 5, 6}, "h");
  EXPECT_EQ(m.at(0, 1), 1);
  EXPECT_EQ(m.at(0, 3), 3);
  EXPECT_EQ(m.at(1, 2), 4);
  EXPECT_EQ(m.at(3, 2), 6);
  EXPECT_EQ(m.find(AffordanceId("d"), AffordanceId("b")), 5.0);
  EXPECT_FALSE(m.find(AffordanceId("a"), AffordanceId("a")).has_value());
  EXPECT_FALSE(m.find(AffordanceId("a"), AffordanceId("z")).has_value());
  EXPECT_THROW(m.at(1, 1), Error);
  EXPECT_THROW(ProximityMatrix(ids, {1, 2}, "h"), Error);
  std::size_t seen = 0;
  m.for_each_pair([&](std::size_t i, std::size_t j, double s) {
    EXPECT_LT(i, j);
    EXPECT_EQ(s, m.at(i, j));
    ++seen;
  });
  EXPECT_EQ(seen, 6u);
}

TEST(PairCount, Combinatorics) {
  EXPECT_EQ(pair_count(0), 0u);
  EXPECT_EQ(pair_count(1), 0u);
  EXPECT_EQ(pair_count(686), 234955u);
}

TEST(Summary, DecilesInterpolate) {
  std::vector<double> v;
  for (int i = 0; i <= 10; ++i) v.push_back(10 - i);
  auto s = summarize(v);
  EXPECT_EQ(s.count, 11u);
  EXPECT_DOUBLE_EQ(s.min, 0);
  EXPECT_DOUBLE_EQ(s.max, 10);
  EXPECT_DOUBLE_EQ(s.mean, 5);
  ASSERT_EQ(s.deciles.size(), 9u);
  EXPECT_DOUBLE_EQ(s.deciles[0], 1);
  EXPECT_DOUBLE_EQ(s.deciles[8], 9);
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(SyntheticEmbeddings, CoverEveryConceptAndShareSuperordinateDirection) {
  auto f = load("sofa_chair_car.json");
  auto store = synthetic_embeddings(f.ontology, 32, 5);
  EXPECT_EQ(store.size(), 3u);
  EXPECT_NO_THROW(build_proximity_matrix(f.ontology, store, DistanceConfig{}));
  EXPECT_EQ(synthetic_embeddings(f.ontology, 32, 5).entries(), store.entries());
}

}  // namespace
}  // namespace affordlab
