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

#include <atomic>
#include <set>

#include "affordlab/clients.hpp"
#include "affordlab/prompts.hpp"
#include "test_support.hpp"

namespace affordlab {
namespace {

TextRequest caption_request() {
  TextRequest r;
  r.system = "caption";
  r.prompt = build_caption_prompt({"brew", "deliver"}, {"kettle"}, 4);
  return r;
}

TEST(TextRequest, KeyCoversEveryField) {
  auto a = caption_request();
  auto b = a;
  EXPECT_EQ(a.key(), b.key());
  b.temperature = 0.5;
  EXPECT_NE(a.key(), b.key());
  b = a;
  b.images.push_back({"img"});
  EXPECT_NE(a.key(), b.key());
}

TEST(ClientConfig, JsonRoundTripAndDefaults) {
  ClientConfig c;
  c.base_url = "http://localhost:1";
  c.retry_budget = 5;
  c.model = "m";
  auto back = ClientConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  auto defaults = ClientConfig::from_json(json::object());
  EXPECT_EQ(defaults.retry_budget, 3);
  EXPECT_EQ(defaults.max_concurrency, 4u);
}

TEST(WithRetries, RetriesClientErrorsWithBackoff) {
  RetryPolicy policy;
  policy.budget = 3;
  policy.initial_s = 1.0;
  policy.max_s = 3.0;
  std::vector<double> sleeps;
  policy.sleep = [&](double s) { sleeps.push_back(s); };
  int calls = 0;
  int v = with_retries(policy, ErrorCode::kJudgeUnavailable, [&] {
    if (++calls < 4) throw Error(ErrorCode::kClientError, "flaky");
    return 42;
  });
  EXPECT_EQ(v, 42);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(sleeps, (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(WithRetries, ExhaustionMapsToGivenCode) {
  RetryPolicy policy;
  policy.budget = 2;
  policy.sleep = nullptr;
  int calls = 0;
  try {
    with_retries(policy, ErrorCode::kScorerUnavailable, [&]() -> int {
      ++calls;
      throw Error(ErrorCode::kClientError, "down", "svc");
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScorerUnavailable);
    EXPECT_EQ(e.subject(), "svc");
  }
  EXPECT_EQ(calls, 3);
}

TEST(WithRetries, OtherErrorsPassThrough) {
  RetryPolicy policy;
  policy.sleep = nullptr;
  int calls = 0;
  EXPECT_THROW(with_retries(policy, ErrorCode::kJudgeUnavailable,
                            [&]() -> int {
                              ++calls;
                              throw Error(ErrorCode::kParseError, "bad");
                            }),
               Error);
  EXPECT_EQ(calls, 1);
}

TEST(RunBounded, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> seen(100);
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  run_bounded(100, 3, [&](std::size_t i) {
    int now = ++active;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    ++seen[i];
    --active;
  });
  for (auto& s : seen) EXPECT_EQ(s.load(), 1);
  EXPECT_LE(peak.load(), 3);
}

TEST(RunBounded, PropagatesFirstError) {
  EXPECT_THROW(run_bounded(10, 2,
                           [](std::size_t i) {
                             if (i == 4) throw Error(ErrorCode::kClientError, "x");
                           }),
               Error);
}

TEST(FixtureStore, RecordAndFind) {
  testing::TempDir dir;
  FixtureStore store(dir.path());
  json req = {{"caption", "a lamp"}};
  EXPECT_FALSE(store.find("image", req).has_value());
  store.record("image", req, {{"image_ref", "img-1"}});
  auto hit = store.find("image", req);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ((*hit)["image_ref"], "img-1");
  EXPECT_FALSE(store.find("text", req).has_value());
  EXPECT_NE(FixtureStore::key("image", req), FixtureStore::key("text", req));
}

TEST(MockClients, ReplayFixturesBeforeSynthesizing) {
  testing::TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  auto req = caption_request();
  store->record("text", req.to_json(), {{"text", "recorded"}});
  MockTextGen text(store);
  EXPECT_EQ(text.complete(req), "recorded");
  store->record("image", {{"caption", "c"}}, {{"image_ref", "stored"}});
  MockImageGen image(store);
  EXPECT_EQ(image.generate("c").handle, "stored");
  EXPECT_EQ(image.generate("d").handle, "mock-image:" + content_hash("d"));
  EXPECT_EQ(image.calls(), 2u);
}

TEST(MockClients, StrictModeRefusesUnrecordedRequests) {
  testing::TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  MockTextGen text(store, true);
  MockImageGen image(store, true);
  MockScorer scorer(store, true);
  EXPECT_THROW(text.complete(caption_request()), Error);
  EXPECT_THROW(image.generate("x"), Error);
  EXPECT_THROW(scorer.similarity({"i"}, "t"), Error);
}

TEST(MockClients, SyntheticCaptionsHonourCountAndPositives) {
  MockTextGen text;
  auto reply = text.complete(caption_request());
  EXPECT_EQ(reply, text.complete(caption_request()));
  std::size_t blocks = 1;
  for (std::size_t p = reply.find("\n\n"); p != std::string::npos; p = reply.find("\n\n", p + 2)) ++blocks;
  EXPECT_EQ(blocks, 4u);
  EXPECT_NE(reply.find("brew and deliver"), std::string::npos);
}

TEST(MockClients, SyntheticJudgeReplyContainsAllKeys) {
  TextRequest r;
  r.system = build_absolute_prompt();
  r.prompt = "a new design that has functions of sit.";
  MockTextGen text;
  auto reply = text.complete(r);
  for (const char* k : {"Faithfulness", "Novelty", "Practicality", "Coherence"}) {
    EXPECT_NE(reply.find(k), std::string::npos);
  }
}

TEST(MockClients, SyntheticSimilarityIsStableAndBounded) {
  MockScorer scorer;
  double s = scorer.similarity({"img"}, "text");
  EXPECT_EQ(s, scorer.similarity({"img"}, "text"));
  EXPECT_GE(s, 0.15);
  EXPECT_LT(s, 0.35);
}

TEST(RecordingTextGen, WritesReplayableFixtures) {
  testing::TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  MockTextGen inner;
  RecordingTextGen rec(inner, store);
  auto reply = rec.complete(caption_request());
  MockTextGen replay(store, true);
  EXPECT_EQ(replay.complete(caption_request()), reply);
}

TEST(RateLimiter, SpacesAcquisitions) {
  RateLimiter limiter(0.02);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(elapsed, 0.059);
}

}  // namespace
}  // namespace affordlab
