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

#include <atomic>
#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "affordlab/error.hpp"
#include "affordlab/util.hpp"

namespace affordlab {

// Opaque content handle for an image. Raw bytes never enter manifests.
struct ImageRef {
  std::string handle;
  auto operator<=>(const ImageRef&) const = default;
};

struct TextRequest {
  std::string system;              // instruction template
  std::string prompt;              // user content
  std::vector<ImageRef> images;    // attached images, in order
  double temperature = 0.0;

  json to_json() const;
  std::string key() const;  // content hash of the canonical request
};

class TextGenClient {
 public:
  virtual ~TextGenClient() = default;
  virtual std::string complete(const TextRequest& request) = 0;
};

class ImageGenClient {
 public:
  virtual ~ImageGenClient() = default;
  virtual ImageRef generate(const std::string& caption) = 0;
};

class ScorerClient {
 public:
  virtual ~ScorerClient() = default;
  // Similarity between the image embedding and the text embedding.
  virtual double similarity(const ImageRef& image, std::string_view text) = 0;
};

struct ClientConfig {
  std::string base_url;
  std::string token_env;  // name of the env var holding the bearer token
  double timeout_s = 30.0;
  int retry_budget = 3;
  double backoff_initial_s = 0.5;
  double backoff_max_s = 8.0;
  std::size_t max_concurrency = 4;
  double min_interval_s = 0.0;  // per-client rate limit
  std::string model;            // passed through to the service, never interpreted
  double temperature = 0.0;

  json to_json() const;
  static ClientConfig from_json(const json& j);
};

// Enforces a minimum spacing between calls across threads.
class RateLimiter {
 public:
  explicit RateLimiter(double min_interval_s) : interval_(std::chrono::duration<double>(min_interval_s)) {}
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::duration<double> interval_;
  std::chrono::steady_clock::time_point next_{};
};

struct RetryPolicy {
  int budget = 3;  // retries after the first attempt
  double initial_s = 0.5;
  double max_s = 8.0;
  std::function<void(double)> sleep = [](double s) {
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
};

// Runs fn, retrying on ClientError with exponential backoff. When the budget
// is spent the last error is rethrown as `exhausted`.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, ErrorCode exhausted, Fn&& fn) -> decltype(fn()) {
  double delay = policy.initial_s;
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kClientError) throw;
      if (attempt >= policy.budget) {
        throw Error(exhausted, "gave up after " + std::to_string(attempt + 1) + " attempts: " + e.what(),
                    e.subject());
      }
      if (policy.sleep) policy.sleep(delay);
      delay = std::min(delay * 2.0, policy.max_s);
    }
  }
}

// Runs fn(i) for i in [0, n) on at most `workers` threads.
void run_bounded(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Directory of recorded request -> response JSON files, one per request,
// named <request key>.json: {"kind": ..., "request": {...}, "response": {...}}.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  std::optional<json> find(std::string_view kind, const json& request) const;
  void record(std::string_view kind, const json& request, const json& response);

  static std::string key(std::string_view kind, const json& request);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

// Offline clients. Each consults the fixture store first (when given) and
// otherwise synthesizes a deterministic response from the request hash, so
// a full pipeline runs without network access. `strict` disables synthesis:
// a request without a recorded fixture is then a ClientError.
class MockTextGen : public TextGenClient {
 public:
  explicit MockTextGen(std::shared_ptr<FixtureStore> fixtures = nullptr, bool strict = false)
      : fixtures_(std::move(fixtures)), strict_(strict) {}
  std::string complete(const TextRequest& request) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<FixtureStore> fixtures_;
  bool strict_;
  std::atomic<std::size_t> calls_{0};
};

class MockImageGen : public ImageGenClient {
 public:
  explicit MockImageGen(std::shared_ptr<FixtureStore> fixtures = nullptr, bool strict = false)
      : fixtures_(std::move(fixtures)), strict_(strict) {}
  ImageRef generate(const std::string& caption) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<FixtureStore> fixtures_;
  bool strict_;
  std::atomic<std::size_t> calls_{0};
};

class MockScorer : public ScorerClient {
 public:
  explicit MockScorer(std::shared_ptr<FixtureStore> fixtures = nullptr, bool strict = false)
      : fixtures_(std::move(fixtures)), strict_(strict) {}
  double similarity(const ImageRef& image, std::string_view text) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<FixtureStore> fixtures_;
  bool strict_;
  std::atomic<std::size_t> calls_{0};
};

// Deterministic stand-ins used by the mocks.
std::string synthetic_caption_reply(const TextRequest& request);
std::string synthetic_judge_reply(const TextRequest& request);
double synthetic_similarity(const ImageRef& image, std::string_view text);

// Wraps a live client and records every exchange into a fixture store so it
// can be replayed by the mocks.
class RecordingTextGen : public TextGenClient {
 public:
  RecordingTextGen(TextGenClient& inner, std::shared_ptr<FixtureStore> store)
      : inner_(inner), store_(std::move(store)) {}
  std::string complete(const TextRequest& request) override;

 private:
  TextGenClient& inner_;
  std::shared_ptr<FixtureStore> store_;
};

}  // namespace affordlab
