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

#include "affordlab/http_clients.hpp"

#include <cstdlib>

#include <httplib.h>

namespace affordlab {
namespace {

// Shared transport: one JSON POST with auth, rate limiting and retries.
class JsonEndpoint {
 public:
  JsonEndpoint(ClientConfig config, ErrorCode exhausted)
      : config_(std::move(config)), exhausted_(exhausted), limiter_(config_.min_interval_s) {
    if (config_.base_url.empty()) throw Error(ErrorCode::kClientError, "client base_url is empty");
    if (!config_.token_env.empty()) {
      const char* token = std::getenv(config_.token_env.c_str());
      if (token == nullptr || *token == '\0') {
        throw Error(ErrorCode::kClientError,
                    "environment variable " + config_.token_env + " holds no token", config_.token_env);
      }
      token_ = token;
    }
    policy_.budget = config_.retry_budget;
    policy_.initial_s = config_.backoff_initial_s;
    policy_.max_s = config_.backoff_max_s;
  }

  json post(const std::string& path, json body) {
    if (!config_.model.empty()) body["model"] = config_.model;
    const std::string payload = body.dump();
    return with_retries(policy_, exhausted_, [&] {
      limiter_.acquire();
      httplib::Client cli(config_.base_url);
      const auto timeout = std::chrono::duration<double>(config_.timeout_s);
      const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
      const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
      cli.set_connection_timeout(sec.count(), usec.count());
      cli.set_read_timeout(sec.count(), usec.count());
      cli.set_write_timeout(sec.count(), usec.count());
      httplib::Headers headers;
      if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
      auto res = cli.Post(path, headers, payload, "application/json");
      if (!res) {
        throw Error(ErrorCode::kClientError,
                    "POST " + path + " failed: " + httplib::to_string(res.error()), config_.base_url);
      }
      if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::kClientError,
                    "POST " + path + " returned HTTP " + std::to_string(res->status), config_.base_url);
      }
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kClientError, "POST " + path + " returned invalid JSON: " + e.what(),
                    config_.base_url);
      }
    });
  }

  const ClientConfig& config() const { return config_; }

 private:
  ClientConfig config_;
  ErrorCode exhausted_;
  RateLimiter limiter_;
  RetryPolicy policy_;
  std::string token_;
};

template <typename T>
T field(const json& reply, const char* key, ErrorCode code) {
  auto it = reply.find(key);
  if (it == reply.end()) {
    throw Error(code, std::string("service reply lacks '") + key + "'", reply.dump());
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(code, std::string("service reply has malformed '") + key + "'", reply.dump());
  }
}

}  // namespace

struct HttpTextGen::Impl {
  explicit Impl(ClientConfig c) : endpoint(std::move(c), ErrorCode::kClientError) {}
  JsonEndpoint endpoint;
};

HttpTextGen::HttpTextGen(ClientConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpTextGen::~HttpTextGen() = default;

std::string HttpTextGen::complete(const TextRequest& request) {
  json body = request.to_json();
  if (request.temperature == 0.0) body["temperature"] = impl_->endpoint.config().temperature;
  return field<std::string>(impl_->endpoint.post("/v1/text", body), "text", ErrorCode::kClientError);
}

struct HttpImageGen::Impl {
  explicit Impl(ClientConfig c) : endpoint(std::move(c), ErrorCode::kClientError) {}
  JsonEndpoint endpoint;
};

HttpImageGen::HttpImageGen(ClientConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpImageGen::~HttpImageGen() = default;

ImageRef HttpImageGen::generate(const std::string& caption) {
  json reply = impl_->endpoint.post("/v1/image", {{"caption", caption}});
  return {field<std::string>(reply, "image_ref", ErrorCode::kClientError)};
}

struct HttpScorer::Impl {
  explicit Impl(ClientConfig c) : endpoint(std::move(c), ErrorCode::kScorerUnavailable) {}
  JsonEndpoint endpoint;
};

HttpScorer::HttpScorer(ClientConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpScorer::~HttpScorer() = default;

double HttpScorer::similarity(const ImageRef& image, std::string_view text) {
  json reply = impl_->endpoint.post("/v1/score", {{"image_ref", image.handle}, {"text", std::string(text)}});
  return field<double>(reply, "score", ErrorCode::kClientError);
}

}  // namespace affordlab
