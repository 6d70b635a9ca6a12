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

#include "affordlab/clients.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

#include "affordlab/rng.hpp"

namespace affordlab {
namespace {

const char* const kShapes[] = {"spherical", "modular", "spiral", "folding", "hexagonal",
                               "telescoping", "ribbed", "teardrop-shaped", "stacked", "arched"};
const char* const kMaterials[] = {"bamboo", "brushed aluminum", "translucent resin", "woven rattan",
                                  "matte ceramic", "recycled felt", "walnut", "frosted glass"};
const char* const kFeatures[] = {"a soft glowing seam runs along its edge",
                                 "retractable panels slide out from its sides",
                                 "a central hinge lets it unfold into two halves",
                                 "its surface is covered in small hexagonal tiles",
                                 "a spiral channel wraps around its base",
                                 "curved handles are carved directly into the frame"};
const char* const kMetricKeys[] = {"Faithfulness", "Novelty", "Practicality", "Coherence"};

template <std::size_t N>
const char* pick(const char* const (&words)[N], Rng& rng) {
  return words[rng.uniform_index(N)];
}

std::size_t parse_count_word(const std::string& word) {
  static const std::vector<std::string> kWords = {
      "zero",     "one",     "two",     "three",     "four",     "five",    "six",
      "seven",    "eight",   "nine",    "ten",       "eleven",   "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};
  for (std::size_t i = 0; i < kWords.size(); ++i) {
    if (kWords[i] == word) return i;
  }
  try {
    return static_cast<std::size_t>(std::stoul(word));
  } catch (...) {
    return 3;
  }
}

std::vector<std::string> parse_bracket_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    auto item = trim(std::string_view(text).substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

}  // namespace

json TextRequest::to_json() const {
  json imgs = json::array();
  for (const auto& i : images) imgs.push_back(i.handle);
  return {{"system", system}, {"prompt", prompt}, {"images", imgs}, {"temperature", temperature}};
}

std::string TextRequest::key() const { return content_hash(canonical_dump(to_json())); }

json ClientConfig::to_json() const {
  return {{"base_url", base_url},
          {"token_env", token_env},
          {"timeout_s", timeout_s},
          {"retry_budget", retry_budget},
          {"backoff_initial_s", backoff_initial_s},
          {"backoff_max_s", backoff_max_s},
          {"max_concurrency", max_concurrency},
          {"min_interval_s", min_interval_s},
          {"model", model},
          {"temperature", temperature}};
}

ClientConfig ClientConfig::from_json(const json& j) {
  ClientConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.token_env = j.value("token_env", c.token_env);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.retry_budget = j.value("retry_budget", c.retry_budget);
  c.backoff_initial_s = j.value("backoff_initial_s", c.backoff_initial_s);
  c.backoff_max_s = j.value("backoff_max_s", c.backoff_max_s);
  c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  c.min_interval_s = j.value("min_interval_s", c.min_interval_s);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  return c;
}

void RateLimiter::acquire() {
  if (interval_.count() <= 0.0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
  }
  std::this_thread::sleep_until(slot);
}

void run_bounded(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// --- FixtureStore ----------------------------------------------------------

FixtureStore::FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string FixtureStore::key(std::string_view kind, const json& request) {
  return content_hash(std::string(kind) + "\n" + canonical_dump(request));
}

std::optional<json> FixtureStore::find(std::string_view kind, const json& request) const {
  const auto path = dir_ / (key(kind, request) + ".json");
  std::lock_guard lock(mu_);
  if (!std::filesystem::exists(path)) return std::nullopt;
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, "fixture " + path.string() + ": " + e.what(), path.string());
  }
  if (!doc.contains("response")) {
    throw Error(ErrorCode::kParseError, "fixture without response: " + path.string(), path.string());
  }
  return doc["response"];
}

void FixtureStore::record(std::string_view kind, const json& request, const json& response) {
  const auto path = dir_ / (key(kind, request) + ".json");
  json doc = {{"kind", std::string(kind)}, {"request", request}, {"response", response}};
  std::lock_guard lock(mu_);
  write_file_atomic(path, doc.dump(2) + "\n");
}

// --- synthetic responders --------------------------------------------------

std::string synthetic_caption_reply(const TextRequest& request) {
  Rng rng(fnv1a64(request.key()));
  std::size_t count = 3;
  std::smatch m;
  static const std::regex kCount(R"(Generate (\w+) different descriptions)");
  if (std::regex_search(request.prompt, m, kCount)) count = parse_count_word(m[1].str());
  std::vector<std::string> positives;
  static const std::regex kPositive(R"(Positive Constraints: \[([^\]]*)\])");
  if (std::regex_search(request.prompt, m, kPositive)) positives = parse_bracket_list(m[1].str());
  if (positives.empty()) positives = {"function"};

  std::vector<std::string> captions;
  for (std::size_t i = 0; i < count; ++i) {
    std::string c = "A ";
    c += pick(kShapes, rng);
    c += " ";
    c += pick(kMaterials, rng);
    c += " object that lets you " + join(positives, " and ") + " in one body. ";
    std::string feature = pick(kFeatures, rng);
    feature[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(feature[0])));
    c += feature + ".";
    captions.push_back(std::move(c));
  }
  return join(captions, "\n\n") + "\n";
}

std::string synthetic_judge_reply(const TextRequest& request) {
  Rng rng(fnv1a64(request.key()));
  const bool relative = request.system.find("two AI concept generators") != std::string::npos;
  json body = json::object();
  for (const char* key : kMetricKeys) {
    if (relative) {
      static const char* const kChoices[] = {"A", "B", "C"};
      body[key] = kChoices[rng.uniform_index(3)];
    } else {
      body[key] = 2 + static_cast<int>(rng.uniform_index(4));
    }
  }
  // Vary the wrapping the way real judge replies do.
  switch (rng.uniform_index(3)) {
    case 0:
      return body.dump(4);
    case 1:
      return "Evaluation of the generated concept.\n\n```json\n" + body.dump(4) +
             "\n```\n\nThe scores reflect the rubric above.";
    default:
      return "Here is my assessment: " + body.dump() + " Overall the design is reasonable.";
  }
}

double synthetic_similarity(const ImageRef& image, std::string_view text) {
  Rng rng(fnv1a64(image.handle + "\x1f" + std::string(text)));
  // Roughly the range of CLIP cosine similarities for matching pairs.
  return 0.15 + 0.2 * rng.uniform01();
}

// --- mocks -----------------------------------------------------------------

std::string MockTextGen::complete(const TextRequest& request) {
  ++calls_;
  const json req = request.to_json();
  if (fixtures_) {
    if (auto hit = fixtures_->find("text", req)) return hit->at("text").get<std::string>();
  }
  if (strict_) throw Error(ErrorCode::kClientError, "no recorded fixture for text request", request.key());
  if (request.system.find("impartial evaluator") != std::string::npos) {
    return synthetic_judge_reply(request);
  }
  return synthetic_caption_reply(request);
}

ImageRef MockImageGen::generate(const std::string& caption) {
  ++calls_;
  const json req = {{"caption", caption}};
  if (fixtures_) {
    if (auto hit = fixtures_->find("image", req)) return {hit->at("image_ref").get<std::string>()};
  }
  if (strict_) throw Error(ErrorCode::kClientError, "no recorded fixture for image request", caption);
  return {"mock-image:" + content_hash(caption)};
}

double MockScorer::similarity(const ImageRef& image, std::string_view text) {
  ++calls_;
  const json req = {{"image_ref", image.handle}, {"text", std::string(text)}};
  if (fixtures_) {
    if (auto hit = fixtures_->find("score", req)) return hit->at("score").get<double>();
  }
  if (strict_) throw Error(ErrorCode::kClientError, "no recorded fixture for score request", image.handle);
  return synthetic_similarity(image, text);
}

std::string RecordingTextGen::complete(const TextRequest& request) {
  std::string reply = inner_.complete(request);
  store_->record("text", request.to_json(), {{"text", reply}});
  return reply;
}

}  // namespace affordlab
