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
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affordlab/clients.hpp"
#include "affordlab/util.hpp"

namespace affordlab {

// Column order of the reports.
enum class Metric { kFaithfulness = 0, kNovelty, kPracticality, kCoherence };
inline constexpr std::array<Metric, 4> kMetrics{Metric::kFaithfulness, Metric::kNovelty, Metric::kPracticality,
                                                Metric::kCoherence};

std::string_view metric_name(Metric m);
// Case-insensitive.
std::optional<Metric> metric_from_name(std::string_view name);

struct MetricScores {
  std::array<int, 4> values{};

  int& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
  int operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }

  json to_json() const;
  static MetricScores from_json(const json& j);
  // Same layout the judge is asked to produce.
  std::string render() const;
  bool operator==(const MetricScores&) const = default;
};

enum class Choice { kA, kB, kC };
char choice_letter(Choice c);

struct RelativeChoice {
  std::array<Choice, 4> values{Choice::kC, Choice::kC, Choice::kC, Choice::kC};

  Choice& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
  Choice operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }

  json to_json() const;
  static RelativeChoice from_json(const json& j);
  std::string render() const;
  bool operator==(const RelativeChoice&) const = default;
};

// First balanced {...} span that parses as a JSON object, skipping braces
// inside string literals.
std::optional<json> find_json_object(std::string_view text);

// Errors: NotJson, MissingKey, OutOfRange; each carries the raw text as subject.
MetricScores parse_absolute(std::string_view text);
RelativeChoice parse_relative(std::string_view text);

enum class EvalMode { kAbsolute, kRelative };
std::string_view to_string(EvalMode mode);
EvalMode eval_mode_from_string(std::string_view text);

struct EvalItem {
  std::string id;
  std::string model;   // generator under evaluation, for per-model breakdowns
  std::string prompt;  // the user requirement shown to the judge
  ImageRef image;
  std::optional<ImageRef> image_b;  // relative mode: the comparison image

  json to_json() const;
  static EvalItem from_json(const json& j);
};

struct EvalRecord {
  std::string item_id;
  std::string model;
  EvalMode mode = EvalMode::kAbsolute;
  std::string prompt_hash;
  std::string raw_reply;
  std::optional<MetricScores> scores;
  std::optional<RelativeChoice> choice;
  std::string raw_reply_swapped;         // swap-and-rejudge only
  std::optional<RelativeChoice> choice_swapped;  // already mapped back to the original order
  int retries = 0;
  std::string failure;

  bool ok() const { return failure.empty(); }
  json to_json() const;
  static EvalRecord from_json(const json& j);
};

struct EvalOptions {
  EvalMode mode = EvalMode::kAbsolute;
  int parse_retries = 3;  // extra judge calls after an unparseable reply
  RetryPolicy client_retry;
  std::size_t max_concurrency = 4;
  double temperature = 0.0;
  bool swap_and_rejudge = false;
};

struct EvalRun {
  std::vector<EvalRecord> records;  // item order
  std::size_t judged = 0;
  std::size_t skipped = 0;  // already in the manifest
  std::size_t failures = 0;
};

TextRequest judge_request(const EvalItem& item, EvalMode mode, double temperature, bool swapped = false);

// One record per item. Existing successful manifest records are kept; the
// manifest is rewritten in item order at the end. Throws JudgeUnavailable once
// the client retry budget is spent.
EvalRun run_eval(const std::vector<EvalItem>& items, TextGenClient& judge, const EvalOptions& options,
                 const std::filesystem::path& manifest = {});

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& manifest);

struct MetricMean {
  double mean = 0.0;
  std::size_t count = 0;
};

struct Outcome {
  double win = 0.0;  // percentages; A = first image
  double tie = 0.0;
  double loss = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  EvalMode mode = EvalMode::kAbsolute;
  std::size_t n_records = 0;
  std::size_t n_failures = 0;
  std::array<MetricMean, 4> means{};
  std::map<std::string, std::array<MetricMean, 4>> per_model;
  std::array<Outcome, 4> outcomes{};

  json to_json() const;
  std::string render_table() const;
};

// Means are reported to two decimals. With swap-and-rejudge verdicts, each
// metric is scored A = +1, B = -1, C = 0 and averaged over both orders.
EvalReport aggregate(const std::vector<EvalRecord>& records);

std::string format_fixed(double value, int decimals);

}  // namespace affordlab
