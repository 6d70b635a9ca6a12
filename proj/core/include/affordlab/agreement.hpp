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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affordlab/evalharness.hpp"
#include "affordlab/util.hpp"

namespace affordlab {

enum class KappaWeighting { kUnweighted, kLinear };

// Cohen's kappa over score levels 1..5. When both raters use a single
// identical level (expected agreement 1) the result is 1.
double cohen_kappa(std::span<const int> first, std::span<const int> second,
                   KappaWeighting weighting = KappaWeighting::kUnweighted);

struct AgreementOptions {
  KappaWeighting weighting = KappaWeighting::kUnweighted;
  int tolerance = 1;  // |r1 - r2| <= tolerance counts as agreement
};

struct AgreementReport {
  std::size_t n_items = 0;
  KappaWeighting weighting = KappaWeighting::kUnweighted;
  std::array<double, 4> percent_agreement{};
  double overall_percent_agreement = 0.0;
  std::array<double, 4> kappa{};
  double overall_kappa = 0.0;  // pooled over all (item, metric) cells

  json to_json() const;
  std::string render() const;
};

using RatingPair = std::pair<MetricScores, MetricScores>;

AgreementReport inter_annotator(const std::vector<RatingPair>& pairs, const AgreementOptions& options = {});

struct Annotation {
  std::string item_id;
  std::string rater_id;
  Metric metric = Metric::kFaithfulness;
  int score = 0;
};

// CSV with a header naming item_id, rater_id, metric, score (any order).
std::vector<Annotation> parse_annotations_csv(std::string_view text);
std::vector<Annotation> load_annotations_csv(const std::string& path);

struct PairedRatings {
  std::string first_rater;
  std::string second_rater;
  std::vector<std::string> item_ids;
  std::vector<RatingPair> pairs;
};

// Items rated on all four metrics by both raters. Without explicit ids the
// file must contain exactly two raters (taken in sorted order).
PairedRatings pair_raters(const std::vector<Annotation>& annotations, std::optional<std::string> first = {},
                          std::optional<std::string> second = {});

struct HumanAutoAgreement {
  std::size_t n_items = 0;
  std::array<double, 4> percent_agreement{};
  double overall_percent_agreement = 0.0;

  json to_json() const;
};

// Per-item human means (over all raters) against the automatic scores of the
// same items; a cell agrees when |mean - auto| <= tolerance.
HumanAutoAgreement human_vs_auto(const std::vector<Annotation>& annotations,
                                 const std::vector<EvalRecord>& records, double tolerance = 1.0);

}  // namespace affordlab
