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

#include "affordlab/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "affordlab/error.hpp"

namespace affordlab {
namespace {

constexpr int kLevels = 5;

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double percent(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

double cohen_kappa(std::span<const int> first, std::span<const int> second, KappaWeighting weighting) {
  if (first.size() != second.size()) throw Error(ErrorCode::kInvalidArgument, "rating lists differ in length");
  if (first.empty()) throw Error(ErrorCode::kEmptyInput, "no ratings");
  std::array<std::array<double, kLevels>, kLevels> table{};
  for (std::size_t i = 0; i < first.size(); ++i) {
    const int a = first[i], b = second[i];
    if (a < 1 || a > kLevels || b < 1 || b > kLevels) {
      throw Error(ErrorCode::kOutOfRange, "rating outside 1..5");
    }
    table[a - 1][b - 1] += 1.0;
  }
  const double n = static_cast<double>(first.size());
  std::array<double, kLevels> row{}, col{};
  for (int i = 0; i < kLevels; ++i) {
    for (int j = 0; j < kLevels; ++j) {
      table[i][j] /= n;
      row[i] += table[i][j];
      col[j] += table[i][j];
    }
  }
  double po = 0.0, pe = 0.0;
  for (int i = 0; i < kLevels; ++i) {
    for (int j = 0; j < kLevels; ++j) {
      const double w = weighting == KappaWeighting::kUnweighted
                           ? (i == j ? 1.0 : 0.0)
                           : 1.0 - static_cast<double>(std::abs(i - j)) / static_cast<double>(kLevels - 1);
      po += w * table[i][j];
      pe += w * row[i] * col[j];
    }
  }
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

AgreementReport inter_annotator(const std::vector<RatingPair>& pairs, const AgreementOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no rating pairs");
  if (options.tolerance < 0) throw Error(ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  AgreementReport rep;
  rep.n_items = pairs.size();
  rep.weighting = options.weighting;
  std::vector<int> all_a, all_b;
  std::size_t all_hits = 0;
  for (Metric m : kMetrics) {
    const auto k = static_cast<std::size_t>(m);
    std::vector<int> a, b;
    std::size_t hits = 0;
    for (const auto& [x, y] : pairs) {
      a.push_back(x[m]);
      b.push_back(y[m]);
      if (std::abs(x[m] - y[m]) <= options.tolerance) ++hits;
    }
    rep.percent_agreement[k] = percent(hits, pairs.size());
    rep.kappa[k] = cohen_kappa(a, b, options.weighting);
    all_hits += hits;
    all_a.insert(all_a.end(), a.begin(), a.end());
    all_b.insert(all_b.end(), b.begin(), b.end());
  }
  rep.overall_percent_agreement = percent(all_hits, all_a.size());
  rep.overall_kappa = cohen_kappa(all_a, all_b, options.weighting);
  return rep;
}

json AgreementReport::to_json() const {
  json per = json::object();
  for (Metric m : kMetrics) {
    const auto k = static_cast<std::size_t>(m);
    per[std::string(metric_name(m))] = {{"percent_agreement", percent_agreement[k]}, {"kappa", kappa[k]}};
  }
  return {{"n_items", n_items},
          {"weighting", weighting == KappaWeighting::kUnweighted ? "unweighted" : "linear"},
          {"per_metric", per},
          {"overall", {{"percent_agreement", overall_percent_agreement}, {"kappa", overall_kappa}}}};
}

std::string AgreementReport::render() const {
  std::string out = "items: " + std::to_string(n_items) + "\n";
  out += "metric         agreement %  kappa\n";
  auto line = [&](std::string name, double pa, double k) {
    name.resize(15, ' ');
    std::string p = format_fixed(pa, 2);
    p.resize(13, ' ');
    out += name + p + format_fixed(k, 3) + "\n";
  };
  for (Metric m : kMetrics) {
    const auto k = static_cast<std::size_t>(m);
    line(std::string(metric_name(m)), percent_agreement[k], kappa[k]);
  }
  line("overall", overall_percent_agreement, overall_kappa);
  return out;
}

std::vector<Annotation> parse_annotations_csv(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(std::move(line));
    pos = nl + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::kEmptyInput, "annotation file is empty");

  const auto header = split_csv_line(lines[0]);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"item_id", "rater_id", "metric", "score"}) {
    if (!col.count(name)) throw Error(ErrorCode::kParseError, std::string("annotation header lacks ") + name, lines[0]);
  }

  std::vector<Annotation> out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = split_csv_line(lines[n]);
    const std::string where = "line " + std::to_string(n + 1);
    if (f.size() != header.size()) throw Error(ErrorCode::kParseError, where + ": wrong field count", lines[n]);
    Annotation a;
    a.item_id = f[col["item_id"]];
    a.rater_id = f[col["rater_id"]];
    if (a.item_id.empty() || a.rater_id.empty()) throw Error(ErrorCode::kParseError, where + ": empty id", lines[n]);
    const auto m = metric_from_name(f[col["metric"]]);
    if (!m) throw Error(ErrorCode::kParseError, where + ": unknown metric '" + f[col["metric"]] + "'", lines[n]);
    a.metric = *m;
    const std::string& s = f[col["score"]];
    if (s.empty() || s.size() > 2 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error(ErrorCode::kParseError, where + ": score is not an integer", lines[n]);
    }
    a.score = std::stoi(s);
    if (a.score < 1 || a.score > 5) throw Error(ErrorCode::kOutOfRange, where + ": score outside 1..5", lines[n]);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Annotation> load_annotations_csv(const std::string& path) { return parse_annotations_csv(read_file(path)); }

namespace {

// item -> rater -> metric -> score; duplicates are rejected.
using Grid = std::map<std::string, std::map<std::string, std::map<Metric, int>>>;

Grid grid_of(const std::vector<Annotation>& annotations) {
  Grid g;
  for (const auto& a : annotations) {
    auto [it, inserted] = g[a.item_id][a.rater_id].emplace(a.metric, a.score);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateName, "duplicate annotation for item " + a.item_id + ", rater " + a.rater_id +
                                                 ", metric " + std::string(metric_name(a.metric)));
    }
  }
  return g;
}

std::optional<MetricScores> complete_scores(const std::map<Metric, int>& m) {
  if (m.size() != kMetrics.size()) return std::nullopt;
  MetricScores s;
  for (Metric k : kMetrics) s[k] = m.at(k);
  return s;
}

}  // namespace

PairedRatings pair_raters(const std::vector<Annotation>& annotations, std::optional<std::string> first,
                          std::optional<std::string> second) {
  if (annotations.empty()) throw Error(ErrorCode::kEmptyInput, "no annotations");
  if (!first || !second) {
    std::set<std::string> raters;
    for (const auto& a : annotations) raters.insert(a.rater_id);
    if (raters.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "expected exactly two raters, found " + std::to_string(raters.size()) + "; name them explicitly");
    }
    first = *raters.begin();
    second = *std::next(raters.begin());
  }
  PairedRatings out;
  out.first_rater = *first;
  out.second_rater = *second;
  for (const auto& [item, by_rater] : grid_of(annotations)) {
    const auto a = by_rater.find(*first);
    const auto b = by_rater.find(*second);
    if (a == by_rater.end() || b == by_rater.end()) continue;
    auto sa = complete_scores(a->second);
    auto sb = complete_scores(b->second);
    if (!sa || !sb) continue;
    out.item_ids.push_back(item);
    out.pairs.emplace_back(*sa, *sb);
  }
  if (out.pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no item was fully rated by both raters");
  return out;
}

json HumanAutoAgreement::to_json() const {
  json per = json::object();
  for (Metric m : kMetrics) per[std::string(metric_name(m))] = percent_agreement[static_cast<std::size_t>(m)];
  return {{"n_items", n_items}, {"per_metric", per}, {"overall", overall_percent_agreement}};
}

HumanAutoAgreement human_vs_auto(const std::vector<Annotation>& annotations, const std::vector<EvalRecord>& records,
                                 double tolerance) {
  std::map<std::string, const MetricScores*> automatic;
  for (const auto& r : records) {
    if (r.ok() && r.scores) automatic[r.item_id] = &*r.scores;
  }
  HumanAutoAgreement out;
  std::array<std::size_t, 4> hits{};
  for (const auto& [item, by_rater] : grid_of(annotations)) {
    const auto it = automatic.find(item);
    if (it == automatic.end()) continue;
    std::array<double, 4> sum{};
    std::array<std::size_t, 4> n{};
    for (const auto& [rater, scores] : by_rater) {
      for (const auto& [m, v] : scores) {
        sum[static_cast<std::size_t>(m)] += v;
        ++n[static_cast<std::size_t>(m)];
      }
    }
    if (std::any_of(n.begin(), n.end(), [](std::size_t c) { return c == 0; })) continue;
    ++out.n_items;
    for (std::size_t k = 0; k < 4; ++k) {
      const double mean = sum[k] / static_cast<double>(n[k]);
      if (std::abs(mean - it->second->values[k]) <= tolerance) ++hits[k];
    }
  }
  if (out.n_items == 0) throw Error(ErrorCode::kEmptyInput, "no item has both human and automatic scores");
  std::size_t total = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    out.percent_agreement[k] = percent(hits[k], out.n_items);
    total += hits[k];
  }
  out.overall_percent_agreement = percent(total, 4 * out.n_items);
  return out;
}

}  // namespace affordlab
