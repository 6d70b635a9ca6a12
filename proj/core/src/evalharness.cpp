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

#include "affordlab/evalharness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "affordlab/error.hpp"
#include "affordlab/prompts.hpp"

namespace affordlab {
namespace {

constexpr std::array<std::string_view, 4> kMetricNames{"Faithfulness", "Novelty", "Practicality", "Coherence"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Drops commas that directly precede a closing brace or bracket.
std::string strip_trailing_commas(std::string_view s) {
  std::string out;
  bool in_string = false, escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

const json* find_key(const json& obj, Metric m) {
  const std::string want = lower(metric_name(m));
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (lower(trim(it.key())) == want) return &it.value();
  }
  return nullptr;
}

[[noreturn]] void out_of_range(Metric m, const json& v, std::string_view raw) {
  throw Error(ErrorCode::kOutOfRange, std::string(metric_name(m)) + " has invalid value " + v.dump(),
              std::string(raw));
}

int score_value(Metric m, const json& v, std::string_view raw) {
  long long n = 0;
  if (v.is_number_integer()) {
    n = v.get<long long>();
  } else if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d != std::floor(d)) out_of_range(m, v, raw);
    n = static_cast<long long>(d);
  } else if (v.is_string()) {
    std::string s = trim(v.get<std::string>());
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      out_of_range(m, v, raw);
    }
    if (s.size() > 3) out_of_range(m, v, raw);
    n = std::stoll(s);
  } else if (v.is_array() && v.size() == 1) {
    return score_value(m, v[0], raw);
  } else {
    out_of_range(m, v, raw);
  }
  if (n < 1 || n > 5) out_of_range(m, v, raw);
  return static_cast<int>(n);
}

Choice choice_value(Metric m, const json& v, std::string_view raw) {
  if (v.is_array() && v.size() == 1) return choice_value(m, v[0], raw);
  if (!v.is_string()) out_of_range(m, v, raw);
  std::string s = trim(v.get<std::string>());
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = trim(s.substr(1, s.size() - 2));
  }
  if (s.empty() || (s.size() > 1 && std::isalnum(static_cast<unsigned char>(s[1])))) out_of_range(m, v, raw);
  switch (std::toupper(static_cast<unsigned char>(s[0]))) {
    case 'A':
      return Choice::kA;
    case 'B':
      return Choice::kB;
    case 'C':
      return Choice::kC;
    default:
      out_of_range(m, v, raw);
  }
}

json object_or_throw(std::string_view text) {
  auto obj = find_json_object(text);
  if (!obj) throw Error(ErrorCode::kNotJson, "reply contains no JSON object", std::string(text));
  return *obj;
}

const json& require_key(const json& obj, Metric m, std::string_view raw) {
  const json* v = find_key(obj, m);
  if (v == nullptr) {
    throw Error(ErrorCode::kMissingKey, "reply is missing " + std::string(metric_name(m)), std::string(raw));
  }
  return *v;
}

int choice_sign(Choice c) {
  switch (c) {
    case Choice::kA:
      return 1;
    case Choice::kB:
      return -1;
    case Choice::kC:
      return 0;
  }
  return 0;
}

Choice mirror(Choice c) {
  if (c == Choice::kA) return Choice::kB;
  if (c == Choice::kB) return Choice::kA;
  return c;
}

bool is_parse_error(const Error& e) {
  return e.code() == ErrorCode::kNotJson || e.code() == ErrorCode::kMissingKey || e.code() == ErrorCode::kOutOfRange;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

std::string_view metric_name(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> metric_from_name(std::string_view name) {
  const std::string want = lower(trim(name));
  for (Metric m : kMetrics) {
    if (lower(metric_name(m)) == want) return m;
  }
  return std::nullopt;
}

json MetricScores::to_json() const {
  json j = json::object();
  for (Metric m : kMetrics) j[std::string(metric_name(m))] = (*this)[m];
  return j;
}

MetricScores MetricScores::from_json(const json& j) {
  MetricScores s;
  for (Metric m : kMetrics) s[m] = j.at(std::string(metric_name(m))).get<int>();
  return s;
}

std::string MetricScores::render() const {
  std::string out = "{\n";
  for (std::size_t i = 0; i < kMetrics.size(); ++i) {
    out += "    \"" + std::string(metric_name(kMetrics[i])) + "\": " + std::to_string(values[i]);
    out += i + 1 < kMetrics.size() ? ",\n" : "\n";
  }
  return out + "}";
}

char choice_letter(Choice c) { return c == Choice::kA ? 'A' : c == Choice::kB ? 'B' : 'C'; }

json RelativeChoice::to_json() const {
  json j = json::object();
  for (Metric m : kMetrics) j[std::string(metric_name(m))] = std::string(1, choice_letter((*this)[m]));
  return j;
}

RelativeChoice RelativeChoice::from_json(const json& j) {
  RelativeChoice c;
  for (Metric m : kMetrics) c[m] = choice_value(m, j.at(std::string(metric_name(m))), j.dump());
  return c;
}

std::string RelativeChoice::render() const {
  std::string out = "{\n";
  for (std::size_t i = 0; i < kMetrics.size(); ++i) {
    out += "    \"" + std::string(metric_name(kMetrics[i])) + "\": \"" + choice_letter(values[i]) + "\"";
    out += i + 1 < kMetrics.size() ? ",\n" : "\n";
  }
  return out + "}";
}

std::optional<json> find_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
      } else if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        end = i;
        break;
      }
    }
    if (end == std::string_view::npos) continue;
    const auto span = text.substr(start, end - start + 1);
    for (const std::string& candidate : {std::string(span), strip_trailing_commas(span)}) {
      json j = json::parse(candidate, nullptr, false, true);
      if (!j.is_discarded() && j.is_object()) return j;
    }
  }
  return std::nullopt;
}

MetricScores parse_absolute(std::string_view text) {
  const json obj = object_or_throw(text);
  MetricScores s;
  for (Metric m : kMetrics) s[m] = score_value(m, require_key(obj, m, text), text);
  return s;
}

RelativeChoice parse_relative(std::string_view text) {
  const json obj = object_or_throw(text);
  RelativeChoice c;
  for (Metric m : kMetrics) c[m] = choice_value(m, require_key(obj, m, text), text);
  return c;
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::kAbsolute ? "absolute" : "relative"; }

EvalMode eval_mode_from_string(std::string_view text) {
  if (text == "absolute") return EvalMode::kAbsolute;
  if (text == "relative") return EvalMode::kRelative;
  throw Error(ErrorCode::kInvalidArgument, "unknown eval mode '" + std::string(text) + "'");
}

json EvalItem::to_json() const {
  json j = {{"id", id}, {"model", model}, {"prompt", prompt}, {"image", image.handle}};
  if (image_b) j["image_b"] = image_b->handle;
  return j;
}

EvalItem EvalItem::from_json(const json& j) {
  EvalItem it;
  it.id = j.at("id").get<std::string>();
  it.model = j.value("model", std::string());
  it.prompt = j.at("prompt").get<std::string>();
  it.image = {j.at("image").get<std::string>()};
  if (j.contains("image_b") && !j.at("image_b").is_null()) it.image_b = ImageRef{j.at("image_b").get<std::string>()};
  return it;
}

json EvalRecord::to_json() const {
  json j = {{"item_id", item_id},         {"model", model},         {"mode", std::string(to_string(mode))},
            {"prompt_hash", prompt_hash}, {"raw_reply", raw_reply}, {"retries", retries}};
  if (scores) {
    j["parsed"] = scores->to_json();
  } else if (choice) {
    j["parsed"] = choice->to_json();
  } else {
    j["parsed"] = nullptr;
  }
  if (!raw_reply_swapped.empty()) j["raw_reply_swapped"] = raw_reply_swapped;
  if (choice_swapped) j["parsed_swapped"] = choice_swapped->to_json();
  j["failure"] = failure.empty() ? json(nullptr) : json(failure);
  return j;
}

EvalRecord EvalRecord::from_json(const json& j) {
  try {
    EvalRecord r;
    r.item_id = j.at("item_id").get<std::string>();
    r.model = j.value("model", std::string());
    r.mode = eval_mode_from_string(j.at("mode").get<std::string>());
    r.prompt_hash = j.value("prompt_hash", std::string());
    r.raw_reply = j.value("raw_reply", std::string());
    r.retries = j.value("retries", 0);
    if (j.contains("failure") && !j.at("failure").is_null()) r.failure = j.at("failure").get<std::string>();
    const json& parsed = j.contains("parsed") ? j.at("parsed") : json(nullptr);
    if (!parsed.is_null()) {
      if (r.mode == EvalMode::kAbsolute) {
        r.scores = MetricScores::from_json(parsed);
      } else {
        r.choice = RelativeChoice::from_json(parsed);
      }
    }
    r.raw_reply_swapped = j.value("raw_reply_swapped", std::string());
    if (j.contains("parsed_swapped")) r.choice_swapped = RelativeChoice::from_json(j.at("parsed_swapped"));
    if (r.ok() && !r.scores && !r.choice) r.failure = "record has no parsed verdict";
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed eval record: ") + e.what(), j.dump());
  }
}

TextRequest judge_request(const EvalItem& item, EvalMode mode, double temperature, bool swapped) {
  TextRequest req;
  req.temperature = temperature;
  req.prompt = item.prompt;
  if (mode == EvalMode::kAbsolute) {
    req.system = build_absolute_prompt();
    req.images = {item.image};
  } else {
    if (!item.image_b) throw Error(ErrorCode::kInvalidArgument, "relative item needs two images", item.id);
    req.system = build_relative_prompt();
    req.images = swapped ? std::vector<ImageRef>{*item.image_b, item.image}
                         : std::vector<ImageRef>{item.image, *item.image_b};
  }
  return req;
}

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& manifest) {
  std::vector<EvalRecord> out;
  for (const auto& j : read_jsonl(manifest)) out.push_back(EvalRecord::from_json(j));
  return out;
}

EvalRun run_eval(const std::vector<EvalItem>& items, TextGenClient& judge, const EvalOptions& options,
                 const std::filesystem::path& manifest) {
  if (options.parse_retries < 0) throw Error(ErrorCode::kInvalidArgument, "parse_retries must be >= 0");
  for (const auto& it : items) {
    if (options.mode == EvalMode::kRelative && !it.image_b) {
      throw Error(ErrorCode::kInvalidArgument, "relative item needs two images", it.id);
    }
  }
  std::map<std::string, EvalRecord> previous;
  if (!manifest.empty() && std::filesystem::exists(manifest)) {
    for (auto& r : load_eval_records(manifest)) {
      if (r.mode == options.mode) previous.insert_or_assign(r.item_id, std::move(r));
    }
  }

  EvalRun run;
  run.records.resize(items.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto it = previous.find(items[i].id);
    if (it != previous.end() && it->second.ok()) {
      run.records[i] = it->second;
      ++run.skipped;
    } else {
      pending.push_back(i);
    }
  }

  // Judges one ordering; returns the reply that parsed (or the last one).
  auto judge_until_parsed = [&](const TextRequest& req, EvalRecord& rec, auto&& parse) -> std::string {
    std::string reply;
    for (int attempt = 0;; ++attempt) {
      reply = with_retries(options.client_retry, ErrorCode::kJudgeUnavailable, [&] { return judge.complete(req); });
      try {
        parse(reply);
        return reply;
      } catch (const Error& e) {
        if (!is_parse_error(e)) throw;
        if (attempt >= options.parse_retries) {
          rec.failure = std::string(to_string(e.code())) + ": " + e.what();
          return reply;
        }
        ++rec.retries;
      }
    }
  };

  std::optional<JsonlAppender> writer;
  if (!manifest.empty()) writer.emplace(manifest);
  run_bounded(pending.size(), options.max_concurrency, [&](std::size_t n) {
    const EvalItem& item = items[pending[n]];
    EvalRecord rec;
    rec.item_id = item.id;
    rec.model = item.model;
    rec.mode = options.mode;
    const auto req = judge_request(item, options.mode, options.temperature);
    rec.prompt_hash = req.key();
    if (options.mode == EvalMode::kAbsolute) {
      rec.raw_reply = judge_until_parsed(req, rec, [&](const std::string& r) { rec.scores = parse_absolute(r); });
    } else {
      rec.raw_reply = judge_until_parsed(req, rec, [&](const std::string& r) { rec.choice = parse_relative(r); });
      if (rec.ok() && options.swap_and_rejudge) {
        const auto sreq = judge_request(item, options.mode, options.temperature, true);
        rec.raw_reply_swapped = judge_until_parsed(sreq, rec, [&](const std::string& r) {
          auto c = parse_relative(r);
          for (auto& v : c.values) v = mirror(v);
          rec.choice_swapped = c;
        });
      }
    }
    if (!rec.ok()) {
      rec.scores.reset();
      rec.choice.reset();
      rec.choice_swapped.reset();
    }
    if (writer) writer->append(rec.to_json());
    run.records[pending[n]] = std::move(rec);
  });

  run.judged = pending.size();
  for (const auto& r : run.records) {
    if (!r.ok()) ++run.failures;
  }
  if (!manifest.empty()) {
    std::vector<json> lines;
    for (const auto& r : run.records) lines.push_back(r.to_json());
    write_file_atomic(manifest, to_jsonl(lines));
  }
  return run;
}

json EvalReport::to_json() const {
  json j = {{"mode", std::string(to_string(mode))}, {"n_records", n_records}, {"n_failures", n_failures}};
  if (mode == EvalMode::kAbsolute) {
    auto means_json = [](const std::array<MetricMean, 4>& ms) {
      json o = json::object();
      for (Metric m : kMetrics) {
        const auto& mm = ms[static_cast<std::size_t>(m)];
        o[std::string(metric_name(m))] = {{"mean", round2(mm.mean)}, {"count", mm.count}};
      }
      return o;
    };
    j["means"] = means_json(means);
    json pm = json::object();
    for (const auto& [model, ms] : per_model) pm[model] = means_json(ms);
    j["per_model"] = pm;
  } else {
    json o = json::object();
    for (Metric m : kMetrics) {
      const auto& oc = outcomes[static_cast<std::size_t>(m)];
      o[std::string(metric_name(m))] = {
          {"win", round2(oc.win)}, {"tie", round2(oc.tie)}, {"loss", round2(oc.loss)}, {"count", oc.count}};
    }
    j["outcomes"] = o;
  }
  return j;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string EvalReport::render_table() const {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::size_t first = 8;
  for (const auto& [model, ms] : per_model) first = std::max(first, model.size() + 2);
  std::string out;
  auto row = [&](const std::string& label, auto&& cell) {
    std::string line = pad(label, first);
    for (Metric m : kMetrics) line += pad(cell(static_cast<std::size_t>(m)), 14);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  row(mode == EvalMode::kAbsolute ? "Model" : "Outcome",
      [](std::size_t k) { return std::string(metric_name(kMetrics[k])); });
  if (mode == EvalMode::kAbsolute) {
    for (const auto& [model, ms] : per_model) {
      row(model, [&](std::size_t k) { return format_fixed(ms[k].mean, 2); });
    }
    row("all", [&](std::size_t k) { return format_fixed(means[k].mean, 2); });
  } else {
    row("win %", [&](std::size_t k) { return format_fixed(outcomes[k].win, 2); });
    row("tie %", [&](std::size_t k) { return format_fixed(outcomes[k].tie, 2); });
    row("loss %", [&](std::size_t k) { return format_fixed(outcomes[k].loss, 2); });
  }
  return out;
}

EvalReport aggregate(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no eval records to aggregate");
  EvalReport rep;
  rep.mode = records.front().mode;
  for (const auto& r : records) {
    if (r.mode != rep.mode) throw Error(ErrorCode::kInvalidArgument, "records mix absolute and relative modes");
  }
  rep.n_records = records.size();

  std::array<long long, 4> sums{};
  std::map<std::string, std::pair<std::array<long long, 4>, std::size_t>> model_sums;
  std::array<std::array<std::size_t, 3>, 4> counts{};  // win, tie, loss
  std::size_t ok = 0;
  for (const auto& r : records) {
    if (!r.ok()) {
      ++rep.n_failures;
      continue;
    }
    ++ok;
    if (rep.mode == EvalMode::kAbsolute) {
      auto& ms = model_sums[r.model];
      ++ms.second;
      for (std::size_t k = 0; k < 4; ++k) {
        sums[k] += r.scores->values[k];
        ms.first[k] += r.scores->values[k];
      }
    } else {
      for (std::size_t k = 0; k < 4; ++k) {
        int v = 2 * choice_sign(r.choice->values[k]);
        if (r.choice_swapped) v = choice_sign(r.choice->values[k]) + choice_sign(r.choice_swapped->values[k]);
        ++counts[k][v > 0 ? 0 : v == 0 ? 1 : 2];
      }
    }
  }
  if (ok == 0) throw Error(ErrorCode::kEmptyInput, "no successfully judged records");
  const double n = static_cast<double>(ok);
  for (std::size_t k = 0; k < 4; ++k) {
    if (rep.mode == EvalMode::kAbsolute) {
      rep.means[k] = {static_cast<double>(sums[k]) / n, ok};
    } else {
      rep.outcomes[k] = {100.0 * static_cast<double>(counts[k][0]) / n, 100.0 * static_cast<double>(counts[k][1]) / n,
                         100.0 * static_cast<double>(counts[k][2]) / n, ok};
    }
  }
  if (rep.mode == EvalMode::kAbsolute && !(model_sums.size() == 1 && model_sums.begin()->first.empty())) {
    for (const auto& [model, ms] : model_sums) {
      auto& out = rep.per_model[model.empty() ? "unnamed" : model];
      for (std::size_t k = 0; k < 4; ++k) {
        out[k] = {static_cast<double>(ms.first[k]) / static_cast<double>(ms.second), ms.second};
      }
    }
  }
  return rep;
}

}  // namespace affordlab
