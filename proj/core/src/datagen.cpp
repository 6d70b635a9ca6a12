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

#include "affordlab/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "affordlab/prompts.hpp"

namespace affordlab {
namespace {

std::size_t count_sentences(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || text[i + 1] == ' ' || text[i + 1] == '\n' || text[i + 1] == '"') ++n;
  }
  if (n == 0 && !trim(text).empty()) n = 1;
  return n;
}

// Drops a matching pair of wrapping quotes, ASCII or typographic.
std::string strip_quotes(std::string s) {
  static const std::pair<std::string_view, std::string_view> kQuotes[] = {
      {"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
  for (auto [open, close] : kQuotes) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      return trim(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
    }
  }
  return s;
}

json refs_to_json(const std::vector<ImageRef>& refs) {
  json out = json::array();
  for (const auto& r : refs) out.push_back(r.handle);
  return out;
}

std::vector<ImageRef> refs_from_json(const json& j) {
  std::vector<ImageRef> out;
  for (const auto& r : j) out.push_back({r.get<std::string>()});
  return out;
}

// Stable descending sort by score; unscored candidates sink.
void sort_by_score(std::vector<GeneratedCandidate>& cands) {
  std::stable_sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
    return x.score.value_or(-std::numeric_limits<double>::infinity()) >
           y.score.value_or(-std::numeric_limits<double>::infinity());
  });
}

}  // namespace

json Constraints::to_json() const { return {{"positive", positive}, {"negative", negative}}; }

Constraints Constraints::from_json(const json& j) {
  return {j.at("positive").get<std::vector<std::string>>(), j.at("negative").get<std::vector<std::string>>()};
}

Constraints make_constraints(const Ontology& o, const AffordancePair& pair) {
  Constraints c;
  const std::vector<AffordanceId> targets = {pair.a, pair.b};
  for (const auto& a : targets) c.positive.push_back(o.affordance_at(a).name);
  for (const auto& id : o.negative_constraints(targets, MatchMode::kAny)) {
    c.negative.push_back(o.concept_at(id).name);
  }
  return c;
}

CaptionParse parse_captions(std::string_view response, std::size_t sentence_cap) {
  // Normalize line endings and the escaped separator some replies echo back.
  std::string text;
  text.reserve(response.size());
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (response[i] == '\r') continue;
    if (response.substr(i).starts_with("\\n")) {
      text.push_back('\n');
      ++i;
      continue;
    }
    text.push_back(response[i]);
  }

  CaptionParse out;
  std::string current;
  auto flush = [&] {
    std::string caption = strip_quotes(trim(current));
    current.clear();
    if (caption.empty()) return;
    if (sentence_cap > 0 && count_sentences(caption) > sentence_cap) {
      out.warnings.push_back("caption " + std::to_string(out.captions.size() + 1) + " exceeds " +
                             std::to_string(sentence_cap) + " sentences");
    }
    out.captions.push_back(std::move(caption));
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + start, nl - start);
    if (trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    start = nl + 1;
  }
  flush();
  if (out.captions.empty()) throw Error(ErrorCode::kNoCaptionsFound, "reply holds no captions", std::string(response));
  return out;
}

json GeneratedCandidate::to_json() const {
  return {{"caption", caption}, {"image", image.handle}, {"score", score ? json(*score) : json(nullptr)}};
}

GeneratedCandidate GeneratedCandidate::from_json(const json& j) {
  GeneratedCandidate c{j.at("caption").get<std::string>(), {j.at("image").get<std::string>()}, std::nullopt};
  if (j.contains("score") && !j["score"].is_null()) c.score = j["score"].get<double>();
  return c;
}

FilterResult score_and_filter(std::vector<GeneratedCandidate> candidates, ScorerClient& scorer,
                              std::string_view reference_text, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "top-k must be at least 1");
  FilterResult out;
  std::vector<GeneratedCandidate> scored;
  for (auto& c : candidates) {
    try {
      const double s = scorer.similarity(c.image, reference_text);
      if (!std::isfinite(s)) {
        out.dropped.push_back(c.image.handle + ": non-finite score");
        continue;
      }
      c.score = s;
      scored.push_back(std::move(c));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kClientError) throw;
      out.dropped.push_back(c.image.handle + ": " + e.what());
    }
  }
  for (const auto& d : out.dropped) spdlog::warn("dropped candidate {}", d);
  sort_by_score(scored);
  if (scored.size() > k) scored.resize(k);
  out.kept = std::move(scored);
  return out;
}

std::vector<ImageRef> curate_negative_images(std::string_view concept_name,
                                             const std::vector<ImageRef>& images,
                                             ScorerClient& scorer, std::size_t k) {
  if (images.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no images to curate for '" + std::string(concept_name) + "'",
                std::string(concept_name));
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "top-k must be at least 1");
  const std::string text = "a photo of " + std::string(concept_name);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < images.size(); ++i) scored.emplace_back(scorer.similarity(images[i], text), i);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<ImageRef> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(images[scored[i].second]);
  return out;
}

// --- ImageCatalog ----------------------------------------------------------

ImageCatalog ImageCatalog::load_file(const std::filesystem::path& path) {
  ImageCatalog cat;
  for (const auto& rec : read_jsonl(path)) {
    try {
      cat.add(ConceptId(rec.at("concept").get<std::string>()), {rec.at("image").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, "image catalog " + path.string() + ": " + e.what(), path.string());
    }
  }
  return cat;
}

ImageCatalog ImageCatalog::synthetic(const Ontology& o, std::size_t per_concept) {
  ImageCatalog cat;
  for (const auto& c : o.concepts()) {
    for (std::size_t k = 0; k < per_concept; ++k) {
      cat.add(c.id, {"catalog:" + c.id.value + "/" + std::to_string(k)});
    }
  }
  return cat;
}

void ImageCatalog::add(const ConceptId& concept_id, ImageRef image) {
  images_[concept_id].push_back(std::move(image));
}

const std::vector<ImageRef>& ImageCatalog::images(const ConceptId& concept_id) const {
  static const std::vector<ImageRef> kEmpty;
  auto it = images_.find(concept_id);
  return it == images_.end() ? kEmpty : it->second;
}

// --- config / records ------------------------------------------------------

json DatagenConfig::to_json() const {
  return {{"n_captions", n_captions},
          {"n_images", n_images},
          {"top_k_positive", top_k_positive},
          {"top_k_negative", top_k_negative},
          {"sentence_cap", sentence_cap},
          {"max_concurrency", max_concurrency},
          {"review", review}};
}

DatagenConfig DatagenConfig::from_json(const json& j) {
  DatagenConfig c;
  c.n_captions = j.value("n_captions", c.n_captions);
  c.n_images = j.value("n_images", c.n_images);
  c.top_k_positive = j.value("top_k_positive", c.top_k_positive);
  c.top_k_negative = j.value("top_k_negative", c.top_k_negative);
  c.sentence_cap = j.value("sentence_cap", c.sentence_cap);
  c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  c.review = j.value("review", c.review);
  return c;
}

json TrainingExample::to_json() const {
  json cands = json::array();
  for (const auto& c : candidates) cands.push_back(c.to_json());
  json negs = json::object();
  for (const auto& [name, refs] : negatives) negs[name] = refs_to_json(refs);
  return {{"a", pair.a.value},
          {"b", pair.b.value},
          {"proximity", pair.proximity},
          {"stage", stage},
          {"constraints", constraints.to_json()},
          {"captions", captions},
          {"candidates", cands},
          {"positives", refs_to_json(positives)},
          {"negatives", negs},
          {"phase", phase},
          {"failure", failure},
          {"warnings", warnings}};
}

TrainingExample TrainingExample::from_json(const json& j) {
  try {
    TrainingExample e;
    e.pair = AffordancePair::make(AffordanceId(j.at("a").get<std::string>()),
                                  AffordanceId(j.at("b").get<std::string>()), j.at("proximity").get<double>());
    e.stage = j.at("stage").get<int>();
    e.constraints = Constraints::from_json(j.at("constraints"));
    e.captions = j.value("captions", std::vector<std::string>{});
    for (const auto& c : j.value("candidates", json::array())) e.candidates.push_back(GeneratedCandidate::from_json(c));
    e.positives = refs_from_json(j.value("positives", json::array()));
    const json negatives = j.value("negatives", json::object());
    for (const auto& [name, refs] : negatives.items()) {
      e.negatives[name] = refs_from_json(refs);
    }
    e.phase = j.value("phase", 0);
    e.failure = j.value("failure", std::string{});
    e.warnings = j.value("warnings", std::vector<std::string>{});
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParseError, std::string("training example record: ") + ex.what());
  }
}

std::vector<TrainingExample> load_examples(const std::filesystem::path& manifest) {
  // Later records for the same pair supersede earlier ones.
  std::map<std::pair<std::string, std::string>, std::size_t> position;
  std::vector<TrainingExample> out;
  for (const auto& rec : read_jsonl(manifest)) {
    auto e = TrainingExample::from_json(rec);
    auto [it, inserted] = position.emplace(e.pair.key(), out.size());
    if (inserted) {
      out.push_back(std::move(e));
    } else {
      out[it->second] = std::move(e);
    }
  }
  return out;
}

// --- assembly --------------------------------------------------------------

AssembleResult assemble_examples(const std::array<CurriculumStage, 3>& stages, const Ontology& o,
                                 const ImageCatalog& catalog, Clients clients,
                                 const DatagenConfig& config, const std::filesystem::path& manifest,
                                 DatagenPhase target) {
  if (config.n_captions == 0 || config.n_images == 0 || config.top_k_positive == 0 ||
      config.top_k_negative == 0) {
    throw Error(ErrorCode::kInvalidArgument, "datagen counts must be positive");
  }
  const int target_phase = static_cast<int>(target);

  std::map<std::pair<std::string, std::string>, TrainingExample> previous;
  if (std::filesystem::exists(manifest)) {
    for (auto& e : load_examples(manifest)) previous.emplace(e.pair.key(), std::move(e));
  }

  AssembleResult result;
  std::vector<std::size_t> pending;
  for (const auto& stage : stages) {
    for (const auto& pair : stage.pairs) {
      auto it = previous.find(pair.key());
      if (it != previous.end()) {
        TrainingExample e = it->second;
        e.stage = stage.index;
        if (!e.failed() && e.phase >= target_phase) {
          ++result.stats.skipped;
        } else {
          pending.push_back(result.examples.size());
        }
        result.examples.push_back(std::move(e));
      } else {
        TrainingExample e;
        e.pair = pair;
        e.stage = stage.index;
        pending.push_back(result.examples.size());
        result.examples.push_back(std::move(e));
      }
    }
  }

  // Negative images are curated once per concept and shared across pairs.
  std::map<std::string, std::vector<ImageRef>> curated;
  std::map<std::string, std::string> curation_failures;
  if (target == DatagenPhase::kComplete && !pending.empty()) {
    std::set<ConceptId> needed;
    for (std::size_t idx : pending) {
      const auto& p = result.examples[idx].pair;
      const std::vector<AffordanceId> targets = {p.a, p.b};
      for (auto& c : o.negative_constraints(targets)) needed.insert(std::move(c));
    }
    std::vector<ConceptId> todo(needed.begin(), needed.end());
    std::vector<std::vector<ImageRef>> picks(todo.size());
    std::vector<std::string> errors(todo.size());
    run_bounded(todo.size(), config.max_concurrency, [&](std::size_t i) {
      const auto& images = catalog.images(todo[i]);
      if (images.empty()) return;
      try {
        picks[i] = curate_negative_images(o.concept_at(todo[i]).name, images, clients.scorer,
                                          config.top_k_negative);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < todo.size(); ++i) {
      const std::string& name = o.concept_at(todo[i]).name;
      if (!errors[i].empty()) {
        curation_failures[name] = errors[i];
      } else if (!picks[i].empty()) {
        curated[name] = std::move(picks[i]);
      }
    }
  }

  JsonlAppender writer(manifest);
  run_bounded(pending.size(), config.max_concurrency, [&](std::size_t n) {
    TrainingExample& e = result.examples[pending[n]];
    e.failure.clear();
    try {
      if (e.phase < 1) {
        e.constraints = make_constraints(o, e.pair);
        TextRequest req;
        req.prompt = build_caption_prompt(e.constraints.positive, e.constraints.negative, config.n_captions);
        auto parsed = parse_captions(clients.text.complete(req), config.sentence_cap);
        e.captions = std::move(parsed.captions);
        e.warnings = std::move(parsed.warnings);
        e.phase = 1;
      }
      if (e.phase < 2 && target_phase >= 2) {
        std::vector<GeneratedCandidate> cands;
        for (std::size_t i = 0; i < config.n_images; ++i) {
          const std::string& caption = e.captions[i % e.captions.size()];
          try {
            cands.push_back({caption, clients.image.generate(caption), std::nullopt});
          } catch (const Error& err) {
            if (err.code() != ErrorCode::kClientError) throw;
            e.warnings.push_back(std::string("image generation failed: ") + err.what());
          }
        }
        if (cands.empty()) throw Error(ErrorCode::kClientError, "no images were generated");
        auto filtered = score_and_filter(std::move(cands), clients.scorer,
                                         build_inference_prompt(e.constraints.positive),
                                         config.top_k_positive);
        for (auto& d : filtered.dropped) e.warnings.push_back("dropped " + d);
        if (filtered.kept.empty()) throw Error(ErrorCode::kClientError, "every candidate failed scoring");
        e.candidates = std::move(filtered.kept);
        e.positives.clear();
        for (const auto& c : e.candidates) e.positives.push_back(c.image);
        e.phase = 2;
      }
      if (e.phase < 3 && target_phase >= 3) {
        e.negatives.clear();
        for (const auto& name : e.constraints.negative) {
          if (auto f = curation_failures.find(name); f != curation_failures.end()) {
            throw Error(ErrorCode::kScorerUnavailable, "negative curation failed for " + name + ": " + f->second);
          }
          if (auto it = curated.find(name); it != curated.end()) {
            e.negatives[name] = it->second;
          } else {
            e.warnings.push_back("no catalog images for negative concept " + name);
          }
        }
        e.phase = 3;
      }
    } catch (const Error& err) {
      e.failure = err.what();
    }
    writer.append(e.to_json());
  });

  for (std::size_t idx : pending) {
    ++result.stats.processed;
    if (result.examples[idx].failed()) ++result.stats.failed;
  }
  std::vector<json> records;
  for (const auto& e : result.examples) records.push_back(e.to_json());
  write_file_atomic(manifest, to_jsonl(records));
  return result;
}

std::string review_checklist(const std::vector<TrainingExample>& examples) {
  std::string out = "# Positive image review\n\n";
  out += "Confirm or replace each automatically selected image.\n";
  for (const auto& e : examples) {
    out += "\n## Stage " + std::to_string(e.stage) + ": " + join(e.constraints.positive, " + ") + "\n\n";
    if (e.failed()) {
      out += "- pair failed: " + e.failure + "\n";
      continue;
    }
    for (const auto& c : e.candidates) {
      char score[32];
      std::snprintf(score, sizeof(score), "%.4f", c.score.value_or(0.0));
      out += "- [ ] `" + c.image.handle + "` (score " + score + ") " + c.caption + "\n";
    }
  }
  return out;
}

}  // namespace affordlab
