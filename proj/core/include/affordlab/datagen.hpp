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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affordlab/clients.hpp"
#include "affordlab/ontology.hpp"
#include "affordlab/sampler.hpp"

namespace affordlab {

struct Constraints {
  std::vector<std::string> positive;  // affordance names
  std::vector<std::string> negative;  // existing concept names

  json to_json() const;
  static Constraints from_json(const json& j);
};

// Positive = the pair's affordance names; negative = names of every concept
// holding at least one of them.
Constraints make_constraints(const Ontology& o, const AffordancePair& pair);

struct CaptionParse {
  std::vector<std::string> captions;
  std::vector<std::string> warnings;  // captions over the sentence cap
};

// Splits a caption reply on blank lines (or a literal "\n\n" escape),
// trimming and dropping empty segments. Throws NoCaptionsFound.
CaptionParse parse_captions(std::string_view response, std::size_t sentence_cap = 3);

struct GeneratedCandidate {
  std::string caption;
  ImageRef image;
  std::optional<double> score;

  json to_json() const;
  static GeneratedCandidate from_json(const json& j);
};

struct FilterResult {
  std::vector<GeneratedCandidate> kept;  // non-increasing score
  std::vector<std::string> dropped;      // "<image>: <reason>"
};

// Scores every candidate against `reference_text` and keeps the top k;
// equal scores keep input order. A candidate whose scoring fails with a
// ClientError is dropped with its reason; ScorerUnavailable propagates.
FilterResult score_and_filter(std::vector<GeneratedCandidate> candidates, ScorerClient& scorer,
                              std::string_view reference_text, std::size_t k);

// Top-k images by similarity to "a photo of {concept}".
std::vector<ImageRef> curate_negative_images(std::string_view concept_name,
                                             const std::vector<ImageRef>& images,
                                             ScorerClient& scorer, std::size_t k = 5);

// Local existing-concept image manifest: JSONL {"concept": id, "image": ref}.
class ImageCatalog {
 public:
  static ImageCatalog load_file(const std::filesystem::path& path);
  // Placeholder refs "catalog:<concept>/<k>" for offline runs.
  static ImageCatalog synthetic(const Ontology& o, std::size_t per_concept = 60);

  void add(const ConceptId& concept_id, ImageRef image);
  const std::vector<ImageRef>& images(const ConceptId& concept_id) const;
  std::size_t concept_count() const { return images_.size(); }

 private:
  std::map<ConceptId, std::vector<ImageRef>> images_;
};

struct DatagenConfig {
  std::size_t n_captions = 10;
  std::size_t n_images = 10;
  std::size_t top_k_positive = 3;
  std::size_t top_k_negative = 5;
  std::size_t sentence_cap = 3;
  std::size_t max_concurrency = 4;
  bool review = false;

  json to_json() const;
  static DatagenConfig from_json(const json& j);
};

enum class DatagenPhase { kCaptions = 1, kImages = 2, kComplete = 3 };

struct TrainingExample {
  AffordancePair pair;
  int stage = 0;
  Constraints constraints;
  std::vector<std::string> captions;
  std::vector<GeneratedCandidate> candidates;  // scored survivors, best first
  std::vector<ImageRef> positives;
  std::map<std::string, std::vector<ImageRef>> negatives;  // concept name -> images
  int phase = 0;                                           // last completed DatagenPhase
  std::string failure;                                     // non-empty when the pair failed
  std::vector<std::string> warnings;

  bool failed() const { return !failure.empty(); }
  json to_json() const;
  static TrainingExample from_json(const json& j);
};

struct Clients {
  TextGenClient& text;
  ImageGenClient& image;
  ScorerClient& scorer;
};

struct AssembleStats {
  std::size_t processed = 0;
  std::size_t skipped = 0;  // already at the target phase
  std::size_t failed = 0;
};

struct AssembleResult {
  std::vector<TrainingExample> examples;  // curriculum order
  AssembleStats stats;
};

// Per pair: constraints -> captions -> images -> top-k positives -> curated
// negatives, stopping at `target`. The JSONL manifest at `manifest` is
// appended as pairs finish and rewritten in curriculum order at the end;
// pairs already at `target` are skipped, so a re-run over a complete
// manifest makes no client calls. A failing pair is recorded and the run
// continues.
AssembleResult assemble_examples(const std::array<CurriculumStage, 3>& stages, const Ontology& o,
                                 const ImageCatalog& catalog, Clients clients,
                                 const DatagenConfig& config, const std::filesystem::path& manifest,
                                 DatagenPhase target = DatagenPhase::kComplete);

std::vector<TrainingExample> load_examples(const std::filesystem::path& manifest);

// Markdown checklist for manual confirmation of the automatic top-k picks.
std::string review_checklist(const std::vector<TrainingExample>& examples);

}  // namespace affordlab
