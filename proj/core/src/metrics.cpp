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

#include "affordlab/metrics.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "affordlab/error.hpp"
#include "affordlab/rng.hpp"

namespace affordlab {
namespace {

constexpr double kClaimedNormTolerance = 1e-3;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Shared by the per-pair entry point and the matrix build so both produce
// bit-identical values.
double concept_proximity_at(const Ontology& o, const DistanceConfig& cfg,
                            const std::vector<double>& ei, const std::vector<double>& ej,
                            std::size_t ci, std::size_t cj) {
  const auto& ai = o.concept_affordance_indices(ci);
  const auto& aj = o.concept_affordance_indices(cj);
  const auto& pi = o.concept_part_affordance_indices(ci);
  const auto& pj = o.concept_part_affordance_indices(cj);
  const double functional = jaccard<std::size_t>(ai, aj) + jaccard<std::size_t>(pi, pj);
  double sim = cosine_similarity(ei, ej);
  if (cfg.clamp_negative_sim) sim = std::clamp(sim, 0.0, 1.0);
  double score = cfg.alpha * functional + cfg.beta * sim;
  if (cfg.normalize) score /= 2.0 * cfg.alpha + cfg.beta;
  return score;
}

const std::vector<double>& concept_embedding(const Ontology& o, const EmbeddingStore& store,
                                             std::size_t c) {
  const Concept& con = o.concepts()[c];
  const auto* v = store.find(con.name);
  if (v == nullptr) {
    throw Error(ErrorCode::kMissingEmbedding,
                "no embedding for concept name '" + con.name + "'", con.id.value);
  }
  return *v;
}

// Fixed summation order (row-major over the two concept lists) so the
// result never depends on which thread computes it.
double mean_over_concepts(const std::vector<std::size_t>& ci, const std::vector<std::size_t>& cj,
                          const std::function<double(std::size_t, std::size_t)>& prox) {
  double sum = 0.0;
  for (std::size_t p : ci) {
    for (std::size_t q : cj) sum += prox(p, q);
  }
  return sum / (static_cast<double>(ci.size()) * static_cast<double>(cj.size()));
}

template <typename Fn>
void parallel_rows(std::size_t rows, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, rows));
  if (workers == 1) {
    for (std::size_t r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < rows; r += workers) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

// --- EmbeddingStore --------------------------------------------------------

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
}

void EmbeddingStore::insert(std::string term, std::vector<double> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::kParseError,
                "vector for '" + term + "' has length " + std::to_string(vector.size()) +
                    ", expected " + std::to_string(dim_),
                term);
  }
  const double n = norm(vector);
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::kParseError, "vector for '" + term + "' cannot be normalized", term);
  }
  for (double& x : vector) x /= n;
  vectors_[std::move(term)] = std::move(vector);
}

const std::vector<double>* EmbeddingStore::find(std::string_view term) const {
  auto it = vectors_.find(term);
  return it == vectors_.end() ? nullptr : &it->second;
}

const std::vector<double>& EmbeddingStore::at(std::string_view term) const {
  const auto* v = find(term);
  if (v == nullptr) {
    throw Error(ErrorCode::kMissingEmbedding, "no embedding for '" + std::string(term) + "'",
                std::string(term));
  }
  return *v;
}

EmbeddingStore EmbeddingStore::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto parse_line = [&](const std::string& l) {
    try {
      return json::parse(l);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError, "embedding line " + std::to_string(line_no) + ": " + e.what());
    }
  };
  json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = parse_line(line);
      break;
    }
  }
  if (!header.is_object() || !header.contains("dim") || !header["dim"].is_number_unsigned()) {
    throw Error(ErrorCode::kParseError, "embedding header must declare a positive integer dim");
  }
  const bool claimed = header.value("normalized", false);
  EmbeddingStore store(header["dim"].get<std::size_t>());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec = parse_line(line);
    if (!rec.is_object() || !rec.contains("term") || !rec["term"].is_string() ||
        !rec.contains("vector") || !rec["vector"].is_array()) {
      throw Error(ErrorCode::kParseError,
                  "embedding line " + std::to_string(line_no) + " needs term and vector");
    }
    std::vector<double> v;
    v.reserve(rec["vector"].size());
    for (const auto& x : rec["vector"]) {
      if (!x.is_number()) throw Error(ErrorCode::kParseError, "non-numeric vector entry");
      v.push_back(x.get<double>());
    }
    auto term = rec["term"].get<std::string>();
    if (claimed && v.size() == store.dim()) {
      const double n = norm(v);
      if (std::abs(n - 1.0) > kClaimedNormTolerance) {
        throw Error(ErrorCode::kParseError,
                    "vector for '" + term + "' claims unit norm but has norm " + std::to_string(n),
                    term);
      }
    }
    store.insert(std::move(term), std::move(v));
  }
  return store;
}

EmbeddingStore EmbeddingStore::load_file(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string EmbeddingStore::serialize() const {
  std::string out = canonical_dump(json{{"dim", dim_}, {"normalized", true}}) + "\n";
  for (const auto& [term, v] : vectors_) {
    out += canonical_dump(json{{"term", term}, {"vector", v}}) + "\n";
  }
  return out;
}

// --- DistanceConfig --------------------------------------------------------

void DistanceConfig::check() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw Error(ErrorCode::kInvalidArgument, "distance weights need alpha, beta >= 0 and alpha + beta > 0");
  }
}

json DistanceConfig::to_json() const {
  return {{"alpha", alpha},
          {"beta", beta},
          {"clamp_negative_sim", clamp_negative_sim},
          {"normalize", normalize}};
}

DistanceConfig DistanceConfig::from_json(const json& j) {
  DistanceConfig cfg;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.clamp_negative_sim = j.value("clamp_negative_sim", cfg.clamp_negative_sim);
  cfg.normalize = j.value("normalize", cfg.normalize);
  cfg.check();
  return cfg;
}

std::string DistanceConfig::hash() const { return content_hash(canonical_dump(to_json())); }

// --- proximity -------------------------------------------------------------

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "cosine of mismatched lengths");
  double dot = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dot += x[k] * y[k];
    nx += x[k] * x[k];
    ny += y[k] * y[k];
  }
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

double concept_proximity(const Ontology& o, const EmbeddingStore& store,
                         const DistanceConfig& cfg, const ConceptId& ci, const ConceptId& cj) {
  cfg.check();
  auto i = o.concept_index(ci);
  if (!i) throw Error(ErrorCode::kUnknownConcept, "no concept '" + ci.value + "'", ci.value);
  auto j = o.concept_index(cj);
  if (!j) throw Error(ErrorCode::kUnknownConcept, "no concept '" + cj.value + "'", cj.value);
  return concept_proximity_at(o, cfg, concept_embedding(o, store, *i),
                              concept_embedding(o, store, *j), *i, *j);
}

double affordance_proximity(const Ontology& o, const EmbeddingStore& store,
                            const DistanceConfig& cfg, const AffordanceId& ai,
                            const AffordanceId& aj) {
  cfg.check();
  auto i = o.affordance_index(ai);
  if (!i) throw Error(ErrorCode::kUnknownAffordance, "no affordance '" + ai.value + "'", ai.value);
  auto j = o.affordance_index(aj);
  if (!j) throw Error(ErrorCode::kUnknownAffordance, "no affordance '" + aj.value + "'", aj.value);
  if (*i == *j) {
    throw Error(ErrorCode::kInvalidArgument, "affordance pair must be distinct", ai.value);
  }
  if (*j < *i) std::swap(i, j);
  const auto& ci = o.concepts_with_affordance_indices(*i);
  const auto& cj = o.concepts_with_affordance_indices(*j);
  for (auto [idx, set] : {std::pair{*i, &ci}, std::pair{*j, &cj}}) {
    if (set->empty()) {
      const auto& id = o.affordances()[idx].id.value;
      throw Error(ErrorCode::kEmptyConceptSet, "affordance '" + id + "' has no concepts", id);
    }
  }
  return mean_over_concepts(ci, cj, [&](std::size_t p, std::size_t q) {
    return concept_proximity_at(o, cfg, concept_embedding(o, store, p),
                                concept_embedding(o, store, q), p, q);
  });
}

std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// --- ProximityMatrix -------------------------------------------------------

ProximityMatrix::ProximityMatrix(std::vector<AffordanceId> ids, std::vector<double> packed,
                                 std::string config_hash, std::vector<AffordanceId> excluded)
    : ids_(std::move(ids)),
      packed_(std::move(packed)),
      config_hash_(std::move(config_hash)),
      excluded_(std::move(excluded)) {
  if (packed_.size() != affordlab::pair_count(ids_.size())) {
    throw Error(ErrorCode::kInvalidArgument, "packed score count does not match id count");
  }
  if (!std::is_sorted(ids_.begin(), ids_.end())) {
    throw Error(ErrorCode::kInvalidArgument, "matrix ids must be sorted");
  }
}

std::size_t ProximityMatrix::packed_index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const std::size_t n = ids_.size();
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

double ProximityMatrix::at(std::size_t i, std::size_t j) const {
  if (i == j || i >= ids_.size() || j >= ids_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "matrix index out of range or on the diagonal");
  }
  return packed_[packed_index(i, j)];
}

std::optional<std::size_t> ProximityMatrix::index_of(const AffordanceId& a) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), a);
  if (it == ids_.end() || *it != a) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::optional<double> ProximityMatrix::find(const AffordanceId& a, const AffordanceId& b) const {
  auto i = index_of(a);
  auto j = index_of(b);
  if (!i || !j || *i == *j) return std::nullopt;
  return at(*i, *j);
}

json ProximityMatrix::to_json() const {
  json ids = json::array();
  for (const auto& a : ids_) ids.push_back(a.value);
  json excluded = json::array();
  for (const auto& a : excluded_) excluded.push_back(a.value);
  return {{"format", "affordlab.proximity"},
          {"version", 1},
          {"config_hash", config_hash_},
          {"affordance_ids", ids},
          {"excluded", excluded},
          {"scores", packed_}};
}

ProximityMatrix ProximityMatrix::from_json(const json& j) {
  try {
    if (j.at("format") != "affordlab.proximity") {
      throw Error(ErrorCode::kParseError, "not a proximity cache");
    }
    std::vector<AffordanceId> ids;
    for (const auto& a : j.at("affordance_ids")) ids.emplace_back(a.get<std::string>());
    std::vector<AffordanceId> excluded;
    for (const auto& a : j.value("excluded", json::array())) excluded.emplace_back(a.get<std::string>());
    return ProximityMatrix(std::move(ids), j.at("scores").get<std::vector<double>>(),
                           j.at("config_hash").get<std::string>(), std::move(excluded));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("proximity cache: ") + e.what());
  }
}

void ProximityMatrix::save(const std::filesystem::path& path) const {
  write_file_atomic(path, canonical_dump(to_json()) + "\n");
}

ProximityMatrix ProximityMatrix::load(const std::filesystem::path& path,
                                      const DistanceConfig& active) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what(), path.string());
  }
  ProximityMatrix m = from_json(doc);
  if (m.config_hash() != active.hash()) {
    throw Error(ErrorCode::kCacheMismatch,
                "cache was built with config " + m.config_hash() + ", active config is " +
                    active.hash(),
                path.string());
  }
  return m;
}

ProximityMatrix build_proximity_matrix(const Ontology& o, const EmbeddingStore& store,
                                       const DistanceConfig& cfg, BuildOptions options) {
  cfg.check();
  if (auto report = o.validate(); !report.is_valid()) {
    throw Error(ErrorCode::kInvalidArgument,
                "ontology has " + std::to_string(report.errors.size()) + " validation errors",
                report.errors.front().subject);
  }
  const std::size_t nc = o.concepts().size();
  std::vector<const std::vector<double>*> embeddings(nc);
  for (std::size_t c = 0; c < nc; ++c) embeddings[c] = &concept_embedding(o, store, c);

  // Concept matrix, full square so lookups need no index folding.
  std::vector<double> concept_matrix(nc * nc, 0.0);
  parallel_rows(nc, options.parallelism, [&](std::size_t i) {
    for (std::size_t j = i; j < nc; ++j) {
      const double v = concept_proximity_at(o, cfg, *embeddings[i], *embeddings[j], i, j);
      concept_matrix[i * nc + j] = v;
      if (i != j) concept_matrix[j * nc + i] = v;
    }
  });

  std::vector<std::size_t> kept;
  std::vector<AffordanceId> ids;
  std::vector<AffordanceId> excluded;
  for (std::size_t a = 0; a < o.affordances().size(); ++a) {
    if (o.concepts_with_affordance_indices(a).empty()) {
      excluded.push_back(o.affordances()[a].id);
    } else {
      kept.push_back(a);
      ids.push_back(o.affordances()[a].id);
    }
  }

  const std::size_t n = kept.size();
  std::vector<double> packed(pair_count(n));
  auto row_offset = [n](std::size_t i) { return i * n - i * (i + 1) / 2; };
  const auto lookup = [&](std::size_t p, std::size_t q) { return concept_matrix[p * nc + q]; };
  parallel_rows(n, options.parallelism, [&](std::size_t i) {
    const auto& ci = o.concepts_with_affordance_indices(kept[i]);
    std::size_t k = row_offset(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      packed[k++] = mean_over_concepts(ci, o.concepts_with_affordance_indices(kept[j]), lookup);
    }
  });
  return ProximityMatrix(std::move(ids), std::move(packed), cfg.hash(), std::move(excluded));
}

// --- summary ---------------------------------------------------------------

json DistributionSummary::to_json() const {
  return {{"count", count}, {"min", min}, {"max", max}, {"mean", mean}, {"deciles", deciles}};
}

DistributionSummary summarize(std::span<const double> values) {
  DistributionSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  for (int d = 1; d <= 9; ++d) {
    const double pos = d / 10.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    s.deciles.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  return s;
}

EmbeddingStore synthetic_embeddings(const Ontology& o, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  EmbeddingStore store(dim);
  std::map<std::string, std::vector<double>> shared;
  for (const auto& sup : o.superordinates()) {
    Rng rng(derive_seed(seed, "sup:" + sup.id.value));
    auto& v = shared[sup.id.value];
    v.resize(dim);
    for (auto& x : v) x = rng.normal();
  }
  for (const auto& con : o.concepts()) {
    Rng rng(derive_seed(seed, "concept:" + con.id.value));
    std::vector<double> v(dim);
    const auto it = shared.find(con.superordinate.value);
    for (std::size_t k = 0; k < dim; ++k) {
      v[k] = rng.normal() + (it != shared.end() ? it->second[k] : 0.0);
    }
    store.insert(con.name, std::move(v));
  }
  return store;
}

}  // namespace affordlab
