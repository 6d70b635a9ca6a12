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

#include "affordlab/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "affordlab/error.hpp"
#include "affordlab/sampler.hpp"

namespace affordlab {
namespace {

constexpr double kGradFloor = 1e-6;
constexpr double kLatentBound = 3.0;

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string format_real(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void TrainConfig::check() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::kInvalidArgument, "gamma must be >= 0");
  if (epochs_per_stage < 1) throw Error(ErrorCode::kInvalidArgument, "epochs_per_stage must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  if (diffusion_steps < 1) throw Error(ErrorCode::kInvalidArgument, "diffusion_steps must be >= 1");
}

NoiseSchedule TrainConfig::schedule() const {
  return NoiseSchedule::linear(diffusion_steps, beta_start, beta_end);
}

json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"gamma", gamma},
          {"epochs_per_stage", epochs_per_stage},
          {"seed", seed},
          {"optimizer",
           {{"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"epsilon", optimizer.epsilon},
            {"weight_decay", optimizer.weight_decay}}},
          {"shape", shape.to_json()},
          {"diffusion_steps", diffusion_steps},
          {"beta_start", beta_start},
          {"beta_end", beta_end},
          {"shuffled", shuffled}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.gamma = j.value("gamma", c.gamma);
  c.epochs_per_stage = j.value("epochs_per_stage", c.epochs_per_stage);
  c.seed = j.value("seed", c.seed);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
    c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
    c.optimizer.epsilon = o.value("epsilon", c.optimizer.epsilon);
    c.optimizer.weight_decay = o.value("weight_decay", c.optimizer.weight_decay);
  }
  if (j.contains("shape")) c.shape = DenoiserShape::from_json(j.at("shape"));
  c.diffusion_steps = j.value("diffusion_steps", c.diffusion_steps);
  c.beta_start = j.value("beta_start", c.beta_start);
  c.beta_end = j.value("beta_end", c.beta_end);
  c.shuffled = j.value("shuffled", c.shuffled);
  return c;
}

std::string TrainConfig::hash() const { return content_hash(canonical_dump(to_json())); }

NoiseDraw NoiseDraw::sample(Rng& rng, std::size_t steps, std::size_t dim) {
  NoiseDraw d;
  d.t = 1 + static_cast<std::size_t>(rng.uniform_index(steps));
  d.eps.resize(dim);
  for (auto& e : d.eps) e = rng.normal();
  return d;
}

LossTerms triplet_loss_at(const TripletBatch& batch, const ToyDenoiser& model, const NoiseSchedule& s,
                          double gamma, const NoiseDraw& draw, std::span<double> grad) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be >= 0");
  const std::size_t dim = model.shape().latent_dim;
  if (batch.positive.dim() != dim || batch.negative.dim() != dim) {
    throw Error(ErrorCode::kInvalidArgument, "batch latents do not match the model latent size");
  }
  if (draw.t < 1 || draw.t > s.steps()) throw Error(ErrorCode::kInvalidArgument, "timestep out of range");

  const double ab = s.alpha_bar(draw.t);
  const LatentImage xt = forward_diffuse(batch.positive, ab, draw.eps);
  ToyDenoiser::Activations acts;
  const auto eps_hat = model.forward(xt.values, draw.t, s.steps(), batch.condition, grad.empty() ? nullptr : &acts);
  LossTerms out;
  out.t = draw.t;
  out.i_hat = reconstruct(xt, ab, eps_hat);
  out.loss_pos = loss_pos(batch.positive, out.i_hat, draw.eps, eps_hat);
  out.loss_neg = loss_neg(batch.negative, out.i_hat);
  out.loss = out.loss_pos - gamma * out.loss_neg;

  if (!grad.empty()) {
    // dÎ/dε̂ = -sqrt(1 - ab) / sqrt(ab)
    const double k = -std::sqrt(1.0 - ab) / std::sqrt(ab);
    std::vector<double> g(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double i_hat = out.i_hat.values[d];
      const double d_ihat = 2.0 * (i_hat - batch.positive.values[d]) - 2.0 * gamma * (i_hat - batch.negative.values[d]);
      g[d] = k * d_ihat + 2.0 * (eps_hat[d] - draw.eps[d]);
    }
    model.backward(acts, g, grad);
  }
  return out;
}

LossTerms triplet_loss(const TripletBatch& batch, const ToyDenoiser& model, const NoiseSchedule& s,
                       double gamma, Rng& rng, std::span<double> grad) {
  const auto draw = NoiseDraw::sample(rng, s.steps(), model.shape().latent_dim);
  return triplet_loss_at(batch, model, s, gamma, draw, grad);
}

GradCheckResult grad_check(const ToyDenoiser& model, const TripletBatch& batch, const NoiseSchedule& s,
                           double gamma, double step_size, std::uint64_t seed, const GradientFn& analytic,
                           std::size_t max_params) {
  if (!(step_size >= 1e-7 && step_size <= 1e-3)) {
    throw Error(ErrorCode::kInvalidArgument, "step_size must lie in [1e-7, 1e-3]");
  }
  Rng rng(derive_seed(seed, "grad-check"));
  const auto draw = NoiseDraw::sample(rng, s.steps(), model.shape().latent_dim);

  std::vector<double> grad(model.parameter_count(), 0.0);
  if (analytic) {
    analytic(batch, model, s, gamma, draw, grad);
  } else {
    triplet_loss_at(batch, model, s, gamma, draw, grad);
  }

  std::vector<std::size_t> indices(model.parameter_count());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  if (max_params > 0 && indices.size() > max_params) {
    for (std::size_t i = 0; i < max_params; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(indices.size() - i));
      std::swap(indices[i], indices[j]);
    }
    indices.resize(max_params);
    std::sort(indices.begin(), indices.end());
  }

  ToyDenoiser probe = model;
  auto& params = probe.parameters();
  GradCheckResult result;
  for (std::size_t idx : indices) {
    const double orig = params[idx];
    params[idx] = orig + step_size;
    const double up = triplet_loss_at(batch, probe, s, gamma, draw).loss;
    params[idx] = orig - step_size;
    const double down = triplet_loss_at(batch, probe, s, gamma, draw).loss;
    params[idx] = orig;
    const double numeric = (up - down) / (2.0 * step_size);
    const double denom = std::max({std::abs(grad[idx]), std::abs(numeric), kGradFloor});
    const double rel = std::abs(grad[idx] - numeric) / denom;
    if (result.checked == 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = idx;
    }
    ++result.checked;
  }
  return result;
}

AdamW::AdamW(AdamWConfig cfg, double learning_rate, std::size_t n)
    : cfg_(cfg), lr_(learning_rate), m_(n, 0.0), v_(n, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer state does not match the parameter count");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= lr_ * cfg_.weight_decay * params[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
  }
}

TripletBatch sample_batch(const TrainingItem& item, Rng& rng) {
  if (item.positives.empty()) throw Error(ErrorCode::kInvalidArgument, "item has no positives", item.id);
  std::vector<const std::vector<LatentImage>*> groups;
  for (const auto& g : item.negatives) {
    if (!g.empty()) groups.push_back(&g);
  }
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "item has no negatives", item.id);
  TripletBatch b;
  b.positive = item.positives[rng.uniform_index(item.positives.size())];
  const auto& group = *groups[rng.uniform_index(groups.size())];
  b.negative = group[rng.uniform_index(group.size())];
  b.condition = item.condition;
  return b;
}

std::string trace_csv(const std::vector<StepRecord>& trace) {
  std::string out = "step,stage,epoch,loss,loss_pos,loss_neg,gamma\n";
  for (const auto& r : trace) {
    out += std::to_string(r.step) + ',' + std::to_string(r.stage) + ',' + std::to_string(r.epoch) + ',' +
           format_real(r.loss) + ',' + format_real(r.loss_pos) + ',' + format_real(r.loss_neg) + ',' +
           format_real(r.gamma) + '\n';
  }
  return out;
}

json Checkpoint::to_json() const {
  return {{"format", "affordlab.checkpoint"},
          {"version", kVersion},
          {"stage", stage},
          {"step", step},
          {"config_hash", config_hash},
          {"shape", shape.to_json()},
          {"parameters", parameters}};
}

Checkpoint Checkpoint::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "affordlab.checkpoint") {
      throw Error(ErrorCode::kParseError, "not a checkpoint file");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::kParseError, "unsupported checkpoint version " + j.at("version").dump());
    }
    Checkpoint c;
    c.stage = j.at("stage").get<int>();
    c.step = j.at("step").get<std::size_t>();
    c.config_hash = j.at("config_hash").get<std::string>();
    c.shape = DenoiserShape::from_json(j.at("shape"));
    c.parameters = j.at("parameters").get<std::vector<double>>();
    if (c.parameters.size() != c.shape.parameter_count()) {
      throw Error(ErrorCode::kParseError, "checkpoint parameter count does not match its shape");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed checkpoint: ") + e.what());
  }
}

void Checkpoint::save(const std::string& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

Checkpoint Checkpoint::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed checkpoint: ") + e.what(), path);
  }
  return from_json(j);
}

TrainResult train_curriculum(const std::array<StageData, 3>& stages, const TrainConfig& cfg) {
  cfg.check();
  for (const auto& st : stages) {
    if (st.items.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "curriculum stage " + std::to_string(st.index) + " is empty");
    }
  }
  const auto schedule = cfg.schedule();
  ToyDenoiser model(cfg.shape, derive_seed(cfg.seed, "init"));
  AdamW opt(cfg.optimizer, cfg.learning_rate, model.parameter_count());
  Rng order_rng(derive_seed(cfg.seed, "order"));
  Rng sample_rng(derive_seed(cfg.seed, "sample"));
  Rng noise_rng(derive_seed(cfg.seed, "noise"));
  const std::string config_hash = cfg.hash();

  TrainResult result;
  std::vector<double> grad(model.parameter_count());
  std::size_t step = 0;

  auto run_step = [&](const TrainingItem& item, int stage, std::size_t epoch) {
    const auto batch = sample_batch(item, sample_rng);
    std::fill(grad.begin(), grad.end(), 0.0);
    const auto terms = triplet_loss(batch, model, schedule, cfg.gamma, noise_rng, grad);
    ++step;
    if (!std::isfinite(terms.loss) || !all_finite(grad)) {
      throw Error(ErrorCode::kNonFiniteLoss, "non-finite loss at step " + std::to_string(step),
                  "step=" + std::to_string(step));
    }
    opt.step(model.parameters(), grad);
    result.trace.push_back({step, stage, epoch, terms.loss, terms.loss_pos, terms.loss_neg, cfg.gamma});
  };
  auto checkpoint = [&](int stage) {
    result.checkpoints.push_back({stage, step, config_hash, cfg.shape, model.parameters()});
  };

  if (!cfg.shuffled) {
    for (const auto& st : stages) {
      std::vector<std::size_t> order(st.items.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t e = 1; e <= cfg.epochs_per_stage; ++e) {
        order_rng.shuffle(order);
        for (std::size_t i : order) run_step(st.items[i], st.index, e);
      }
      checkpoint(st.index);
    }
  } else {
    std::vector<const TrainingItem*> pool;
    std::array<std::size_t, 3> boundaries{};
    std::size_t acc = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      for (const auto& item : stages[k].items) pool.push_back(&item);
      acc += stages[k].items.size() * cfg.epochs_per_stage;
      boundaries[k] = acc;
    }
    std::size_t next = 0;
    for (std::size_t e = 1; e <= cfg.epochs_per_stage; ++e) {
      order_rng.shuffle(pool);
      for (const auto* item : pool) {
        run_step(*item, 0, e);
        while (next < 3 && step == boundaries[next]) checkpoint(stages[next++].index);
      }
    }
  }
  result.parameters = model.parameters();
  return result;
}

std::optional<std::size_t> steps_to_threshold(const std::vector<StepRecord>& trace, double threshold,
                                              double smoothing) {
  double ema = 0.0;
  bool first = true;
  for (const auto& r : trace) {
    ema = first ? r.loss_pos : (1.0 - smoothing) * ema + smoothing * r.loss_pos;
    first = false;
    if (ema <= threshold) return r.step;
  }
  return std::nullopt;
}

double mean_negative_distance(const ToyDenoiser& model, const TripletBatch& batch, const NoiseSchedule& s,
                              std::size_t n_draws, std::uint64_t seed) {
  if (n_draws == 0) throw Error(ErrorCode::kInvalidArgument, "n_draws must be positive");
  Rng rng(derive_seed(seed, "eval"));
  double sum = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const auto terms = triplet_loss(batch, model, s, 0.0, rng);
    sum += std::sqrt(squared_distance(terms.i_hat.values, batch.negative.values));
  }
  return sum / static_cast<double>(n_draws);
}

LatentImage latent_from_text(std::string_view text, std::size_t dim, std::uint64_t seed) {
  LatentImage out{std::vector<double>(dim, 0.0)};
  const auto toks = tokens_of(text);
  if (toks.empty()) return out;
  for (const auto& tok : toks) {
    Rng rng(derive_seed(seed, tok));
    for (auto& v : out.values) v += rng.normal();
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(toks.size()));
  for (auto& v : out.values) v = std::clamp(v * scale, -kLatentBound, kLatentBound);
  return out;
}

std::vector<double> condition_vector(std::span<const std::string> affordances, std::size_t dim,
                                     std::uint64_t seed) {
  std::vector<double> out(dim, 0.0);
  if (affordances.empty()) return out;
  const auto cseed = derive_seed(seed, "condition");
  for (const auto& name : affordances) {
    const auto v = latent_from_text(name, dim, cseed);
    for (std::size_t k = 0; k < dim; ++k) out[k] += v.values[k];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(affordances.size()));
  for (auto& v : out) v *= scale;
  return out;
}

std::array<StageData, 3> stage_data_from_examples(const std::vector<TrainingExample>& examples,
                                                  const DenoiserShape& shape, std::uint64_t seed,
                                                  StageBuildReport* report) {
  std::array<StageData, 3> stages;
  for (int k = 0; k < 3; ++k) stages[k].index = k + 1;
  StageBuildReport rep;
  const auto lseed = derive_seed(seed, "latent");
  for (const auto& ex : examples) {
    if (ex.failed() || ex.positives.empty() || ex.stage < 1 || ex.stage > 3) {
      ++rep.skipped;
      continue;
    }
    std::map<std::string, std::string> caption_of;
    for (const auto& c : ex.candidates) caption_of.emplace(c.image.handle, c.caption);
    TrainingItem item;
    item.id = ex.pair.a.value + "|" + ex.pair.b.value;
    for (const auto& ref : ex.positives) {
      const auto it = caption_of.find(ref.handle);
      item.positives.push_back(latent_from_text(it != caption_of.end() ? it->second : ref.handle,
                                                shape.latent_dim, lseed));
    }
    for (const auto& [name, refs] : ex.negatives) {
      if (refs.empty()) continue;
      std::vector<LatentImage> group;
      for (const auto& ref : refs) group.push_back(latent_from_text(ref.handle, shape.latent_dim, lseed));
      item.negatives.push_back(std::move(group));
    }
    if (item.negatives.empty()) {
      ++rep.skipped;
      continue;
    }
    item.condition = condition_vector(ex.constraints.positive, shape.cond_dim, seed);
    stages[static_cast<std::size_t>(ex.stage - 1)].items.push_back(std::move(item));
    ++rep.used;
  }
  if (report != nullptr) *report = rep;
  return stages;
}

std::array<StageData, 3> make_toy_task(const ToyTaskSpec& spec, std::uint64_t seed) {
  const std::size_t na = spec.n_affordances;
  if (na < 2 || spec.n_pairs > na * (na - 1) / 2 || spec.n_pairs < 3 || spec.positives_per_pair == 0 ||
      spec.negatives_per_item == 0) {
    throw Error(ErrorCode::kInvalidArgument, "toy task spec is not satisfiable");
  }
  const std::size_t dim = spec.shape.latent_dim;
  Rng rng(derive_seed(seed, "toy-task"));
  std::vector<std::vector<double>> base(na, std::vector<double>(dim));
  std::vector<std::vector<double>> cond(na, std::vector<double>(spec.shape.cond_dim));
  for (auto& v : base) {
    for (auto& x : v) x = rng.normal();
  }
  for (auto& v : cond) {
    for (auto& x : v) x = rng.normal();
  }
  auto id_of = [](std::size_t i) {
    std::string s = std::to_string(i);
    return "a" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
  };

  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = i + 1; j < na; ++j) all.emplace_back(i, j);
  }
  rng.shuffle(all);
  all.resize(spec.n_pairs);

  std::vector<AffordancePair> pairs;
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> index_of;
  for (auto [i, j] : all) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      dot += base[i][k] * base[j][k];
      ni += base[i][k] * base[i][k];
      nj += base[j][k] * base[j][k];
    }
    const double prox = 0.5 * (1.0 + dot / std::sqrt(ni * nj));
    auto p = AffordancePair::make(AffordanceId{id_of(i)}, AffordanceId{id_of(j)}, prox);
    index_of[p.key()] = {i, j};
    pairs.push_back(p);
  }
  double lo = pairs.front().proximity, hi = lo;
  for (const auto& p : pairs) {
    lo = std::min(lo, p.proximity);
    hi = std::max(hi, p.proximity);
  }

  const auto split = split_curriculum(pairs);
  std::array<StageData, 3> stages;
  auto noisy = [&](const std::vector<double>& center, double spread) {
    LatentImage img{center};
    for (auto& x : img.values) x = std::clamp(x + spread * rng.normal(), -kLatentBound, kLatentBound);
    return img;
  };
  for (std::size_t k = 0; k < 3; ++k) {
    stages[k].index = split[k].index;
    for (const auto& p : split[k].pairs) {
      const auto [i, j] = index_of.at(p.key());
      const double distance = hi > lo ? (hi - p.proximity) / (hi - lo) : 0.0;
      const double spread = spec.base_spread + spec.distance_spread * distance;
      TrainingItem item;
      item.id = p.a.value + "|" + p.b.value;
      std::vector<double> center(dim);
      for (std::size_t d = 0; d < dim; ++d) center[d] = 0.5 * (base[i][d] + base[j][d]);
      for (std::size_t n = 0; n < spec.positives_per_pair; ++n) item.positives.push_back(noisy(center, spread));
      for (std::size_t src : {i, j}) {
        std::vector<LatentImage> group;
        for (std::size_t n = 0; n < spec.negatives_per_item; ++n) group.push_back(noisy(base[src], 0.1));
        item.negatives.push_back(std::move(group));
      }
      item.condition.resize(spec.shape.cond_dim);
      for (std::size_t d = 0; d < item.condition.size(); ++d) item.condition[d] = cond[i][d] + cond[j][d];
      stages[k].items.push_back(std::move(item));
    }
  }
  return stages;
}

}  // namespace affordlab
