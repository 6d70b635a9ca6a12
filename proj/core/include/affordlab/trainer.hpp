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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affordlab/datagen.hpp"
#include "affordlab/diffusion.hpp"
#include "affordlab/rng.hpp"
#include "affordlab/util.hpp"

namespace affordlab {

inline constexpr std::array<double, 3> kLearningRateGrid{5e-6, 1e-6, 5e-7};
inline constexpr std::array<double, 5> kGammaGrid{0.0, 0.2, 0.5, 0.8, 1.0};
// The grid rates barely move a freshly initialized toy denoiser in a few
// thousand steps; toy runs use this instead.
inline constexpr double kToyLearningRate = 1e-2;

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

struct TrainConfig {
  double learning_rate = kLearningRateGrid[0];
  double gamma = 0.5;
  std::size_t epochs_per_stage = 20;
  std::uint64_t seed = 0;
  AdamWConfig optimizer;
  DenoiserShape shape;
  std::size_t diffusion_steps = 50;
  double beta_start = 1e-4;
  double beta_end = 0.05;
  bool shuffled = false;

  void check() const;
  NoiseSchedule schedule() const;
  json to_json() const;
  static TrainConfig from_json(const json& j);
  std::string hash() const;
};

struct TripletBatch {
  LatentImage positive;
  LatentImage negative;
  std::vector<double> condition;
};

// One (t, eps) draw; fixing it makes the loss a deterministic function of θ.
struct NoiseDraw {
  std::size_t t = 1;
  std::vector<double> eps;

  static NoiseDraw sample(Rng& rng, std::size_t steps, std::size_t dim);
};

struct LossTerms {
  double loss = 0.0;
  double loss_pos = 0.0;
  double loss_neg = 0.0;
  std::size_t t = 0;
  LatentImage i_hat;
};

// L = L_pos - gamma * L_neg for a fixed draw. When grad is non-empty,
// dL/dθ is accumulated into it.
LossTerms triplet_loss_at(const TripletBatch& batch, const ToyDenoiser& model, const NoiseSchedule& s,
                          double gamma, const NoiseDraw& draw, std::span<double> grad = {});

LossTerms triplet_loss(const TripletBatch& batch, const ToyDenoiser& model, const NoiseSchedule& s,
                       double gamma, Rng& rng, std::span<double> grad = {});

using GradientFn = std::function<void(const TripletBatch&, const ToyDenoiser&, const NoiseSchedule&, double,
                                      const NoiseDraw&, std::span<double>)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Central differences against the analytic gradient. Above max_params
// parameters a seeded subset is checked. relative error is
// |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(const ToyDenoiser& model, const TripletBatch& batch, const NoiseSchedule& s,
                           double gamma, double step_size = 1e-5, std::uint64_t seed = 0,
                           const GradientFn& analytic = {}, std::size_t max_params = 1024);

class AdamW {
 public:
  AdamW(AdamWConfig cfg, double learning_rate, std::size_t n);
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return t_; }

 private:
  AdamWConfig cfg_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct TrainingItem {
  std::string id;
  std::vector<LatentImage> positives;
  std::vector<std::vector<LatentImage>> negatives;  // grouped by concept
  std::vector<double> condition;
};

struct StageData {
  int index = 0;
  std::vector<TrainingItem> items;
};

// Positive uniform over the item's positives; negative uniform over concepts,
// then over that concept's images.
TripletBatch sample_batch(const TrainingItem& item, Rng& rng);

struct StepRecord {
  std::size_t step = 0;
  int stage = 0;  // 0 in shuffled mode
  std::size_t epoch = 0;
  double loss = 0.0;
  double loss_pos = 0.0;
  double loss_neg = 0.0;
  double gamma = 0.0;
};

std::string trace_csv(const std::vector<StepRecord>& trace);

struct Checkpoint {
  static constexpr int kVersion = 1;

  int stage = 0;
  std::size_t step = 0;
  std::string config_hash;
  DenoiserShape shape;
  std::vector<double> parameters;

  json to_json() const;
  static Checkpoint from_json(const json& j);
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

struct TrainResult {
  std::vector<Checkpoint> checkpoints;  // one per stage, in order
  std::vector<StepRecord> trace;
  std::vector<double> parameters;       // final
};

// Stage 1 -> 2 -> 3, epochs_per_stage each. In shuffled mode all items are
// pooled and the same number of steps is taken over the pooled, reshuffled
// stream; checkpoints land at the same step boundaries.
TrainResult train_curriculum(const std::array<StageData, 3>& stages, const TrainConfig& cfg);

// First step at which the exponential moving average of loss_pos drops
// to or below threshold.
std::optional<std::size_t> steps_to_threshold(const std::vector<StepRecord>& trace, double threshold,
                                              double smoothing = 0.05);

// Mean Euclidean distance between Î and the batch negative over n seeded draws.
double mean_negative_distance(const ToyDenoiser& model, const TripletBatch& batch, const NoiseSchedule& s,
                              std::size_t n_draws, std::uint64_t seed);

// Deterministic hashed bag-of-words projection, clamped to [-3, 3].
LatentImage latent_from_text(std::string_view text, std::size_t dim, std::uint64_t seed);
std::vector<double> condition_vector(std::span<const std::string> affordances, std::size_t dim,
                                     std::uint64_t seed);

struct StageBuildReport {
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// Latents for generated images come from their captions; catalog images from
// their reference string.
std::array<StageData, 3> stage_data_from_examples(const std::vector<TrainingExample>& examples,
                                                  const DenoiserShape& shape, std::uint64_t seed,
                                                  StageBuildReport* report = nullptr);

struct ToyTaskSpec {
  std::size_t n_pairs = 60;
  std::size_t n_affordances = 12;
  std::size_t positives_per_pair = 3;
  std::size_t negatives_per_item = 2;
  double base_spread = 0.05;
  double distance_spread = 1.5;
  DenoiserShape shape;
};

// Synthetic three-stage task where the spread of a pair's positives grows
// as its proximity falls.
std::array<StageData, 3> make_toy_task(const ToyTaskSpec& spec, std::uint64_t seed);

}  // namespace affordlab
