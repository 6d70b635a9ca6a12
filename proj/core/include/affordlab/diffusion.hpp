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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "affordlab/util.hpp"

namespace affordlab {

// A point in the toy model's latent image space.
struct LatentImage {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const LatentImage&) const = default;
};

// Variance schedule indexed by step t in [1, T].
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas);
  static NoiseSchedule linear(std::size_t steps = 50, double beta_start = 1e-4, double beta_end = 0.05);

  std::size_t steps() const { return betas_.size(); }
  double beta(std::size_t t) const { return betas_.at(t - 1); }
  double alpha(std::size_t t) const { return 1.0 - beta(t); }
  double alpha_bar(std::size_t t) const { return alpha_bars_.at(t - 1); }
  const std::vector<double>& betas() const { return betas_; }

  json to_json() const;

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

// sqrt(ab) * x0 + sqrt(1 - ab) * eps
LatentImage forward_diffuse(const LatentImage& x0, double alpha_bar, std::span<const double> eps);
LatentImage forward_diffuse(const LatentImage& x0, std::size_t t, std::span<const double> eps,
                            const NoiseSchedule& s);

// Single-step estimate of x0: (xt - sqrt(1 - ab) * eps_hat) / sqrt(ab).
// Throws DegenerateStep when ab < 1e-8.
LatentImage reconstruct(const LatentImage& xt, double alpha_bar, std::span<const double> eps_hat);
LatentImage reconstruct(const LatentImage& xt, std::size_t t, std::span<const double> eps_hat,
                        const NoiseSchedule& s);

double squared_distance(std::span<const double> x, std::span<const double> y);

// ||I+ - Î||² + ||eps - eps_hat||²
double loss_pos(const LatentImage& i_plus, const LatentImage& i_hat, std::span<const double> eps,
                std::span<const double> eps_hat);
// ||I- - Î||²
double loss_neg(const LatentImage& i_minus, const LatentImage& i_hat);

std::vector<double> timestep_encoding(std::size_t t, std::size_t steps, std::size_t dim);

struct DenoiserShape {
  std::size_t latent_dim = 16;
  std::size_t time_dim = 8;
  std::size_t cond_dim = 16;
  std::size_t hidden = 32;

  std::size_t input_dim() const { return latent_dim + time_dim + cond_dim; }
  std::size_t parameter_count() const {
    return hidden * input_dim() + hidden + latent_dim * hidden + latent_dim;
  }
  json to_json() const;
  static DenoiserShape from_json(const json& j);
  bool operator==(const DenoiserShape&) const = default;
};

// Two-layer noise predictor: eps_hat = W2 tanh(W1 [xt, temb(t), cond] + b1) + b2.
// Parameters live in one flat vector laid out W1, b1, W2, b2 (row-major).
class ToyDenoiser {
 public:
  struct Activations {
    std::vector<double> input;
    std::vector<double> hidden;  // post-tanh
  };

  ToyDenoiser(DenoiserShape shape, std::uint64_t seed);
  ToyDenoiser(DenoiserShape shape, std::vector<double> parameters);

  const DenoiserShape& shape() const { return shape_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  std::vector<double> forward(std::span<const double> xt, std::size_t t, std::size_t steps,
                              std::span<const double> cond, Activations* acts = nullptr) const;

  // Accumulates dL/dθ into grad given dL/d(eps_hat).
  void backward(const Activations& acts, std::span<const double> grad_out,
                std::span<double> grad) const;

 private:
  DenoiserShape shape_;
  std::vector<double> params_;
};

}  // namespace affordlab
