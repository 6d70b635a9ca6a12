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

#include "affordlab/diffusion.hpp"

#include <cmath>

#include "affordlab/error.hpp"
#include "affordlab/rng.hpp"

namespace affordlab {
namespace {

constexpr double kMinAlphaBar = 1e-8;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": length " + std::to_string(a) +
                                                 " does not match " + std::to_string(b));
  }
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw Error(ErrorCode::kInvalidArgument, "noise schedule needs at least one step");
  double prod = 1.0;
  double prev = 0.0;
  for (double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::kInvalidArgument, "betas must lie in (0, 1)");
    if (b < prev) throw Error(ErrorCode::kInvalidArgument, "betas must be non-decreasing");
    prev = b;
    prod *= 1.0 - b;
    alpha_bars_.push_back(prod);
  }
}

NoiseSchedule NoiseSchedule::linear(std::size_t steps, double beta_start, double beta_end) {
  if (steps == 0) throw Error(ErrorCode::kInvalidArgument, "noise schedule needs at least one step");
  std::vector<double> betas(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    betas[i] = beta_start + frac * (beta_end - beta_start);
  }
  return NoiseSchedule(std::move(betas));
}

json NoiseSchedule::to_json() const { return {{"betas", betas_}}; }

LatentImage forward_diffuse(const LatentImage& x0, double alpha_bar, std::span<const double> eps) {
  require_same_length(x0.dim(), eps.size(), "forward_diffuse");
  const double a = std::sqrt(alpha_bar);
  const double s = std::sqrt(1.0 - alpha_bar);
  LatentImage out{std::vector<double>(x0.dim())};
  for (std::size_t k = 0; k < x0.dim(); ++k) out.values[k] = a * x0.values[k] + s * eps[k];
  return out;
}

LatentImage forward_diffuse(const LatentImage& x0, std::size_t t, std::span<const double> eps,
                            const NoiseSchedule& s) {
  if (t < 1 || t > s.steps()) throw Error(ErrorCode::kInvalidArgument, "timestep out of range");
  return forward_diffuse(x0, s.alpha_bar(t), eps);
}

LatentImage reconstruct(const LatentImage& xt, double alpha_bar, std::span<const double> eps_hat) {
  require_same_length(xt.dim(), eps_hat.size(), "reconstruct");
  if (!(alpha_bar >= kMinAlphaBar)) {
    throw Error(ErrorCode::kDegenerateStep, "alpha_bar " + std::to_string(alpha_bar) + " is too small to invert");
  }
  const double a = std::sqrt(alpha_bar);
  const double s = std::sqrt(1.0 - alpha_bar);
  LatentImage out{std::vector<double>(xt.dim())};
  for (std::size_t k = 0; k < xt.dim(); ++k) out.values[k] = (xt.values[k] - s * eps_hat[k]) / a;
  return out;
}

LatentImage reconstruct(const LatentImage& xt, std::size_t t, std::span<const double> eps_hat,
                        const NoiseSchedule& s) {
  if (t < 1 || t > s.steps()) throw Error(ErrorCode::kInvalidArgument, "timestep out of range");
  return reconstruct(xt, s.alpha_bar(t), eps_hat);
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "squared_distance");
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    sum += d * d;
  }
  return sum;
}

double loss_pos(const LatentImage& i_plus, const LatentImage& i_hat, std::span<const double> eps,
                std::span<const double> eps_hat) {
  return squared_distance(i_plus.values, i_hat.values) + squared_distance(eps, eps_hat);
}

double loss_neg(const LatentImage& i_minus, const LatentImage& i_hat) {
  return squared_distance(i_minus.values, i_hat.values);
}

std::vector<double> timestep_encoding(std::size_t t, std::size_t steps, std::size_t dim) {
  std::vector<double> out(dim);
  const double pos = static_cast<double>(t) / static_cast<double>(steps);
  for (std::size_t k = 0; k < dim; ++k) {
    const double freq = std::pow(2.0, static_cast<double>(k / 2));
    out[k] = (k % 2 == 0) ? std::sin(freq * pos * 3.141592653589793)
                          : std::cos(freq * pos * 3.141592653589793);
  }
  return out;
}

json DenoiserShape::to_json() const {
  return {{"latent_dim", latent_dim}, {"time_dim", time_dim}, {"cond_dim", cond_dim}, {"hidden", hidden}};
}

DenoiserShape DenoiserShape::from_json(const json& j) {
  DenoiserShape s;
  s.latent_dim = j.value("latent_dim", s.latent_dim);
  s.time_dim = j.value("time_dim", s.time_dim);
  s.cond_dim = j.value("cond_dim", s.cond_dim);
  s.hidden = j.value("hidden", s.hidden);
  return s;
}

ToyDenoiser::ToyDenoiser(DenoiserShape shape, std::uint64_t seed) : shape_(shape) {
  if (shape.latent_dim == 0 || shape.hidden == 0) {
    throw Error(ErrorCode::kInvalidArgument, "denoiser dimensions must be positive");
  }
  Rng rng(seed);
  params_.assign(shape.parameter_count(), 0.0);
  const std::size_t in = shape.input_dim();
  const std::size_t w1 = shape.hidden * in;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  for (std::size_t i = 0; i < w1; ++i) params_[i] = s1 * rng.normal();
  const std::size_t w2_begin = w1 + shape.hidden;
  const double s2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (std::size_t i = 0; i < shape.latent_dim * shape.hidden; ++i) params_[w2_begin + i] = s2 * rng.normal();
}

ToyDenoiser::ToyDenoiser(DenoiserShape shape, std::vector<double> parameters)
    : shape_(shape), params_(std::move(parameters)) {
  if (params_.size() != shape_.parameter_count()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter count does not match the denoiser shape");
  }
}

std::vector<double> ToyDenoiser::forward(std::span<const double> xt, std::size_t t, std::size_t steps,
                                         std::span<const double> cond, Activations* acts) const {
  require_same_length(xt.size(), shape_.latent_dim, "denoiser latent input");
  require_same_length(cond.size(), shape_.cond_dim, "denoiser condition");
  const std::size_t in = shape_.input_dim();
  const std::size_t hid = shape_.hidden;
  const std::size_t out_dim = shape_.latent_dim;

  std::vector<double> input;
  input.reserve(in);
  input.insert(input.end(), xt.begin(), xt.end());
  const auto temb = timestep_encoding(t, steps, shape_.time_dim);
  input.insert(input.end(), temb.begin(), temb.end());
  input.insert(input.end(), cond.begin(), cond.end());

  const double* w1 = params_.data();
  const double* b1 = w1 + hid * in;
  const double* w2 = b1 + hid;
  const double* b2 = w2 + out_dim * hid;

  std::vector<double> hidden(hid);
  for (std::size_t h = 0; h < hid; ++h) {
    double z = b1[h];
    for (std::size_t i = 0; i < in; ++i) z += w1[h * in + i] * input[i];
    hidden[h] = std::tanh(z);
  }
  std::vector<double> out(out_dim);
  for (std::size_t d = 0; d < out_dim; ++d) {
    double z = b2[d];
    for (std::size_t h = 0; h < hid; ++h) z += w2[d * hid + h] * hidden[h];
    out[d] = z;
  }
  if (acts != nullptr) {
    acts->input = std::move(input);
    acts->hidden = std::move(hidden);
  }
  return out;
}

void ToyDenoiser::backward(const Activations& acts, std::span<const double> grad_out,
                           std::span<double> grad) const {
  require_same_length(grad.size(), params_.size(), "denoiser gradient");
  require_same_length(grad_out.size(), shape_.latent_dim, "denoiser output gradient");
  const std::size_t in = shape_.input_dim();
  const std::size_t hid = shape_.hidden;
  const std::size_t out_dim = shape_.latent_dim;

  const double* w2 = params_.data() + hid * in + hid;
  double* gw1 = grad.data();
  double* gb1 = gw1 + hid * in;
  double* gw2 = gb1 + hid;
  double* gb2 = gw2 + out_dim * hid;

  std::vector<double> grad_hidden(hid, 0.0);
  for (std::size_t d = 0; d < out_dim; ++d) {
    gb2[d] += grad_out[d];
    for (std::size_t h = 0; h < hid; ++h) {
      gw2[d * hid + h] += grad_out[d] * acts.hidden[h];
      grad_hidden[h] += w2[d * hid + h] * grad_out[d];
    }
  }
  for (std::size_t h = 0; h < hid; ++h) {
    const double g = grad_hidden[h] * (1.0 - acts.hidden[h] * acts.hidden[h]);
    gb1[h] += g;
    for (std::size_t i = 0; i < in; ++i) gw1[h * in + i] += g * acts.input[i];
  }
}

}  // namespace affordlab
