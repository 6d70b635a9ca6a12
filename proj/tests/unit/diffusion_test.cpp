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

#include <gtest/gtest.h>

#include <cmath>

#include "affordlab/diffusion.hpp"
#include "affordlab/error.hpp"
#include "affordlab/rng.hpp"

namespace affordlab {
namespace {

LatentImage random_latent(Rng& rng, std::size_t dim) {
  LatentImage x{std::vector<double>(dim)};
  for (auto& v : x.values) v = rng.normal();
  return x;
}

TEST(NoiseSchedule, LinearEndpointsAndCumulativeProduct) {
  auto s = NoiseSchedule::linear(50, 1e-4, 0.05);
  EXPECT_EQ(s.steps(), 50u);
  EXPECT_DOUBLE_EQ(s.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(s.beta(50), 0.05);
  double prod = 1.0;
  for (std::size_t t = 1; t <= 50; ++t) {
    prod *= 1.0 - s.beta(t);
    EXPECT_NEAR(s.alpha_bar(t), prod, 1e-15);
    if (t > 1) {
      EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
    }
  }
  EXPECT_THROW(s.alpha_bar(0), std::out_of_range);
}

TEST(NoiseSchedule, RejectsInvalidBetas) {
  EXPECT_THROW(NoiseSchedule({}), Error);
  EXPECT_THROW(NoiseSchedule({0.0, 0.1}), Error);
  EXPECT_THROW(NoiseSchedule({0.2, 0.1}), Error);
  EXPECT_THROW(NoiseSchedule({0.5, 1.0}), Error);
}

TEST(ForwardDiffuse, Limits) {
  LatentImage x0{{1.0, -2.0, 3.5}};
  std::vector<double> eps{0.3, 0.1, -0.7};
  EXPECT_EQ(forward_diffuse(x0, 1.0, eps), x0);
  EXPECT_EQ(forward_diffuse(x0, 0.0, eps).values, eps);
}

TEST(ForwardDiffuse, QuarterAlphaBarByHand) {
  LatentImage x0{{1.0, -2.0, 3.5}};
  std::vector<double> eps{0.3, 0.1, -0.7};
  auto xt = forward_diffuse(x0, 0.25, eps);
  const double r = std::sqrt(0.75);
  EXPECT_DOUBLE_EQ(xt.values[0], 0.5 + r * 0.3);
  EXPECT_DOUBLE_EQ(xt.values[1], -1.0 + r * 0.1);
  EXPECT_DOUBLE_EQ(xt.values[2], 1.75 - r * 0.7);
  EXPECT_THROW(forward_diffuse(x0, 0.25, std::vector<double>{1.0}), Error);
}

TEST(Reconstruct, InvertsForwardDiffusion) {
  Rng rng(4);
  auto s = NoiseSchedule::linear();
  for (std::size_t t : {1u, 10u, 25u, 50u}) {
    auto x0 = random_latent(rng, 16);
    auto eps = random_latent(rng, 16).values;
    auto back = reconstruct(forward_diffuse(x0, t, eps, s), t, eps, s);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(back.values[k], x0.values[k], 1e-10);
  }
}

TEST(Reconstruct, IdentityAndHandValues) {
  LatentImage xt{{0.4, -1.2}};
  EXPECT_EQ(reconstruct(xt, 1.0, std::vector<double>{0.0, 0.0}), xt);
  // alpha_bar 0.64: (xt - 0.6 eps_hat) / 0.8
  auto x = reconstruct(xt, 0.64, std::vector<double>{1.0, -2.0});
  EXPECT_NEAR(x.values[0], (0.4 - 0.6) / 0.8, 1e-15);
  EXPECT_NEAR(x.values[1], (-1.2 + 1.2) / 0.8, 1e-15);
}

TEST(Reconstruct, DegenerateStep) {
  LatentImage xt{{1.0}};
  try {
    reconstruct(xt, 1e-9, std::vector<double>{0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateStep);
  }
  EXPECT_NO_THROW(reconstruct(xt, 1e-8, std::vector<double>{0.0}));
  EXPECT_THROW(reconstruct(xt, 0, std::vector<double>{0.0}, NoiseSchedule::linear()), Error);
}

TEST(Losses, PositiveTerm) {
  LatentImage ip{std::vector<double>(16, 0.25)};
  std::vector<double> eps(16, -0.5);
  EXPECT_EQ(loss_pos(ip, ip, eps, eps), 0.0);
  LatentImage shifted = ip;
  for (auto& v : shifted.values) v += 1.0;
  EXPECT_DOUBLE_EQ(loss_pos(ip, shifted, eps, eps), 16.0);
  LatentImage zero{std::vector<double>(16, 0.0)};
  EXPECT_EQ(loss_pos(zero, zero, zero.values, zero.values), 0.0);
  std::vector<double> eps_hat = eps;
  eps_hat[3] += 2.0;
  EXPECT_DOUBLE_EQ(loss_pos(ip, shifted, eps, eps_hat), 20.0);
}

TEST(Losses, NegativeTerm) {
  LatentImage a{{1.0, 2.0, 3.0}};
  EXPECT_EQ(loss_neg(a, a), 0.0);
  LatentImage b{{1.0, 3.0, 3.0}};
  EXPECT_EQ(loss_neg(a, b), 1.0);
  LatentImage c{{0.5, -1.0, 4.0}};
  EXPECT_DOUBLE_EQ(loss_neg(a, c), 0.25 + 9.0 + 1.0);
}

TEST(TimestepEncoding, SinCosPairs) {
  auto e = timestep_encoding(25, 50, 8);
  ASSERT_EQ(e.size(), 8u);
  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < 8; ++k) {
    const double f = std::pow(2.0, static_cast<double>(k / 2)) * 0.5 * pi;
    EXPECT_NEAR(e[k], k % 2 == 0 ? std::sin(f) : std::cos(f), 1e-15);
  }
}

TEST(DenoiserShape, DefaultParameterCount) {
  DenoiserShape s;
  EXPECT_EQ(s.input_dim(), 40u);
  EXPECT_EQ(s.parameter_count(), 32u * 40 + 32 + 16 * 32 + 16);
  EXPECT_EQ(DenoiserShape::from_json(s.to_json()), s);
}

TEST(ToyDenoiser, InitIsSeededAndFinite) {
  ToyDenoiser a(DenoiserShape{}, 1);
  ToyDenoiser b(DenoiserShape{}, 1);
  ToyDenoiser c(DenoiserShape{}, 2);
  EXPECT_EQ(a.parameters(), b.parameters());
  EXPECT_NE(a.parameters(), c.parameters());
  for (double p : a.parameters()) EXPECT_TRUE(std::isfinite(p));
  EXPECT_THROW(ToyDenoiser(DenoiserShape{}, std::vector<double>(3)), Error);
}

TEST(ToyDenoiser, ForwardMatchesScalarRecomputation) {
  DenoiserShape shape{3, 2, 2, 4};
  std::vector<double> params(shape.parameter_count());
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = 0.05 * static_cast<double>(i % 7) - 0.1;
  ToyDenoiser m(shape, params);
  std::vector<double> xt{0.3, -0.2, 0.9};
  std::vector<double> cond{1.0, -0.5};
  auto out = m.forward(xt, 5, 10, cond);
  const double pi = std::acos(-1.0);
  std::vector<double> in{0.3, -0.2, 0.9, std::sin(0.5 * pi), std::cos(0.5 * pi), 1.0, -0.5};
  std::size_t p = 0;
  std::vector<double> w1(params.begin(), params.begin() + 28);
  p = 28;
  std::vector<double> b1(params.begin() + p, params.begin() + p + 4);
  p += 4;
  std::vector<double> w2(params.begin() + p, params.begin() + p + 12);
  p += 12;
  std::vector<double> b2(params.begin() + p, params.end());
  for (std::size_t d = 0; d < 3; ++d) {
    double z = b2[d];
    for (std::size_t h = 0; h < 4; ++h) {
      double a = b1[h];
      for (std::size_t i = 0; i < 7; ++i) a += w1[h * 7 + i] * in[i];
      z += w2[d * 4 + h] * std::tanh(a);
    }
    EXPECT_NEAR(out[d], z, 1e-14);
  }
}

}  // namespace
}  // namespace affordlab
