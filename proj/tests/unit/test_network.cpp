#include <cmath>
#include <cstring>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "impinn/network.hpp"

using namespace impinn;
using namespace impinn::network;

namespace {

NetworkConfig small(int m = 8, int width = 16, int depth = 2) {
  NetworkConfig c;
  c.fourier_features = m;
  c.width = width;
  c.depth = depth;
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Embedding, ZeroFrequencies) {
  const auto e = make_embedding(5, 0.0, 1);
  const auto f = embed(e, {0.3, 0.1, 0.9});
  ASSERT_EQ(f.size(), 10u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(f[i], 1.0);
    EXPECT_EQ(f[5 + i], 0.0);
  }
}

TEST(Embedding, FeaturePairsOnUnitCircle) {
  const auto e = make_embedding(64, 10.0, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    const auto f = embed(e, {unit(rng), unit(rng), unit(rng)});
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(f[i] * f[i] + f[64 + i] * f[64 + i], 1.0, 1e-12);
  }
}

TEST(Embedding, SingleFeature) {
  auto e = make_embedding(1, 1.0, 1);
  e.B = {1.0, 0.0, 0.0};
  const auto f = embed(e, {0.25, 0.7, 0.3});
  EXPECT_NEAR(f[0], 0.0, 1e-15);
  EXPECT_NEAR(f[1], 1.0, 1e-15);
}

TEST(Embedding, DeterministicAndScaled) {
  const auto a = make_embedding(128, 10.0, 1234), b = make_embedding(128, 10.0, 1234);
  EXPECT_EQ(a.B, b.B);
  double sq = 0.0;
  for (double x : a.B) sq += x * x;
  EXPECT_NEAR(std::sqrt(sq / a.B.size()), 10.0, 1.5);
}

TEST(Params, DefaultCount) {
  EXPECT_EQ(count_params(NetworkConfig{}), 82690u);
  EXPECT_EQ(init_params(NetworkConfig{}).size(), 82690u);
}

TEST(Params, CountFormulaOtherShapes) {
  // (2m -> w) + (d - 1)(w -> w) + (w -> 2)
  EXPECT_EQ(count_params(small(1, 1, 1)), 2u * 1 + 1 + 1 * 2 + 2);
  EXPECT_EQ(count_params(small(64, 64, 3)), 128u * 64 + 64 + 2 * (64 * 64 + 64) + 64 * 2 + 2);
  EXPECT_EQ(count_params(small(10, 7, 5)), 20u * 7 + 7 + 4 * (7 * 7 + 7) + 7 * 2 + 2);
}

TEST(Params, XavierVarianceAndZeroBias) {
  const auto p = init_params(NetworkConfig{});
  const auto& l = p.layers.front();
  ASSERT_EQ(l.in, 256);
  ASSERT_EQ(l.out, 128);
  double sum = 0.0, sq = 0.0;
  const std::size_t n = 256 * 128;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = p.theta[l.weight_offset + i];
    sum += w;
    sq += w * w;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  const double expected = (6.0 / (256 + 128)) / 3.0;
  EXPECT_NEAR(var / expected, 1.0, 0.2);
  for (const auto& layer : p.layers)
    for (int k = 0; k < layer.out; ++k) EXPECT_EQ(p.theta[layer.bias_offset + k], 0.0);
}

TEST(Params, SeedDeterminism) {
  EXPECT_EQ(init_params(small()).theta, init_params(small()).theta);
  auto other = small();
  other.init_seed = 43;
  EXPECT_NE(init_params(small()).theta, init_params(other).theta);
}

TEST(Params, RejectsBadShape) {
  EXPECT_THROW(zero_params(small(8, 0, 2)), Error);
  EXPECT_THROW(make_embedding(0, 1.0, 1), Error);
}

TEST(Forward, DeadNetworkIsLn2) {
  const auto cfg = small();
  const auto p = zero_params(cfg);
  const auto e = make_embedding(cfg);
  const auto y = forward(p, e, {0.2, 0.4, 0.6});
  EXPECT_DOUBLE_EQ(y.U, std::log(2.0));
  EXPECT_DOUBLE_EQ(y.V, std::log(2.0));
  const auto j = forward_jet(p, e, {0.2, 0.4, 0.6});
  for (int i = 0; i < 3; ++i) EXPECT_EQ(j.U.grad[i], 0.0);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(j.V.hess[k], 0.0);
}

TEST(Forward, RepeatableAndMatchesJetValue) {
  const auto cfg = small(16, 32, 3);
  const auto p = init_params(cfg);
  const auto e = make_embedding(cfg);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < 100; ++n) {
    const Point3 x{unit(rng), unit(rng), unit(rng)};
    const auto a = forward(p, e, x), b = forward(p, e, x);
    const auto j = forward_jet(p, e, x);
    EXPECT_TRUE(same_bits(a.U, b.U));
    EXPECT_TRUE(same_bits(a.U, j.U.value));
    EXPECT_TRUE(same_bits(a.V, j.V.value));
  }
}

TEST(Forward, LipschitzBound) {
  const auto cfg = small(16, 24, 3);
  const auto p = init_params(cfg);
  const auto e = make_embedding(cfg);
  // |d gamma / dx| <= 2 pi |B|_2 per cos/sin pair stacked, tanh and softplus are 1-Lipschitz.
  Eigen::MatrixXd B = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(e.B.data(), e.m, 3);
  double L = 2.0 * std::numbers::pi * B.jacobiSvd().singularValues()(0);
  for (const auto& l : p.layers) {
    Eigen::MatrixXd W = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        p.theta.data() + l.weight_offset, l.out, l.in);
    L *= W.jacobiSvd().singularValues()(0);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0), small_step(-1e-3, 1e-3);
  for (int n = 0; n < 100; ++n) {
    const Point3 x{unit(rng), unit(rng), unit(rng)};
    const Point3 y{x[0] + small_step(rng), x[1] + small_step(rng), x[2] + small_step(rng)};
    const double d = std::sqrt((x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]) +
                               (x[2] - y[2]) * (x[2] - y[2]));
    const auto fx = forward(p, e, x), fy = forward(p, e, y);
    EXPECT_LE(std::hypot(fx.U - fy.U, fx.V - fy.V), L * d * (1 + 1e-12));
  }
}

TEST(Forward, PositiveOutputs) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cfg = small(8, 16, 2);
    cfg.init_seed = seed;
    cfg.embedding_seed = seed + 100;
    auto p = init_params(cfg);
    for (double& t : p.theta) t *= 5.0;
    const auto e = make_embedding(cfg);
    for (int n = 0; n < 50; ++n) {
      const auto y = forward(p, e, {wide(rng), wide(rng), wide(rng)});
      EXPECT_GT(y.U, 0.0);
      EXPECT_GT(y.V, 0.0);
    }
  }
}

TEST(ForwardJet, TimeDerivativeMatchesFiniteDifference) {
  NetworkConfig cfg;
  cfg.sigma_scale = 2.0;
  const auto p = init_params(cfg);
  const auto e = make_embedding(cfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double eps = 1e-4;
  int checked = 0;
  for (int n = 0; n < 100; ++n) {
    const Point3 x{unit(rng), unit(rng), unit(rng)};
    const auto j = forward_jet(p, e, x);
    auto central = [&](double s) {
      return (forward(p, e, {x[0], x[1], x[2] + s}).U - forward(p, e, {x[0], x[1], x[2] - s}).U) / (2 * s);
    };
    const double fd = (4 * central(eps / 2) - central(eps)) / 3;
    if (std::abs(j.U.grad[2]) < 1e-2) continue;
    ++checked;
    EXPECT_LT(std::abs(j.U.grad[2] - fd) / std::abs(j.U.grad[2]), 1e-5);
  }
  EXPECT_GT(checked, 50);
}

TEST(ForwardJet, HessianMatchesCentralDifferences) {
  auto cfg = small(16, 32, 3);
  cfg.sigma_scale = 2.0;
  const auto p = init_params(cfg);
  const auto e = make_embedding(cfg);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double h = 2e-4;
  for (int n = 0; n < 30; ++n) {
    const Point3 x{unit(rng), unit(rng), unit(rng)};
    const auto j = forward_jet(p, e, x);
    auto U = [&](Point3 y) { return forward(p, e, y).U; };
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        auto second = [&](double s) {
          Point3 pp = x, pm = x, mp = x, mm = x;
          pp[a] += s; pp[b] += s;
          pm[a] += s; pm[b] -= s;
          mp[a] -= s; mp[b] += s;
          mm[a] -= s; mm[b] -= s;
          return (U(pp) - U(pm) - U(mp) + U(mm)) / (4 * s * s);
        };
        const double fd = (4 * second(h / 2) - second(h)) / 3;
        if (std::abs(fd) <= 1e-8) continue;
        EXPECT_LT(std::abs(j.U.h(a, b) - fd) / std::abs(fd), 1e-4) << a << b;
      }
    }
  }
}

TEST(Checkpoint, BitExactRoundTrip) {
  const auto cfg = small();
  Checkpoint c{"[network]\nwidth = 16\n", make_embedding(cfg), init_params(cfg)};
  const std::string bytes = serialize_checkpoint(c);
  EXPECT_EQ(bytes.size(), checkpoint_bytes(cfg, c.config_echo.size()));
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.config_echo, c.config_echo);
  EXPECT_EQ(back.embedding.seed, c.embedding.seed);
  EXPECT_EQ(back.embedding.B, c.embedding.B);
  EXPECT_EQ(back.params.theta, c.params.theta);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, TruncatedIsAnError) {
  const auto cfg = small();
  Checkpoint c{"x", make_embedding(cfg), init_params(cfg)};
  std::string bytes = serialize_checkpoint(c);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(deserialize_checkpoint(bytes), Error);
}
