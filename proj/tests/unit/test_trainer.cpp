#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "impinn/trainer.hpp"

using namespace impinn;
using namespace impinn::trainer;

namespace {

network::NetworkConfig tiny() {
  network::NetworkConfig c;
  c.fourier_features = 8;
  c.width = 12;
  c.depth = 2;
  c.sigma_scale = 1.0;
  return c;
}

TrainConfig quick(int epochs) {
  TrainConfig t;
  t.n_epochs = epochs;
  t.collocation_batch = 64;
  t.bc_batch = 32;
  t.ic_batch = 64;
  t.anneal_epochs = epochs / 2;
  t.mass_points = 64;
  t.mass_slices = 2;
  t.chunk_size = 48;
  t.T_horizon = 200.0;
  t.checkpoint_every = 0;
  return t;
}

Problem flat_problem() {
  geometry::HeightFieldSpec s;
  s.wrinkles.clear();
  s.grf.sigma = 0.0;
  s.sag_amplitude = 0.0;
  return {geometry::HeightField(s), physics::GrayScottParams{}, physics::InitialCondition{}, false};
}

}  // namespace

TEST(Sampling, InteriorBoundsAndMean) {
  Rng rng(1);
  const auto pts = sample_batch(BatchKind::Interior, 1000, rng, 200.0);
  double mean = 0.0;
  for (const auto& p : pts) {
    ASSERT_GE(p.u, 0.0);
    ASSERT_LE(p.u, 1.0);
    ASSERT_GE(p.v, 0.0);
    ASSERT_LE(p.v, 1.0);
    ASSERT_GE(p.t, 0.0);
    ASSERT_LE(p.t, 200.0);
    mean += p.u;
  }
  EXPECT_NEAR(mean / 1000, 0.5, 0.05);
}

TEST(Sampling, BoundaryPointsLieOnEdges) {
  Rng rng(2);
  int seen[4] = {0, 0, 0, 0};
  for (const auto& p : sample_batch(BatchKind::Boundary, 500, rng, 1.0)) {
    EXPECT_TRUE(p.u == 0.0 || p.u == 1.0 || p.v == 0.0 || p.v == 1.0);
    ++seen[static_cast<int>(p.side)];
    switch (p.side) {
      case physics::Side::Left: EXPECT_EQ(p.u, 0.0); break;
      case physics::Side::Right: EXPECT_EQ(p.u, 1.0); break;
      case physics::Side::Bottom: EXPECT_EQ(p.v, 0.0); break;
      case physics::Side::Top: EXPECT_EQ(p.v, 1.0); break;
    }
  }
  for (int s : seen) EXPECT_GT(s, 80);
}

TEST(Sampling, InitialAtTimeZeroAndDeterministic) {
  Rng a(3), b(3);
  const auto x = sample_batch(BatchKind::Initial, 100, a, 5.0);
  const auto y = sample_batch(BatchKind::Initial, 100, b, 5.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].t, 0.0);
    EXPECT_EQ(x[i].u, y[i].u);
    EXPECT_EQ(x[i].v, y[i].v);
  }
}

TEST(Anneal, Schedule) {
  TrainConfig c;
  c.anneal_epochs = 5000;
  c.lambda_max = 1.0;
  EXPECT_EQ(anneal_lambda(0, c), 0.0);
  EXPECT_EQ(anneal_lambda(2500, c), 0.5);
  EXPECT_EQ(anneal_lambda(5000, c), 1.0);
  EXPECT_EQ(anneal_lambda(9000, c), 1.0);
  c.lambda_max = 0.3;
  double prev = -1.0;
  for (int e = 0; e < 6000; e += 17) {
    const double l = anneal_lambda(e, c);
    EXPECT_GE(l, prev);
    EXPECT_LE(l, 0.3);
    prev = l;
  }
}

TEST(Adam, ZeroGradientDecaysMoments) {
  std::vector<double> x{1.0, -2.0}, g{0.5, 0.5};
  AdamState s(2);
  adam_step(x, g, s, {});
  const auto m = s.m, v = s.v;
  const auto before = x;
  const std::vector<double> zero{0.0, 0.0};
  adam_step(x, zero, s, {});
  EXPECT_EQ(s.step, 2);
  EXPECT_EQ(s.m[0], 0.9 * m[0]);
  EXPECT_EQ(s.v[0], 0.999 * v[0]);
  // With zero gradient the bias-corrected moment still moves the parameter;
  // only a fresh state leaves it exactly in place.
  AdamState fresh(2);
  auto y = before;
  adam_step(y, zero, fresh, {});
  EXPECT_EQ(y, before);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  // m_hat = g, v_hat = g^2, so the step is lr g / (|g| + eps).
  std::vector<double> x{0.0, 0.0}, g{0.3, -4.0};
  AdamState s(2);
  adam_step(x, g, s, {1e-3, 0.9, 0.999, 1e-8});
  EXPECT_NEAR(x[0], -1e-3 * 0.3 / (0.3 + 1e-8), 1e-18);
  EXPECT_NEAR(x[1], 1e-3 * 4.0 / (4.0 + 1e-8), 1e-18);
}

TEST(Adam, ConstantGradientUnitStep) {
  std::vector<double> x{0.0};
  const std::vector<double> g{2.5};
  AdamState s(1);
  double last = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double before = x[0];
    adam_step(x, g, s, {});
    last = before - x[0];
  }
  EXPECT_NEAR(last / 1e-3, 1.0, 0.01);
  EXPECT_EQ(s.step, 500);
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  std::vector<double> x{1.0, 2.0}, g{0.1, NAN};
  AdamState s(2);
  try {
    adam_step(x, g, s, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteGradient);
  }
  EXPECT_EQ(x, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(s.step, 0);
  EXPECT_EQ(s.m[0], 0.0);
}

TEST(Train, ZeroEpochs) {
  const auto cfg = tiny();
  const auto p = network::init_params(cfg);
  const auto r = train(p, network::make_embedding(cfg), flat_problem(), quick(0));
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.params.theta, p.theta);
}

TEST(Train, HistoryAndCheckpoints) {
  const auto cfg = tiny();
  auto tc = quick(6);
  tc.checkpoint_every = 2;
  std::vector<int> marks;
  TrainHooks h;
  h.on_checkpoint = [&](int e, const network::NetworkParams&) { marks.push_back(e); };
  const auto r = train(network::init_params(cfg), network::make_embedding(cfg), flat_problem(), tc, h);
  ASSERT_EQ(r.history.size(), 6u);
  for (int e = 0; e < 6; ++e) {
    EXPECT_EQ(r.history[e].epoch, e);
    EXPECT_EQ(r.history[e].lambda_mass, anneal_lambda(e, tc));
    EXPECT_EQ(r.history[e].wall_ms, 0.0);
    const auto& x = r.history[e];
    EXPECT_DOUBLE_EQ(x.total, 1.0 * x.l_pde + 10.0 * x.l_bc + 10.0 * x.l_ic + x.lambda_mass * x.l_mass);
  }
  EXPECT_EQ(marks, (std::vector<int>{2, 4, 6}));
}

TEST(Train, DeterministicAcrossThreadCounts) {
  const auto cfg = tiny();
  auto tc = quick(4);
  const auto a = train(network::init_params(cfg), network::make_embedding(cfg), flat_problem(), tc);
  tc.threads = 3;
  const auto b = train(network::init_params(cfg), network::make_embedding(cfg), flat_problem(), tc);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].total, b.history[i].total);
    EXPECT_EQ(a.history[i].l_mass, b.history[i].l_mass);
  }
  EXPECT_EQ(a.params.theta, b.params.theta);
}

TEST(Train, NonFiniteParametersDiverge) {
  const auto cfg = tiny();
  auto p = network::init_params(cfg);
  p.theta[0] = NAN;
  const auto r = train(p, network::make_embedding(cfg), flat_problem(), quick(10));
  EXPECT_TRUE(r.diverged);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_TRUE(std::isnan(r.history.back().total));
}

TEST(Train, LossFallsOnFlatManifold) {
  const auto cfg = tiny();
  auto tc = quick(150);
  tc.lr = 3e-3;
  const auto r = train(network::init_params(cfg), network::make_embedding(cfg), flat_problem(), tc);
  auto smooth = [&](int centre) {
    double s = 0.0;
    int n = 0;
    for (int e = std::max(0, centre - 25); e < std::min(150, centre + 25); ++e, ++n) s += r.history[e].total;
    return s / n;
  };
  EXPECT_LT(smooth(100), smooth(0));
  EXPECT_LT(r.history[100].total, r.history[0].total);
}

TEST(Train, RejectsBadConfig) {
  const auto cfg = tiny();
  auto tc = quick(4);
  tc.lr = 0.0;
  EXPECT_THROW(train(network::init_params(cfg), network::make_embedding(cfg), flat_problem(), tc), Error);
}
