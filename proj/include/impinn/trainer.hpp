#pragma once

// Training loop: fresh batches every epoch, linear warm-up of the mass
// weight, Adam updates, per-epoch history and periodic checkpoints.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/loss.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"

namespace impinn::trainer {

struct TrainConfig {
  int n_epochs = 10000;
  std::size_t collocation_batch = 8192;
  std::size_t bc_batch = 2048;
  std::size_t ic_batch = 2048;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int anneal_epochs = 5000;
  double lambda_max = 1.0;
  double lambda_pde = 1.0;
  double lambda_bc = 10.0;
  double lambda_ic = 10.0;
  std::uint64_t seed = 2024;
  int checkpoint_every = 1000;
  double T_horizon = 2000.0;
  std::size_t mass_points = 4096;
  int mass_slices = 8;
  std::size_t chunk_size = 1024;
  int threads = 1;
  bool record_wall_time = false;

  void validate() const {
    if (n_epochs < 0) throw Error(ErrorKind::Validation, "train.epochs must be >= 0");
    if (collocation_batch < 1 || bc_batch < 1 || ic_batch < 1) {
      throw Error(ErrorKind::Validation, "train.*_batch must be >= 1");
    }
    if (!(lr > 0.0)) throw Error(ErrorKind::Validation, "train.lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
        !(adam_eps > 0.0)) {
      throw Error(ErrorKind::Validation,
                  "train.beta1, train.beta2 must lie in [0, 1) and train.adam_eps > 0");
    }
    if (anneal_epochs < 0 || anneal_epochs > std::max(n_epochs, 0)) {
      throw Error(ErrorKind::Validation,
                  "train.anneal_epochs must satisfy 0 <= anneal_epochs <= epochs");
    }
    if (!(lambda_max >= 0.0) || !(lambda_pde >= 0.0) || !(lambda_bc >= 0.0) ||
        !(lambda_ic >= 0.0)) {
      throw Error(ErrorKind::Validation, "train.lambda_* must be >= 0");
    }
    if (!(T_horizon > 0.0)) throw Error(ErrorKind::Validation, "physics.T must be > 0");
    if (mass_slices < 0) throw Error(ErrorKind::Validation, "train.mass_slices must be >= 0");
    if (chunk_size < 1) throw Error(ErrorKind::Validation, "train.chunk_size must be >= 1");
    if (threads < 1) throw Error(ErrorKind::Validation, "threads must be >= 1");
    if (checkpoint_every < 0) {
      throw Error(ErrorKind::Validation, "train.checkpoint_every must be >= 0");
    }
  }
};

// ---- sampling ---------------------------------------------------------------

enum class BatchKind { Interior, Boundary, Initial };

struct SamplePoint {
  double u = 0.0, v = 0.0, t = 0.0;
  physics::Side side = physics::Side::Left;  // boundary points only
};

using Rng = std::mt19937_64;

inline std::vector<SamplePoint> sample_batch(BatchKind kind, std::size_t n,
                                             Rng& rng, double horizon) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> edge(0, 3);
  std::vector<SamplePoint> pts(n);
  for (SamplePoint& p : pts) {
    switch (kind) {
      case BatchKind::Interior:
        p.u = unit(rng);
        p.v = unit(rng);
        p.t = horizon * unit(rng);
        break;
      case BatchKind::Boundary: {
        p.side = static_cast<physics::Side>(edge(rng));
        const double s = unit(rng);
        switch (p.side) {
          case physics::Side::Left: p.u = 0.0; p.v = s; break;
          case physics::Side::Right: p.u = 1.0; p.v = s; break;
          case physics::Side::Bottom: p.u = s; p.v = 0.0; break;
          case physics::Side::Top: p.u = s; p.v = 1.0; break;
        }
        p.t = horizon * unit(rng);
        break;
      }
      case BatchKind::Initial:
        p.u = unit(rng);
        p.v = unit(rng);
        p.t = 0.0;
        break;
    }
  }
  return pts;
}

// lambda_max * min(1, epoch / anneal_epochs).
inline double anneal_lambda(int epoch, const TrainConfig& c) {
  if (c.anneal_epochs <= 0) return c.lambda_max;
  return c.lambda_max *
         std::min(1.0, static_cast<double>(epoch) / static_cast<double>(c.anneal_epochs));
}

// ---- Adam -------------------------------------------------------------------

struct AdamState {
  std::vector<double> m, v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update. Rejects the whole step, leaving params and
// state untouched, if any gradient entry is non-finite.
inline void adam_step(std::span<double> params, std::span<const double> grads,
                      AdamState& s, const AdamOptions& o) {
  if (grads.size() != params.size() || s.m.size() != params.size()) {
    throw Error(ErrorKind::Validation, "adam_step: size mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw Error(ErrorKind::NonFiniteGradient, "gradient has a non-finite entry");
    }
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = o.beta1 * s.m[i] + (1.0 - o.beta1) * grads[i];
    s.v[i] = o.beta2 * s.v[i] + (1.0 - o.beta2) * grads[i] * grads[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
  }
}

// ---- training loop ----------------------------------------------------------

struct EpochRecord {
  int epoch = 0;
  double l_pde = 0.0, l_bc = 0.0, l_ic = 0.0, l_mass = 0.0;
  double lambda_mass = 0.0;
  double total = 0.0;
  double wall_ms = 0.0;
};

using LossHistory = std::vector<EpochRecord>;

struct Problem {
  geometry::HeightField surface;
  physics::GrayScottParams gs;
  physics::InitialCondition ic;
  bool mass_includes_v = false;
};

struct TrainResult {
  network::NetworkParams params;
  LossHistory history;
  bool diverged = false;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  // Called every checkpoint_every epochs (with the epoch count completed)
  // and once at the end.
  std::function<void(int, const network::NetworkParams&)> on_checkpoint;
};

inline physics::Batches draw_batches(const Problem& prob, const TrainConfig& cfg,
                                     Rng& rng) {
  const double T = cfg.T_horizon;
  physics::Batches b;
  for (const SamplePoint& p : sample_batch(BatchKind::Interior, cfg.collocation_batch, rng, T)) {
    b.interior.push_back(physics::interior_sample(prob.surface, prob.gs, p.u, p.v, p.t / T));
  }
  for (const SamplePoint& p : sample_batch(BatchKind::Boundary, cfg.bc_batch, rng, T)) {
    b.boundary.push_back(physics::boundary_sample(prob.surface, p.side, p.u, p.v, p.t / T));
  }
  for (const SamplePoint& p : sample_batch(BatchKind::Initial, cfg.ic_batch, rng, T)) {
    b.initial.push_back(physics::initial_sample(prob.ic, p.u, p.v));
  }
  // Stratified slice times, one per stratum of [0, 1].
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < cfg.mass_slices; ++s) {
    b.mass_times.push_back((s + unit(rng)) / cfg.mass_slices);
  }
  return b;
}

inline physics::LossEvaluator make_evaluator(const Problem& prob,
                                             const TrainConfig& cfg) {
  return physics::LossEvaluator(
      prob.gs, cfg.T_horizon,
      physics::make_mass_quadrature(prob.surface, prob.gs, cfg.mass_points),
      {cfg.chunk_size, cfg.threads, prob.mass_includes_v});
}

inline TrainResult train(network::NetworkParams params,
                         const network::FourierEmbedding& emb,
                         const Problem& prob, const TrainConfig& cfg,
                         const TrainHooks& hooks = {}) {
  cfg.validate();
  prob.gs.validate();
  TrainResult result;
  const physics::LossEvaluator evaluator = make_evaluator(prob, cfg);
  Rng rng(cfg.seed);
  AdamState adam(params.size());
  const AdamOptions opts{cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps};
  std::vector<double> grad(params.size());
  std::vector<double> last_good = params.theta;
  int bad_in_a_row = 0;

  for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const physics::LossWeights w{cfg.lambda_pde, cfg.lambda_bc, cfg.lambda_ic,
                                 anneal_lambda(epoch, cfg)};
    const physics::Batches batches = draw_batches(prob, cfg, rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lambda_mass = w.mass;
    bool ok = true;
    try {
      const physics::LossBreakdown b = evaluator.evaluate(params, emb, batches, w, grad);
      rec.l_pde = b.l_pde;
      rec.l_bc = b.l_bc;
      rec.l_ic = b.l_ic;
      rec.l_mass = b.l_mass;
      rec.total = b.total;
      last_good = params.theta;
      adam_step(params.theta, grad, adam, opts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteLoss &&
          e.kind() != ErrorKind::NonFiniteGradient) {
        throw;
      }
      ok = false;
      const double nan = std::nan("");
      rec.l_pde = rec.l_bc = rec.l_ic = rec.l_mass = rec.total = nan;
    }
    if (cfg.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    }
    result.history.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);

    bad_in_a_row = ok ? 0 : bad_in_a_row + 1;
    if (bad_in_a_row >= 2) {
      params.theta = last_good;
      result.diverged = true;
      break;
    }
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.n_epochs) {
      hooks.on_checkpoint(epoch + 1, params);
    }
  }
  if (hooks.on_checkpoint) hooks.on_checkpoint(static_cast<int>(result.history.size()), params);
  result.params = std::move(params);
  return result;
}

}  // namespace impinn::trainer
