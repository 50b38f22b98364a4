#pragma once

// Composite PINN loss over collocation, boundary, initial and mass batches,
// with parameter gradients.
//
// Points are processed in chunks of bounded size, each with its own tape.
// Chunk gradients are summed in chunk order, so results do not depend on the
// number of worker threads. A mass slice whose quadrature spans several chunks
// is handled in two passes: a forward pass fixes the slice integral I, then
// the chunks are differentiated with the linearized seed 2 I.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"
#include "impinn/tape.hpp"

namespace impinn::physics {

using network::Point3;

struct InteriorSample {
  Point3 x{};  // (u, v, t / T)
  MetricSample metric;
  double feed = 0.0;
};

struct BoundarySample {
  Point3 x{};
  MetricSample metric;
  Side side = Side::Left;
};

struct InitialSample {
  Point3 x{};
  double U0 = 1.0;
  double V0 = 0.0;
};

template <geometry::Surface S>
InteriorSample interior_sample(const S& surface, const GrayScottParams& p,
                               double u, double v, double tau) {
  return {{u, v, tau}, geometry::metric_at(surface, u, v), modulated_feed(p, u, v)};
}

template <geometry::Surface S>
BoundarySample boundary_sample(const S& surface, Side side, double u, double v,
                               double tau) {
  return {{u, v, tau}, geometry::metric_at(surface, u, v), side};
}

inline InitialSample initial_sample(const InitialCondition& ic, double u,
                                    double v) {
  return {{u, v, 0.0}, ic(Species::U, u, v), ic(Species::V, u, v)};
}

// Fixed spatial quadrature for the mass balance (Halton points, weight 1/n).
struct MassQuadrature {
  std::vector<InteriorSample> points;
};

template <geometry::Surface S>
MassQuadrature make_mass_quadrature(const S& surface, const GrayScottParams& p,
                                    std::size_t n) {
  MassQuadrature q;
  q.points.reserve(n);
  for (const auto& [u, v] : halton_points(n)) {
    q.points.push_back(interior_sample(surface, p, u, v, 0.0));
  }
  return q;
}

struct Batches {
  std::vector<InteriorSample> interior;
  std::vector<BoundarySample> boundary;
  std::vector<InitialSample> initial;
  std::vector<double> mass_times;  // normalized times of the mass slices
};

struct LossWeights {
  double pde = 1.0;
  double bc = 10.0;
  double ic = 10.0;
  double mass = 0.0;
};

struct LossBreakdown {
  double l_pde = 0.0;
  double l_bc = 0.0;
  double l_ic = 0.0;
  double l_mass = 0.0;
  LossWeights weights;
  double total = 0.0;
};

inline double weighted_total(const LossBreakdown& b) {
  return b.weights.pde * b.l_pde + b.weights.bc * b.l_bc +
         b.weights.ic * b.l_ic + b.weights.mass * b.l_mass;
}

struct EvalOptions {
  std::size_t chunk_size = 1024;
  int threads = 1;
  bool mass_includes_v = false;
};

// Pointwise loss terms, shared by the tape and plain evaluation paths.
namespace terms {

template <class T>
T pde(const BasicJet2<T>& U, const BasicJet2<T>& V, const InteriorSample& s,
      const GrayScottParams& p, double horizon) {
  const auto r = gray_scott_residual(to_physical_time(U, horizon),
                                     to_physical_time(V, horizon), s.metric, p,
                                     s.feed);
  return r.r_U * r.r_U + r.r_V * r.r_V;
}

template <class T>
T bc(const BasicJet2<T>& U, const BasicJet2<T>& V, const BoundarySample& s) {
  const auto r = bc_residual(U, V, s.metric, s.side);
  return r.r_U * r.r_U + r.r_V * r.r_V;
}

template <class T>
T ic(const T& U, const T& V, const InitialSample& s) {
  const T du = U - s.U0, dv = V - s.V0;
  return du * du + dv * dv;
}

// (U_t - source) sqrt|g| at a quadrature point, and the V analogue.
template <class T>
std::array<T, 2> mass(const BasicJet2<T>& U_tau, const BasicJet2<T>& V_tau,
                      const InteriorSample& s, const GrayScottParams& p,
                      double horizon) {
  const auto U = to_physical_time(U_tau, horizon);
  const auto V = to_physical_time(V_tau, horizon);
  const double w = s.metric.sqrt_det_g;
  return {(U.grad[2] - mass_flux_density(U, V, s.metric, p, s.feed)) * w,
          (V.grad[2] - mass_flux_density_v(U, V, s.metric, p, s.feed)) * w};
}

}  // namespace terms

class LossEvaluator {
 public:
  LossEvaluator(GrayScottParams params, double horizon, MassQuadrature quadrature,
                EvalOptions options = {})
      : gs_(params),
        horizon_(horizon),
        quad_(std::move(quadrature)),
        opt_(options) {
    if (!(horizon > 0.0)) {
      throw Error(ErrorKind::Validation, "physics.T must be > 0");
    }
    if (opt_.chunk_size < 1) {
      throw Error(ErrorKind::Validation, "train.chunk_size must be >= 1");
    }
  }

  const MassQuadrature& quadrature() const { return quad_; }
  const GrayScottParams& params() const { return gs_; }
  double horizon() const { return horizon_; }
  const EvalOptions& options() const { return opt_; }

  // Loss components at `net`; when `grad` is non-empty it receives
  // d(total)/d(theta) (overwritten, not accumulated).
  LossBreakdown evaluate(const network::NetworkParams& net,
                         const network::FourierEmbedding& emb,
                         const Batches& batches, const LossWeights& weights,
                         std::span<double> grad = {}) const {
    if (!grad.empty() && grad.size() != net.size()) {
      throw Error(ErrorKind::Validation, "gradient buffer size mismatch");
    }
    const bool want_grad = !grad.empty();
    const std::size_t n_slices = batches.mass_times.size();
    const std::size_t nq = quad_.points.size();
    const bool with_mass = n_slices > 0 && nq > 0;

    std::vector<Chunk> chunks;
    add_chunks(chunks, Kind::Pde, batches.interior.size(), 0,
               want_grad && weights.pde > 0.0);
    add_chunks(chunks, Kind::Bc, batches.boundary.size(), 0,
               want_grad && weights.bc > 0.0);
    add_chunks(chunks, Kind::Ic, batches.initial.size(), 0,
               want_grad && weights.ic > 0.0);
    if (with_mass) {
      for (std::size_t s = 0; s < n_slices; ++s) {
        add_chunks(chunks, Kind::Mass, nq, s, want_grad && weights.mass > 0.0);
      }
    }

    Context ctx{net, emb, batches, weights, n_slices};

    // Pass 1: everything that is not differentiated, plus the slice
    // integrals needed to seed multi-chunk mass slices.
    std::vector<Result> results(chunks.size());
    std::vector<std::size_t> pass1, pass2;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      const Chunk& ch = chunks[c];
      const bool split_slice = ch.kind == Kind::Mass && nq > opt_.chunk_size;
      if (!ch.grad || split_slice) pass1.push_back(c);
      if (ch.grad) pass2.push_back(c);
    }
    run_parallel(pass1, [&](std::size_t c) {
      results[c] = run_plain(chunks[c], ctx);
    });

    std::vector<std::array<double, 2>> slice_sum(n_slices, {0.0, 0.0});
    for (std::size_t c : pass1) {
      if (chunks[c].kind != Kind::Mass) continue;
      slice_sum[chunks[c].slice][0] += results[c].sum[0];
      slice_sum[chunks[c].slice][1] += results[c].sum[1];
    }
    ctx.slice_integral.resize(n_slices);
    for (std::size_t s = 0; s < n_slices; ++s) {
      ctx.slice_integral[s] = {slice_sum[s][0] / static_cast<double>(nq),
                               slice_sum[s][1] / static_cast<double>(nq)};
    }

    // Pass 2: one tape per differentiated chunk.
    std::vector<std::vector<double>> chunk_grads(chunks.size());
    run_parallel(pass2, [&](std::size_t c) {
      chunk_grads[c].assign(net.size(), 0.0);
      const Result r = run_tape(chunks[c], ctx, chunk_grads[c]);
      if (!(chunks[c].kind == Kind::Mass && nq > opt_.chunk_size)) results[c] = r;
    });

    // Ordered reduction.
    LossBreakdown out;
    out.weights = weights;
    std::vector<std::array<double, 2>> mass_sum(n_slices, {0.0, 0.0});
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      const Chunk& ch = chunks[c];
      switch (ch.kind) {
        case Kind::Pde: out.l_pde += results[c].sum[0]; break;
        case Kind::Bc: out.l_bc += results[c].sum[0]; break;
        case Kind::Ic: out.l_ic += results[c].sum[0]; break;
        case Kind::Mass:
          mass_sum[ch.slice][0] += results[c].sum[0];
          mass_sum[ch.slice][1] += results[c].sum[1];
          break;
      }
    }
    out.l_pde = mean(out.l_pde, batches.interior.size());
    out.l_bc = mean(out.l_bc, batches.boundary.size());
    out.l_ic = mean(out.l_ic, batches.initial.size());
    if (with_mass) {
      double m = 0.0;
      for (std::size_t s = 0; s < n_slices; ++s) {
        const double iu = mass_sum[s][0] / static_cast<double>(nq);
        const double iv = mass_sum[s][1] / static_cast<double>(nq);
        m += iu * iu + (opt_.mass_includes_v ? iv * iv : 0.0);
      }
      out.l_mass = m / static_cast<double>(n_slices);
    }
    out.total = weighted_total(out);
    if (!std::isfinite(out.total)) {
      throw Error(ErrorKind::NonFiniteLoss, "loss evaluated to a non-finite value");
    }

    if (want_grad) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        if (chunk_grads[c].empty()) continue;
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += chunk_grads[c][i];
      }
    }
    return out;
  }

 private:
  enum class Kind { Pde, Bc, Ic, Mass };

  struct Chunk {
    Kind kind;
    std::size_t begin, end;
    std::size_t slice;
    bool grad;
  };

  struct Result {
    std::array<double, 2> sum{0.0, 0.0};
  };

  struct Context {
    const network::NetworkParams& net;
    const network::FourierEmbedding& emb;
    const Batches& batches;
    const LossWeights& weights;
    std::size_t n_slices;
    std::vector<std::array<double, 2>> slice_integral{};
  };

  static double mean(double sum, std::size_t n) {
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }

  void add_chunks(std::vector<Chunk>& chunks, Kind kind, std::size_t n,
                  std::size_t slice, bool grad) const {
    for (std::size_t b = 0; b < n; b += opt_.chunk_size) {
      chunks.push_back({kind, b, std::min(n, b + opt_.chunk_size), slice, grad});
    }
  }

  template <class F>
  void run_parallel(const std::vector<std::size_t>& items, F&& fn) const {
    const int workers = std::max(
        1, std::min<int>(opt_.threads, static_cast<int>(items.size())));
    if (workers == 1) {
      for (std::size_t c : items) fn(c);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i; (i = next.fetch_add(1)) < items.size();) fn(items[i]);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
          next = items.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<Point3> chunk_points(const Chunk& ch, const Context& ctx) const {
    std::vector<Point3> pts;
    pts.reserve(ch.end - ch.begin);
    for (std::size_t i = ch.begin; i < ch.end; ++i) {
      switch (ch.kind) {
        case Kind::Pde: pts.push_back(ctx.batches.interior[i].x); break;
        case Kind::Bc: pts.push_back(ctx.batches.boundary[i].x); break;
        case Kind::Ic: pts.push_back(ctx.batches.initial[i].x); break;
        case Kind::Mass: {
          Point3 x = quad_.points[i].x;
          x[2] = ctx.batches.mass_times[ch.slice];
          pts.push_back(x);
          break;
        }
      }
    }
    return pts;
  }

  static int stride_for(Kind k) { return k == Kind::Ic ? 1 : ad::kJetWidth; }

  Result run_plain(const Chunk& ch, const Context& ctx) const {
    const std::vector<Point3> pts = chunk_points(ch, ctx);
    const auto out = network::evaluate_batch(ctx.net, ctx.emb, pts, stride_for(ch.kind));
    Result r;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t k = ch.begin + i;
      switch (ch.kind) {
        case Kind::Pde:
          r.sum[0] += terms::pde(out.jet(0, i), out.jet(1, i),
                                 ctx.batches.interior[k], gs_, horizon_);
          break;
        case Kind::Bc:
          r.sum[0] += terms::bc(out.jet(0, i), out.jet(1, i), ctx.batches.boundary[k]);
          break;
        case Kind::Ic:
          r.sum[0] += terms::ic(out.at(0, i, 0), out.at(1, i, 0),
                                ctx.batches.initial[k]);
          break;
        case Kind::Mass: {
          const auto m = terms::mass(out.jet(0, i), out.jet(1, i), quad_.points[k],
                                     gs_, horizon_);
          r.sum[0] += m[0];
          r.sum[1] += m[1];
          break;
        }
      }
    }
    return r;
  }

  Result run_tape(const Chunk& ch, const Context& ctx, std::vector<double>& grad) const {
    using ad::Var;
    const std::vector<Point3> pts = chunk_points(ch, ctx);
    ad::Tape tape(ctx.net.theta);
    const int out = network::record_forward(tape, ctx.net, ctx.emb, pts,
                                            stride_for(ch.kind));
    Var acc = 0.0, acc_v = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t k = ch.begin + i;
      switch (ch.kind) {
        case Kind::Pde:
          acc += terms::pde(tape.jet(out, 0, i), tape.jet(out, 1, i),
                            ctx.batches.interior[k], gs_, horizon_);
          break;
        case Kind::Bc:
          acc += terms::bc(tape.jet(out, 0, i), tape.jet(out, 1, i),
                           ctx.batches.boundary[k]);
          break;
        case Kind::Ic:
          acc += terms::ic(tape.component(out, 0, i, 0),
                           tape.component(out, 1, i, 0), ctx.batches.initial[k]);
          break;
        case Kind::Mass: {
          const auto m = terms::mass(tape.jet(out, 0, i), tape.jet(out, 1, i),
                                     quad_.points[k], gs_, horizon_);
          acc += m[0];
          if (opt_.mass_includes_v) acc_v += m[1];
          break;
        }
      }
    }
    Result r;
    r.sum = {acc.value(), acc_v.value()};

    std::vector<std::pair<Var, double>> seeds;
    const double nq = static_cast<double>(quad_.points.size());
    switch (ch.kind) {
      case Kind::Pde:
        seeds.emplace_back(acc, ctx.weights.pde / ctx.batches.interior.size());
        break;
      case Kind::Bc:
        seeds.emplace_back(acc, ctx.weights.bc / ctx.batches.boundary.size());
        break;
      case Kind::Ic:
        seeds.emplace_back(acc, ctx.weights.ic / ctx.batches.initial.size());
        break;
      case Kind::Mass: {
        const double scale = ctx.weights.mass / static_cast<double>(ctx.n_slices);
        if (quad_.points.size() <= opt_.chunk_size) {
          // The whole slice is on this tape: differentiate I^2 directly.
          const Var iu = acc * (1.0 / nq);
          seeds.emplace_back(iu * iu, scale);
          if (opt_.mass_includes_v) {
            const Var iv = acc_v * (1.0 / nq);
            seeds.emplace_back(iv * iv, scale);
          }
        } else {
          const auto& I = ctx.slice_integral[ch.slice];
          seeds.emplace_back(acc, scale * 2.0 * I[0] / nq);
          if (opt_.mass_includes_v) seeds.emplace_back(acc_v, scale * 2.0 * I[1] / nq);
        }
        break;
      }
    }
    tape.backward(seeds, grad);
    return r;
  }

  GrayScottParams gs_;
  double horizon_;
  MassQuadrature quad_;
  EvalOptions opt_;
};

// Squared mass-balance defect of the U species at one normalized time.
inline double mass_loss(const network::NetworkParams& net,
                        const network::FourierEmbedding& emb,
                        const MassQuadrature& quad, const GrayScottParams& p,
                        double horizon, double tau) {
  std::vector<Point3> pts;
  pts.reserve(quad.points.size());
  for (const auto& q : quad.points) pts.push_back({q.x[0], q.x[1], tau});
  const auto out = network::evaluate_batch(net, emb, pts, ad::kJetWidth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double m = terms::mass(out.jet(0, i), out.jet(1, i), quad.points[i], p,
                                 horizon)[0];
    if (!std::isfinite(m)) {
      throw Error(ErrorKind::NonFinite, "mass integrand is not finite");
    }
    sum += m;
  }
  const double I = sum / static_cast<double>(pts.size());
  return I * I;
}

}  // namespace impinn::physics
