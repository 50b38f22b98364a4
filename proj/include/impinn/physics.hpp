#pragma once

// Gray-Scott kinetics on a Monge patch: Laplace-Beltrami of a jet, the two
// residuals, the no-flux boundary residual and the initial condition.
//
// Every residual is templated on the jet scalar so the same expression runs
// on plain doubles and on tape variables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/jet.hpp"

namespace impinn::physics {

using ad::BasicJet2;
using geometry::MetricSample;

struct GrayScottParams {
  double D_u = 2e-5;
  double D_v = 1e-5;
  double F0 = 0.04;
  double k = 0.06;
  double epsilon = 0.25;

  void validate() const {
    if (!(D_u > 0.0) || !(D_v > 0.0)) {
      throw Error(ErrorKind::Validation, "physics.D_u and physics.D_v must be > 0");
    }
    if (!(D_v < D_u)) {
      throw Error(ErrorKind::Validation,
                  "physics.D_v must be < physics.D_u (Turing configuration)");
    }
    if (!(F0 > 0.0) || !(k >= 0.0)) {
      throw Error(ErrorKind::Validation, "physics.F0 must be > 0 and physics.k >= 0");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
      throw Error(ErrorKind::Validation,
                  "physics.epsilon must satisfy 0 <= epsilon < 1 so the feed "
                  "rate stays positive");
    }
  }
};

// F(u, v) = F0 (1 + eps phi(u, v)).
inline double modulated_feed(const GrayScottParams& p, double u, double v) {
  if (!(p.epsilon < 1.0)) {
    throw Error(ErrorKind::Config, "physics.epsilon must be < 1");
  }
  return p.F0 * (1.0 + p.epsilon * geometry::chemical_potential(u, v));
}

// Converts a jet taken w.r.t. (u, v, t/T) into one w.r.t. (u, v, t).
template <class T>
BasicJet2<T> to_physical_time(const BasicJet2<T>& j, double horizon) {
  const double s = 1.0 / horizon;
  BasicJet2<T> r = j;
  r.grad[2] = j.grad[2] * s;
  r.h(0, 2) = j.h(0, 2) * s;
  r.h(1, 2) = j.h(1, 2) * s;
  r.h(2, 2) = j.h(2, 2) * (s * s);
  return r;
}

// g^{ij} psi_ij + |g|^{-1/2} d_i(sqrt|g| g^{ij}) psi_j over the (u, v) block.
template <class T>
T laplace_beltrami(const BasicJet2<T>& psi, const MetricSample& m) {
  const auto& gi = m.g_inv;
  T second = gi[0][0] * psi.h(0, 0) + (2.0 * gi[0][1]) * psi.h(0, 1) +
             gi[1][1] * psi.h(1, 1);
  const double inv_sqrt = 1.0 / m.sqrt_det_g;
  T first = (inv_sqrt * m.divergence_coeff(0)) * psi.grad[0] +
            (inv_sqrt * m.divergence_coeff(1)) * psi.grad[1];
  return second + first;
}

template <class T>
struct ResidualPair {
  T r_U{};
  T r_V{};
};

// Residuals of the reaction-diffusion pair; jets are in physical time.
template <class T>
ResidualPair<T> gray_scott_residual(const BasicJet2<T>& U, const BasicJet2<T>& V,
                                    const MetricSample& m,
                                    const GrayScottParams& p, double feed) {
  const T uvv = U.value * V.value * V.value;
  ResidualPair<T> r;
  r.r_U = U.grad[2] - p.D_u * laplace_beltrami(U, m) + uvv -
          feed * (1.0 - U.value);
  r.r_V = V.grad[2] - p.D_v * laplace_beltrami(V, m) - uvv +
          (feed + p.k) * V.value;
  return r;
}

template <class T>
ResidualPair<T> gray_scott_residual(const BasicJet2<T>& U, const BasicJet2<T>& V,
                                    const MetricSample& m,
                                    const GrayScottParams& p, double u,
                                    double v) {
  return gray_scott_residual(U, V, m, p, modulated_feed(p, u, v));
}

// Net source of U inside the mass balance: D_u lap U - U V^2 + F (1 - U).
template <class T>
T mass_flux_density(const BasicJet2<T>& U, const BasicJet2<T>& V,
                    const MetricSample& m, const GrayScottParams& p,
                    double feed) {
  return p.D_u * laplace_beltrami(U, m) - U.value * V.value * V.value +
         feed * (1.0 - U.value);
}

template <class T>
T mass_flux_density_v(const BasicJet2<T>& U, const BasicJet2<T>& V,
                      const MetricSample& m, const GrayScottParams& p,
                      double feed) {
  return p.D_v * laplace_beltrami(V, m) + U.value * V.value * V.value -
         (feed + p.k) * V.value;
}

enum class Side { Left, Right, Bottom, Top };  // u = 0, u = 1, v = 0, v = 1

inline std::array<double, 2> outward_normal(Side s) {
  switch (s) {
    case Side::Left: return {-1.0, 0.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Bottom: return {0.0, -1.0};
    case Side::Top: return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

// n_i g^{ij} d_j psi.
template <class T>
T normal_flux(const BasicJet2<T>& psi, const MetricSample& m, Side side) {
  const auto n = outward_normal(side);
  const double c0 = n[0] * m.g_inv[0][0] + n[1] * m.g_inv[1][0];
  const double c1 = n[0] * m.g_inv[0][1] + n[1] * m.g_inv[1][1];
  return c0 * psi.grad[0] + c1 * psi.grad[1];
}

template <class T>
ResidualPair<T> bc_residual(const BasicJet2<T>& U, const BasicJet2<T>& V,
                            const MetricSample& m, Side side) {
  return {normal_flux(U, m, side), normal_flux(V, m, side)};
}

// ---- initial condition ------------------------------------------------------

struct InitialConditionSpec {
  double sigma_init = 0.01;
  double cutoff = 16.0;  // cycles per unit
  int n_modes = 128;
  std::uint64_t seed = 11;
  bool seed_square = true;
  double square_size = 0.1;
  double square_U = 0.5;
  double square_V = 0.25;
};

enum class Species { U, V };

// Band-limited perturbation built from Neumann cosine modes
// cos(pi p u) cos(pi q v), so its normal derivative vanishes on every edge.
// Integer (p, q) are drawn with frequency |(p, q)| / 2 inside the cutoff disk
// (cycles per unit) and Gaussian coefficients; the result is scaled to
// spatial standard deviation sigma over the unit square.
class BandLimitedNoise {
 public:
  BandLimitedNoise() = default;
  BandLimitedNoise(double sigma, double cutoff, int n_modes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double half_pi = 0.5 * std::numbers::pi;
    for (int i = 0; i < n_modes; ++i) {
      const double r = cutoff * std::sqrt(unit(rng));
      const double a = half_pi * unit(rng);
      const int p = static_cast<int>(std::lround(2.0 * r * std::cos(a)));
      const int q = static_cast<int>(std::lround(2.0 * r * std::sin(a)));
      const double c = normal(rng);
      if ((p == 0 && q == 0) || 0.25 * (p * p + q * q) > cutoff * cutoff) continue;
      auto it = std::find_if(modes_.begin(), modes_.end(),
                             [&](const Mode& m) { return m.p == p && m.q == q; });
      if (it == modes_.end()) modes_.push_back({p, q, c});
      else it->coeff += c;
    }
    double var = 0.0;
    for (const Mode& m : modes_) {
      var += m.coeff * m.coeff * ((m.p == 0 || m.q == 0) ? 0.5 : 0.25);
    }
    const double scale = var > 0.0 ? sigma / std::sqrt(var) : 0.0;
    for (Mode& m : modes_) m.coeff *= scale;
  }

  double operator()(double u, double v) const {
    constexpr double pi = std::numbers::pi;
    double s = 0.0;
    for (const Mode& m : modes_) s += m.coeff * std::cos(pi * m.p * u) * std::cos(pi * m.q * v);
    return s;
  }

 private:
  struct Mode {
    int p, q;
    double coeff;
  };
  std::vector<Mode> modes_;
};

class InitialCondition {
 public:
  InitialCondition() : InitialCondition(InitialConditionSpec{}) {}

  explicit InitialCondition(const InitialConditionSpec& spec) : spec_(spec) {
    if (!(spec.sigma_init >= 0.0) || !(spec.cutoff > 0.0) || spec.n_modes < 1 ||
        !(spec.square_size >= 0.0 && spec.square_size <= 1.0)) {
      throw Error(ErrorKind::Validation,
                  "physics.ic_*: sigma_init >= 0, cutoff > 0, n_modes >= 1, "
                  "square_size in [0, 1] required");
    }
    noise_u_ = BandLimitedNoise(spec.sigma_init, spec.cutoff, spec.n_modes, spec.seed);
    noise_v_ = BandLimitedNoise(spec.sigma_init, spec.cutoff, spec.n_modes,
                                spec.seed ^ 0x9e3779b97f4a7c15ULL);
  }

  const InitialConditionSpec& spec() const { return spec_; }

  bool in_seed_square(double u, double v) const {
    const double h = 0.5 * spec_.square_size;
    return spec_.seed_square && std::abs(u - 0.5) <= h && std::abs(v - 0.5) <= h;
  }

  double operator()(Species s, double u, double v) const {
    if (s == Species::U) {
      const double base = in_seed_square(u, v) ? spec_.square_U : 1.0;
      return std::clamp(base - noise_u_(u, v), 0.5, 1.0);
    }
    const double base = in_seed_square(u, v) ? spec_.square_V : 0.0;
    return std::clamp(base + noise_v_(u, v), 0.0, 0.5);
  }

 private:
  InitialConditionSpec spec_;
  BandLimitedNoise noise_u_, noise_v_;
};

inline double initial_field(const InitialCondition& ic, Species s, double u,
                            double v) {
  return ic(s, u, v);
}

// ---- quadrature ------------------------------------------------------------

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Halton (2, 3) points in the unit square, skipping the origin.
inline std::vector<std::array<double, 2>> halton_points(std::size_t n) {
  std::vector<std::array<double, 2>> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {radical_inverse(i + 1, 2), radical_inverse(i + 1, 3)};
  }
  return pts;
}

}  // namespace impinn::physics
