#pragma once

// Analytic Monge-patch geometry over the unit square. The default surface is a
// wrinkled cloth; metric and curvature come from exact height derivatives.

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "impinn/error.hpp"

namespace impinn::geometry {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct WrinkleMode {
  double amplitude = 0.0;
  double freq_u = 0.0;  // cycles per unit u
  double freq_v = 0.0;  // cycles per unit v
  double phase = 0.0;   // radians
};

struct GrfSpec {
  double sigma = 0.02;
  double correlation_length = 0.08;
  int n_modes = 256;
  std::uint64_t seed = 7;
};

struct HeightFieldSpec {
  std::vector<WrinkleMode> wrinkles = {
      {0.05, 2.0, 3.0, 0.0},
      {0.03, 5.0, 7.0, 1.3},
      {0.02, 9.0, 11.0, 2.1},
  };
  GrfSpec grf{};
  double sag_amplitude = 0.05;
};

// z and its partial derivatives up to third order. Entries above the
// requested order are left at zero.
struct HeightJet {
  double z = 0.0;
  double zu = 0.0, zv = 0.0;
  double zuu = 0.0, zuv = 0.0, zvv = 0.0;
  double zuuu = 0.0, zuuv = 0.0, zuvv = 0.0, zvvv = 0.0;

  HeightJet& operator+=(const HeightJet& o) {
    z += o.z;
    zu += o.zu;
    zv += o.zv;
    zuu += o.zuu;
    zuv += o.zuv;
    zvv += o.zvv;
    zuuu += o.zuuu;
    zuuv += o.zuuv;
    zuvv += o.zuvv;
    zvvv += o.zvvv;
    return *this;
  }

  // Mixed partial d^(i+j) z / du^i dv^j for i + j <= 3.
  double partial(int i, int j) const {
    switch (i * 4 + j) {
      case 0: return z;
      case 4: return zu;
      case 1: return zv;
      case 8: return zuu;
      case 5: return zuv;
      case 2: return zvv;
      case 12: return zuuu;
      case 9: return zuuv;
      case 6: return zuvv;
      case 3: return zvvv;
      default: return 0.0;
    }
  }
};

// Anything that yields an analytic height jet at (u, v).
template <class S>
concept Surface = requires(const S& s, double u, double v, int order) {
  { s.height(u, v, order) } -> std::same_as<HeightJet>;
};

namespace detail {

// Derivatives 0..3 of sin(a x + phase) and cos(a x + phase).
inline std::array<double, 4> sin_derivs(double a, double x, double phase) {
  const double s = std::sin(a * x + phase);
  const double c = std::cos(a * x + phase);
  return {s, a * c, -a * a * s, -a * a * a * c};
}

inline std::array<double, 4> cos_derivs(double a, double x, double phase) {
  const double s = std::sin(a * x + phase);
  const double c = std::cos(a * x + phase);
  return {c, -a * s, -a * a * c, a * a * a * s};
}

// Separable term amp * f(u) * g(v).
inline HeightJet separable(double amp, const std::array<double, 4>& f,
                           const std::array<double, 4>& g, int order) {
  HeightJet j;
  j.z = amp * f[0] * g[0];
  if (order >= 1) {
    j.zu = amp * f[1] * g[0];
    j.zv = amp * f[0] * g[1];
  }
  if (order >= 2) {
    j.zuu = amp * f[2] * g[0];
    j.zuv = amp * f[1] * g[1];
    j.zvv = amp * f[0] * g[2];
  }
  if (order >= 3) {
    j.zuuu = amp * f[3] * g[0];
    j.zuuv = amp * f[2] * g[1];
    j.zuvv = amp * f[1] * g[2];
    j.zvvv = amp * f[0] * g[3];
  }
  return j;
}

}  // namespace detail

// Random-Fourier-feature realization of a squared-exponential Gaussian
// field: G = sigma * sqrt(2/n) * sum cos(k_m . x + psi_m), k_m ~ N(0, I/l^2).
class GaussianRandomField {
 public:
  GaussianRandomField() = default;

  explicit GaussianRandomField(const GrfSpec& spec) : spec_(spec) {
    if (!(spec.sigma >= 0.0) || !(spec.correlation_length > 0.0) ||
        spec.n_modes < 1) {
      throw Error(ErrorKind::Validation,
                  "manifold.grf: require sigma >= 0, correlation_length > 0, "
                  "n_modes >= 1");
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0,
                                            1.0 / spec.correlation_length);
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    modes_.reserve(static_cast<std::size_t>(spec.n_modes));
    for (int m = 0; m < spec.n_modes; ++m) {
      Mode mode;
      mode.ku = normal(rng);
      mode.kv = normal(rng);
      mode.phase = uniform(rng);
      modes_.push_back(mode);
    }
    scale_ = spec.sigma * std::sqrt(2.0 / spec.n_modes);
  }

  const GrfSpec& spec() const { return spec_; }

  HeightJet operator()(double u, double v, int order) const {
    HeightJet j;
    if (scale_ == 0.0) return j;
    for (const Mode& m : modes_) {
      const double theta = m.ku * u + m.kv * v + m.phase;
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      // d^n cos(theta) / dtheta^n for n = 0..3
      const double d0 = c, d1 = -s, d2 = -c, d3 = s;
      j.z += d0;
      if (order >= 1) {
        j.zu += m.ku * d1;
        j.zv += m.kv * d1;
      }
      if (order >= 2) {
        j.zuu += m.ku * m.ku * d2;
        j.zuv += m.ku * m.kv * d2;
        j.zvv += m.kv * m.kv * d2;
      }
      if (order >= 3) {
        j.zuuu += m.ku * m.ku * m.ku * d3;
        j.zuuv += m.ku * m.ku * m.kv * d3;
        j.zuvv += m.ku * m.kv * m.kv * d3;
        j.zvvv += m.kv * m.kv * m.kv * d3;
      }
    }
    j.z *= scale_;
    j.zu *= scale_;
    j.zv *= scale_;
    j.zuu *= scale_;
    j.zuv *= scale_;
    j.zvv *= scale_;
    j.zuuu *= scale_;
    j.zuuv *= scale_;
    j.zuvv *= scale_;
    j.zvvv *= scale_;
    return j;
  }

 private:
  struct Mode {
    double ku = 0.0, kv = 0.0, phase = 0.0;
  };
  GrfSpec spec_{};
  std::vector<Mode> modes_;
  double scale_ = 0.0;
};

inline HeightJet grf_realize(const GaussianRandomField& grf, double u, double v,
                             int order) {
  return grf(u, v, order);
}

// The stochastic cloth: sinusoidal wrinkles + GRF roughness + sag dip.
class HeightField {
 public:
  HeightField() : HeightField(HeightFieldSpec{}) {}

  explicit HeightField(HeightFieldSpec spec)
      : spec_(std::move(spec)), grf_(spec_.grf) {
    for (const WrinkleMode& w : spec_.wrinkles) {
      if (!std::isfinite(w.amplitude) || !std::isfinite(w.freq_u) ||
          !std::isfinite(w.freq_v) || !std::isfinite(w.phase) ||
          w.freq_u < 0.0 || w.freq_v < 0.0) {
        throw Error(ErrorKind::Validation,
                    "manifold.wrinkle_*: amplitudes and phases must be finite, "
                    "frequencies finite and non-negative");
      }
    }
    if (!std::isfinite(spec_.sag_amplitude)) {
      throw Error(ErrorKind::Validation,
                  "manifold.sag_amplitude must be finite");
    }
  }

  const HeightFieldSpec& spec() const { return spec_; }
  const GaussianRandomField& grf() const { return grf_; }

  HeightJet height(double u, double v, int order) const {
    HeightJet j;
    for (const WrinkleMode& w : spec_.wrinkles) {
      j += detail::separable(w.amplitude,
                             detail::sin_derivs(kTwoPi * w.freq_u, u, w.phase),
                             detail::cos_derivs(kTwoPi * w.freq_v, v, 0.0),
                             order);
    }
    j += grf_(u, v, order);
    if (spec_.sag_amplitude != 0.0) {
      constexpr double pi = std::numbers::pi;
      j += detail::separable(-spec_.sag_amplitude,
                             detail::sin_derivs(pi, u, 0.0),
                             detail::sin_derivs(pi, v, 0.0), order);
    }
    return j;
  }

 private:
  HeightFieldSpec spec_;
  GaussianRandomField grf_;
};

// z == 0.
struct FlatSurface {
  HeightJet height(double, double, int) const { return {}; }
};

// Test hook: any closed-form z(u, v) supplied as a callable returning the
// full third-order jet.
template <class F>
struct ClosedFormSurface {
  F fn;
  HeightJet height(double u, double v, int order) const { return fn(u, v, order); }
};

template <class F>
ClosedFormSurface<F> closed_form_surface(F fn) {
  return ClosedFormSurface<F>{std::move(fn)};
}

template <Surface S>
HeightJet height_at(const S& surface, double u, double v, int order) {
  return surface.height(u, v, order);
}

struct MetricSample {
  std::array<std::array<double, 2>, 2> g{};
  std::array<std::array<double, 2>, 2> g_inv{};
  double det_g = 1.0;
  double sqrt_det_g = 1.0;
  // d_sqrtg_ginv[i][j] = d/dxi^i ( sqrt|g| g^{ij} )
  std::array<std::array<double, 2>, 2> d_sqrtg_ginv{};

  // Contracted divergence coefficient sum_i d_i(sqrt|g| g^{ij}).
  double divergence_coeff(int j) const {
    return d_sqrtg_ginv[0][j] + d_sqrtg_ginv[1][j];
  }
};

// Metric quantities from a height jet of order >= 2.
inline MetricSample metric_from_jet(const HeightJet& h) {
  MetricSample m;
  const double p = h.zu, q = h.zv;
  m.g = {{{1.0 + p * p, p * q}, {p * q, 1.0 + q * q}}};
  m.det_g = 1.0 + p * p + q * q;
  m.sqrt_det_g = std::sqrt(m.det_g);
  const double inv_det = 1.0 / m.det_g;
  m.g_inv = {{{(1.0 + q * q) * inv_det, -p * q * inv_det},
              {-p * q * inv_det, (1.0 + p * p) * inv_det}}};

  // sqrt|g| g^{ij} = N_ij / sqrt(D) with N = [[1+q^2, -pq], [-pq, 1+p^2]].
  // Partials of p and q along u (i = 0) and v (i = 1).
  const std::array<double, 2> dp = {h.zuu, h.zuv};
  const std::array<double, 2> dq = {h.zuv, h.zvv};
  const double n_[2][2] = {{1.0 + q * q, -p * q}, {-p * q, 1.0 + p * p}};
  const double inv_sqrt = 1.0 / m.sqrt_det_g;
  const double inv_sqrt3 = inv_sqrt * inv_det;
  for (int i = 0; i < 2; ++i) {
    const double d_det = 2.0 * p * dp[i] + 2.0 * q * dq[i];
    const double dn[2][2] = {{2.0 * q * dq[i], -(dp[i] * q + p * dq[i])},
                             {-(dp[i] * q + p * dq[i]), 2.0 * p * dp[i]}};
    for (int j = 0; j < 2; ++j) {
      m.d_sqrtg_ginv[i][j] =
          dn[i][j] * inv_sqrt - 0.5 * n_[i][j] * inv_sqrt3 * d_det;
    }
  }
  return m;
}

template <Surface S>
MetricSample metric_at(const S& surface, double u, double v) {
  return metric_from_jet(surface.height(u, v, 2));
}

struct CurvatureSample {
  double gaussian_K = 0.0;
  double mean_H = 0.0;
};

inline CurvatureSample curvature_from_jet(const HeightJet& h) {
  const double det = 1.0 + h.zu * h.zu + h.zv * h.zv;
  CurvatureSample c;
  c.gaussian_K = (h.zuu * h.zvv - h.zuv * h.zuv) / (det * det);
  c.mean_H = ((1.0 + h.zv * h.zv) * h.zuu - 2.0 * h.zu * h.zv * h.zuv +
              (1.0 + h.zu * h.zu) * h.zvv) /
             (2.0 * std::pow(det, 1.5));
  return c;
}

template <Surface S>
CurvatureSample curvature_at(const S& surface, double u, double v) {
  return curvature_from_jet(surface.height(u, v, 2));
}

// Periodic modulation of the feed rate, cos(4 pi u) sin(4 pi v).
inline double chemical_potential(double u, double v) {
  constexpr double four_pi = 4.0 * std::numbers::pi;
  return std::cos(four_pi * u) * std::sin(four_pi * v);
}

// Trapezoid rule for the integral of sqrt(det g) over [0,1]^2 on a
// resolution x resolution vertex grid.
template <Surface S>
double surface_area(const S& surface, int resolution) {
  if (resolution < 2) {
    throw Error(ErrorKind::Validation, "surface_area: resolution must be >= 2");
  }
  const int n = resolution - 1;
  const double h = 1.0 / n;
  double total = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double wv = (j == 0 || j == n) ? 0.5 : 1.0;
    for (int i = 0; i <= n; ++i) {
      const double wu = (i == 0 || i == n) ? 0.5 : 1.0;
      const HeightJet hj = surface.height(i * h, j * h, 1);
      total += wu * wv * std::sqrt(1.0 + hj.zu * hj.zu + hj.zv * hj.zv);
    }
  }
  return total * h * h;
}

}  // namespace impinn::geometry
