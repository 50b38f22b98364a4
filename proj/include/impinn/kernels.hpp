#pragma once

// Dense kernels over "jet blocks": row-major matrices whose columns hold, for
// every point, either one value (stride 1) or a full 10-coefficient jet
// (stride 10). Forward products use a fixed summation order per output entry
// so a value column is bitwise identical whatever the block width.

#include <cmath>
#include <cstddef>

#include "impinn/jet.hpp"

namespace impinn::ad::kernels {

inline constexpr std::size_t kColumnTile = 16;

inline std::size_t padded_columns(std::size_t n) {
  return (n + kColumnTile - 1) / kColumnTile * kColumnTile;
}

namespace detail {
typedef double v8 __attribute__((vector_size(64)));

inline v8 load8(const double* p) {
  v8 v;
  __builtin_memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, v8 v) { __builtin_memcpy(p, &v, sizeof v); }

inline void add_bias(double* y, std::size_t c0, int stride, double bias) {
  for (std::size_t c = 0; c < kColumnTile; ++c) {
    if ((c0 + c) % stride == 0) y[c] += bias;
  }
}
}  // namespace detail

// Y = W X (+ b on value columns). W is out x in row-major; X is in x ld;
// Y is out x ld. `ld` must be a multiple of kColumnTile.
inline void affine_forward(const double* W, const double* b, int out, int in,
                           const double* X, std::size_t ld, int stride,
                           double* Y) {
  using detail::v8;
  static_assert(kColumnTile == 16);
  const auto row = [&](int r) { return W + static_cast<std::size_t>(r) * in; };
  for (std::size_t c0 = 0; c0 < ld; c0 += kColumnTile) {
    int r0 = 0;
    for (; r0 + 4 <= out; r0 += 4) {
      const double *w0 = row(r0), *w1 = row(r0 + 1), *w2 = row(r0 + 2),
                   *w3 = row(r0 + 3);
      v8 a00{}, a01{}, a10{}, a11{}, a20{}, a21{}, a30{}, a31{};
      for (int k = 0; k < in; ++k) {
        const double* xk = X + static_cast<std::size_t>(k) * ld + c0;
        const v8 x0 = detail::load8(xk), x1 = detail::load8(xk + 8);
        a00 += w0[k] * x0;
        a01 += w0[k] * x1;
        a10 += w1[k] * x0;
        a11 += w1[k] * x1;
        a20 += w2[k] * x0;
        a21 += w2[k] * x1;
        a30 += w3[k] * x0;
        a31 += w3[k] * x1;
      }
      const v8 acc[4][2] = {{a00, a01}, {a10, a11}, {a20, a21}, {a30, a31}};
      for (int i = 0; i < 4; ++i) {
        double* y = Y + static_cast<std::size_t>(r0 + i) * ld + c0;
        detail::store8(y, acc[i][0]);
        detail::store8(y + 8, acc[i][1]);
        detail::add_bias(y, c0, stride, b[r0 + i]);
      }
    }
    for (; r0 < out; ++r0) {
      const double* w = row(r0);
      v8 a0{}, a1{};
      for (int k = 0; k < in; ++k) {
        const double* xk = X + static_cast<std::size_t>(k) * ld + c0;
        a0 += w[k] * detail::load8(xk);
        a1 += w[k] * detail::load8(xk + 8);
      }
      double* y = Y + static_cast<std::size_t>(r0) * ld + c0;
      detail::store8(y, a0);
      detail::store8(y + 8, a1);
      detail::add_bias(y, c0, stride, b[r0]);
    }
  }
}

enum class Activation { Tanh, Softplus };

inline Derivs activation_derivs(Activation a, double x) {
  return a == Activation::Tanh ? tanh_derivs(x) : softplus_derivs(x);
}

// Elementwise y = f(x) over `rows` x `points` jets.
inline void activate_forward(Activation act, int rows, std::size_t points,
                             int stride, const double* X, std::size_t ld,
                             double* Y) {
  for (int r = 0; r < rows; ++r) {
    const double* xr = X + static_cast<std::size_t>(r) * ld;
    double* yr = Y + static_cast<std::size_t>(r) * ld;
    if (stride == 1) {
      for (std::size_t p = 0; p < points; ++p) {
        yr[p] = activation_derivs(act, xr[p]).f;
      }
      continue;
    }
    for (std::size_t p = 0; p < points; ++p) {
      const double* x = xr + p * kJetWidth;
      double* y = yr + p * kJetWidth;
      const Derivs d = activation_derivs(act, x[0]);
      const double* g = x + 1;
      const double* h = x + 1 + kInputs;
      y[0] = d.f;
      for (int i = 0; i < kInputs; ++i) y[1 + i] = d.f1 * g[i];
      for (int i = 0; i < kInputs; ++i) {
        for (int j = i; j < kInputs; ++j) {
          const int k = sym_index(i, j);
          y[1 + kInputs + k] = d.f1 * h[k] + d.f2 * g[i] * g[j];
        }
      }
    }
  }
}

// Adjoint of activate_forward: accumulates x_bar from y_bar.
inline void activate_backward(Activation act, int rows, std::size_t points,
                              int stride, const double* X, const double* Ybar,
                              std::size_t ld, double* Xbar) {
  for (int r = 0; r < rows; ++r) {
    const double* xr = X + static_cast<std::size_t>(r) * ld;
    const double* ybr = Ybar + static_cast<std::size_t>(r) * ld;
    double* xbr = Xbar + static_cast<std::size_t>(r) * ld;
    if (stride == 1) {
      for (std::size_t p = 0; p < points; ++p) {
        if (ybr[p] != 0.0) xbr[p] += activation_derivs(act, xr[p]).f1 * ybr[p];
      }
      continue;
    }
    for (std::size_t p = 0; p < points; ++p) {
      const double* x = xr + p * kJetWidth;
      const double* yb = ybr + p * kJetWidth;
      double* xb = xbr + p * kJetWidth;
      const Derivs d = activation_derivs(act, x[0]);
      const double* g = x + 1;
      const double* h = x + 1 + kInputs;
      const double* gb = yb + 1;
      const double* hb = yb + 1 + kInputs;

      double v_bar = d.f1 * yb[0];
      for (int i = 0; i < kInputs; ++i) {
        v_bar += d.f2 * gb[i] * g[i];
        xb[1 + i] += d.f1 * gb[i];
      }
      for (int i = 0; i < kInputs; ++i) {
        for (int j = i; j < kInputs; ++j) {
          const int k = sym_index(i, j);
          v_bar += hb[k] * (d.f2 * h[k] + d.f3 * g[i] * g[j]);
          xb[1 + kInputs + k] += d.f1 * hb[k];
          // d(g_i g_j)/dg
          xb[1 + i] += d.f2 * hb[k] * g[j];
          xb[1 + j] += d.f2 * hb[k] * g[i];
        }
      }
      xb[0] += v_bar;
    }
  }
}

}  // namespace impinn::ad::kernels
