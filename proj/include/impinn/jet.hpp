#pragma once

// Second-order Taylor jets over the three network inputs (u, v, t).

#include <algorithm>
#include <array>
#include <cmath>

namespace impinn::ad {

inline constexpr int kInputs = 3;
inline constexpr int kHessEntries = 6;
// Coefficients carried per scalar: 1 value + 3 gradient + 6 Hessian.
inline constexpr int kJetWidth = 1 + kInputs + kHessEntries;

// Packed index of the symmetric Hessian entry (i, j); order uu uv ut vv vt tt.
constexpr int sym_index(int i, int j) {
  if (i > j) {
    const int k = i;
    i = j;
    j = k;
  }
  constexpr int row_start[3] = {0, 3, 5};
  return row_start[i] + (j - i);
}

template <class T>
struct BasicJet2 {
  T value{};
  std::array<T, kInputs> grad{};
  std::array<T, kHessEntries> hess{};

  const T& h(int i, int j) const { return hess[sym_index(i, j)]; }
  T& h(int i, int j) { return hess[sym_index(i, j)]; }
};

using Jet2 = BasicJet2<double>;

inline Jet2 constant(double c) {
  Jet2 j;
  j.value = c;
  return j;
}

// Jet of the input coordinate `axis` at value x.
inline Jet2 variable(double x, int axis) {
  Jet2 j;
  j.value = x;
  j.grad[axis] = 1.0;
  return j;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value + b.value;
  for (int i = 0; i < kInputs; ++i) r.grad[i] = a.grad[i] + b.grad[i];
  for (int k = 0; k < kHessEntries; ++k) r.hess[k] = a.hess[k] + b.hess[k];
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value - b.value;
  for (int i = 0; i < kInputs; ++i) r.grad[i] = a.grad[i] - b.grad[i];
  for (int k = 0; k < kHessEntries; ++k) r.hess[k] = a.hess[k] - b.hess[k];
  return r;
}

inline Jet2 scale(const Jet2& a, double s) {
  Jet2 r;
  r.value = s * a.value;
  for (int i = 0; i < kInputs; ++i) r.grad[i] = s * a.grad[i];
  for (int k = 0; k < kHessEntries; ++k) r.hess[k] = s * a.hess[k];
  return r;
}

inline Jet2 operator*(double s, const Jet2& a) { return scale(a, s); }
inline Jet2 operator*(const Jet2& a, double s) { return scale(a, s); }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value * b.value;
  for (int i = 0; i < kInputs; ++i) {
    r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
  }
  for (int i = 0; i < kInputs; ++i) {
    for (int j = i; j < kInputs; ++j) {
      const int k = sym_index(i, j);
      r.hess[k] = a.hess[k] * b.value + a.value * b.hess[k] +
                  a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
    }
  }
  return r;
}

// f and its first three derivatives at a point.
struct Derivs {
  double f, f1, f2, f3;
};

inline Derivs tanh_derivs(double x) {
  const double t = std::tanh(x);
  const double s = 1.0 - t * t;
  return {t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)};
}

inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Derivs softplus_derivs(double x) {
  const double s = sigmoid(x);
  const double s1 = s * (1.0 - s);
  return {softplus(x), s, s1, s1 * (1.0 - 2.0 * s)};
}

inline Derivs sin_derivs(double x) {
  const double s = std::sin(x), c = std::cos(x);
  return {s, c, -s, -c};
}

inline Derivs cos_derivs(double x) {
  const double s = std::sin(x), c = std::cos(x);
  return {c, -s, -c, s};
}

// y = f(x): grad_y = f' grad_x, hess_y = f' hess_x + f'' grad_x grad_x^T.
inline Jet2 compose(const Jet2& x, const Derivs& d) {
  Jet2 r;
  r.value = d.f;
  for (int i = 0; i < kInputs; ++i) r.grad[i] = d.f1 * x.grad[i];
  for (int i = 0; i < kInputs; ++i) {
    for (int j = i; j < kInputs; ++j) {
      const int k = sym_index(i, j);
      r.hess[k] = d.f1 * x.hess[k] + d.f2 * x.grad[i] * x.grad[j];
    }
  }
  return r;
}

inline Jet2 tanh(const Jet2& x) { return compose(x, tanh_derivs(x.value)); }
inline Jet2 softplus(const Jet2& x) {
  return compose(x, softplus_derivs(x.value));
}
inline Jet2 sin(const Jet2& x) { return compose(x, sin_derivs(x.value)); }
inline Jet2 cos(const Jet2& x) { return compose(x, cos_derivs(x.value)); }

}  // namespace impinn::ad
