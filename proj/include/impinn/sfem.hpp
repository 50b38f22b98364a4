#pragma once

// Linear surface finite elements on a triangulated Monge patch: cotangent
// stiffness, lumped mass, and a semi-implicit Euler stepper (implicit
// diffusion, explicit reaction) solved with Jacobi-preconditioned CG.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/physics.hpp"

namespace impinn::sfem {

using Vec3 = std::array<double, 3>;

struct TriMesh {
  int n = 0;  // grid cells per side
  std::vector<Vec3> positions;
  std::vector<std::array<double, 2>> uv;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> lumped_area;

  std::size_t num_vertices() const { return positions.size(); }
  std::size_t num_edges() const {
    // n(n+1) horizontal, n(n+1) vertical, n^2 diagonals.
    return n == 0 ? 0 : static_cast<std::size_t>(3 * n * n + 2 * n);
  }
  double total_area() const {
    return std::accumulate(lumped_area.begin(), lumped_area.end(), 0.0);
  }
};

namespace detail {
inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
}  // namespace detail

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * detail::norm(detail::cross(detail::sub(b, a), detail::sub(c, a)));
}

// (n+1)^2 vertices at r(i/n, j/n); each cell split along its
// lower-left to upper-right diagonal. Vertex (i, j) has index j (n+1) + i.
template <geometry::Surface S>
TriMesh build_mesh(const S& surface, int n) {
  if (n < 1) throw Error(ErrorKind::Validation, "sfem.n must be >= 1");
  TriMesh mesh;
  mesh.n = n;
  const int side = n + 1;
  mesh.positions.reserve(static_cast<std::size_t>(side) * side);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n, v = static_cast<double>(j) / n;
      mesh.uv.push_back({u, v});
      mesh.positions.push_back({u, v, surface.height(u, v, 0).z});
    }
  }
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * side + i, b = a + 1, c = a + side + 1, d = a + side;
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  mesh.lumped_area.assign(mesh.positions.size(), 0.0);
  for (const auto& t : mesh.triangles) {
    const double area = triangle_area(mesh.positions[t[0]], mesh.positions[t[1]],
                                      mesh.positions[t[2]]);
    if (!(area >= 1e-14)) {
      throw Error(ErrorKind::DegenerateTriangle,
                  "triangle area below 1e-14 (sfem.n too large or height field "
                  "pathological)");
    }
    for (int k : t) mesh.lumped_area[k] += area / 3.0;
  }
  return mesh;
}

// ---- sparse algebra ---------------------------------------------------------

struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nonzeros() const { return val.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
      y[r] = s;
    }
  }

  double at(std::size_t r, int c) const {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col[k] == c) return val[k];
    }
    return 0.0;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) d[r] = at(r, static_cast<int>(r));
    return d;
  }
};

struct Triplet {
  int r, c;
  double v;
};

// Sums duplicates; entries are merged in a fixed order, so assembly is
// deterministic.
inline CsrMatrix csr_from_triplets(std::size_t n, std::vector<Triplet> t) {
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  CsrMatrix m;
  m.rows = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t k = 0; k < t.size();) {
    std::size_t e = k;
    double s = 0.0;
    while (e < t.size() && t[e].r == t[k].r && t[e].c == t[k].c) s += t[e++].v;
    m.col.push_back(t[k].c);
    m.val.push_back(s);
    ++m.row_ptr[static_cast<std::size_t>(t[k].r) + 1];
    k = e;
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

// A_ij = -(cot a_ij + cot b_ij) / 2 on edges, A_ii = -sum_j A_ij.
inline CsrMatrix assemble_stiffness(const TriMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int o = tri[k], i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const Vec3 e1 = detail::sub(mesh.positions[i], mesh.positions[o]);
      const Vec3 e2 = detail::sub(mesh.positions[j], mesh.positions[o]);
      const double twice_area = detail::norm(detail::cross(e1, e2));
      if (!(twice_area >= 2e-14)) {
        throw Error(ErrorKind::DegenerateTriangle, "degenerate triangle in stiffness");
      }
      const double w = 0.5 * detail::dot(e1, e2) / twice_area;
      t.push_back({i, j, -w});
      t.push_back({j, i, -w});
      t.push_back({i, i, w});
      t.push_back({j, j, w});
    }
  }
  return csr_from_triplets(mesh.num_vertices(), std::move(t));
}

// S = diag(mass) / dt + D A.
inline CsrMatrix system_matrix(const CsrMatrix& A, std::span<const double> mass,
                               double dt, double D) {
  CsrMatrix S = A;
  for (double& v : S.val) v *= D;
  for (std::size_t r = 0; r < S.rows; ++r) {
    for (std::size_t k = S.row_ptr[r]; k < S.row_ptr[r + 1]; ++k) {
      if (S.col[k] == static_cast<int>(r)) S.val[k] += mass[r] / dt;
    }
  }
  return S;
}

struct PcgOptions {
  double rel_tol = 1e-10;
  std::size_t max_iter = 0;  // 0: 10 sqrt(rows)
};

struct PcgReport {
  std::size_t iterations = 0;
  double rel_residual = 0.0;
};

// Jacobi-preconditioned CG for SPD (or consistent semi-definite) systems.
// `x` holds the initial guess on entry.
inline PcgReport pcg_solve(const CsrMatrix& A, std::span<const double> b,
                           std::span<double> x, const PcgOptions& opt = {}) {
  const std::size_t n = A.rows;
  const std::size_t cap = opt.max_iter > 0
                              ? opt.max_iter
                              : static_cast<std::size_t>(std::ceil(10.0 * std::sqrt(double(n))));
  std::vector<double> inv_d = A.diagonal();
  for (double& d : inv_d) d = d != 0.0 ? 1.0 / d : 1.0;
  std::vector<double> r(n), z(n), p(n), q(n);
  A.multiply(x, r);
  double bnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - r[i];
    bnorm += b[i] * b[i];
  }
  bnorm = std::sqrt(bnorm);
  PcgReport rep;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return rep;
  }
  auto rnorm = [&] {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
  };
  rep.rel_residual = rnorm() / bnorm;
  if (rep.rel_residual <= opt.rel_tol) return rep;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = inv_d[i] * r[i];
    p[i] = z[i];
    rz += r[i] * z[i];
  }
  for (rep.iterations = 1; rep.iterations <= cap; ++rep.iterations) {
    A.multiply(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rep.rel_residual = rnorm() / bnorm;
    if (rep.rel_residual <= opt.rel_tol) return rep;
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = inv_d[i] * r[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error(ErrorKind::CgNoConvergence,
              "CG did not reach relative residual " + std::to_string(opt.rel_tol) +
                  " within " + std::to_string(cap) + " iterations");
}

// ---- time stepping ----------------------------------------------------------

struct FieldSnapshot {
  double time = 0.0;
  std::vector<double> U, V;
};

// Holds the operators of one mesh; step() advances a snapshot by dt.
class Stepper {
 public:
  Stepper(const TriMesh& mesh, const physics::GrayScottParams& p, double dt,
          bool kinetics = true)
      : mesh_(&mesh), p_(p), dt_(dt), kinetics_(kinetics) {
    if (!(dt > 0.0)) throw Error(ErrorKind::Validation, "sfem.dt must be > 0");
    A_ = assemble_stiffness(mesh);
    sys_u_ = system_matrix(A_, mesh.lumped_area, dt, p.D_u);
    sys_v_ = system_matrix(A_, mesh.lumped_area, dt, p.D_v);
    feed_.resize(mesh.num_vertices());
    for (std::size_t i = 0; i < feed_.size(); ++i) {
      feed_[i] = physics::modulated_feed(p, mesh.uv[i][0], mesh.uv[i][1]);
    }
  }

  const CsrMatrix& stiffness() const { return A_; }
  const std::vector<double>& feed() const { return feed_; }
  double dt() const { return dt_; }
  bool kinetics() const { return kinetics_; }

  // Reaction terms R_U, R_V at every vertex.
  std::array<std::vector<double>, 2> reaction(const FieldSnapshot& s) const {
    const std::size_t n = s.U.size();
    std::array<std::vector<double>, 2> R{std::vector<double>(n, 0.0),
                                         std::vector<double>(n, 0.0)};
    if (!kinetics_) return R;
    for (std::size_t i = 0; i < n; ++i) {
      const double uvv = s.U[i] * s.V[i] * s.V[i];
      R[0][i] = -uvv + feed_[i] * (1.0 - s.U[i]);
      R[1][i] = uvv - (feed_[i] + p_.k) * s.V[i];
    }
    return R;
  }

  FieldSnapshot step(const FieldSnapshot& s) const {
    const auto& M = mesh_->lumped_area;
    const auto R = reaction(s);
    const std::size_t n = s.U.size();
    std::vector<double> bu(n), bv(n);
    for (std::size_t i = 0; i < n; ++i) {
      bu[i] = M[i] / dt_ * s.U[i] + M[i] * R[0][i];
      bv[i] = M[i] / dt_ * s.V[i] + M[i] * R[1][i];
    }
    FieldSnapshot out{s.time + dt_, s.U, s.V};
    pcg_solve(sys_u_, bu, out.U);
    pcg_solve(sys_v_, bv, out.V);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(out.U[i]) || !std::isfinite(out.V[i])) {
        throw Error(ErrorKind::NonFinite, "SFEM state became non-finite");
      }
    }
    return out;
  }

 private:
  const TriMesh* mesh_;
  physics::GrayScottParams p_;
  double dt_;
  bool kinetics_;
  CsrMatrix A_, sys_u_, sys_v_;
  std::vector<double> feed_;
};

inline double lumped_mass(const TriMesh& mesh, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += mesh.lumped_area[i] * f[i];
  return s;
}

inline FieldSnapshot initial_snapshot(const TriMesh& mesh,
                                      const physics::InitialCondition& ic) {
  FieldSnapshot s;
  s.U.resize(mesh.num_vertices());
  s.V.resize(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    s.U[i] = ic(physics::Species::U, mesh.uv[i][0], mesh.uv[i][1]);
    s.V[i] = ic(physics::Species::V, mesh.uv[i][0], mesh.uv[i][1]);
  }
  return s;
}

// Mass balance of U at a checkpoint: dM/dt by central differences of the
// per-step mass record, and the net source (diffusion + reaction) integral.
struct MassAudit {
  double time = 0.0;
  double dmass_dt = 0.0;
  double net_source = 0.0;
};

struct ReferenceRun {
  TriMesh mesh;
  std::vector<FieldSnapshot> snapshots;
  std::vector<double> mass_U;           // sum M_i U_i after every step (index 0: IC)
  std::vector<double> cumulative_source;  // dt * sum M_i R_U,i accumulated
  std::vector<MassAudit> audits;        // one per snapshot
  double seconds_per_step = 0.0;
};

struct ReferenceOptions {
  int n = 200;
  double dt = 1.0;
  double t_end = 2000.0;
  std::vector<double> checkpoints;  // times; t_end is always added
  bool kinetics = true;
};

inline double net_source(const Stepper& st, const TriMesh& mesh,
                         const physics::GrayScottParams& p,
                         const FieldSnapshot& s) {
  std::vector<double> AU(s.U.size());
  st.stiffness().multiply(s.U, AU);
  const auto R = st.reaction(s);
  double total = 0.0;
  for (std::size_t i = 0; i < s.U.size(); ++i) {
    total += -p.D_u * AU[i] + mesh.lumped_area[i] * R[0][i];
  }
  return total;
}

template <geometry::Surface S>
ReferenceRun run_reference(const S& surface, const physics::GrayScottParams& p,
                           const physics::InitialCondition& ic,
                           const ReferenceOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.t_end >= 0.0)) {
    throw Error(ErrorKind::Validation, "sfem.dt must be > 0 and sfem.t_end >= 0");
  }
  const double steps_real = opt.t_end / opt.dt;
  const auto steps = static_cast<long>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real)) {
    throw Error(ErrorKind::Validation, "sfem.t_end must be a multiple of sfem.dt");
  }
  std::vector<long> marks;
  for (double t : opt.checkpoints) {
    if (t < 0.0 || t > opt.t_end) continue;
    marks.push_back(std::lround(t / opt.dt));
  }
  marks.push_back(steps);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  ReferenceRun run;
  run.mesh = build_mesh(surface, opt.n);
  const Stepper st(run.mesh, p, opt.dt, opt.kinetics);
  FieldSnapshot cur = initial_snapshot(run.mesh, ic);
  run.snapshots.push_back(cur);
  run.mass_U.push_back(lumped_mass(run.mesh, cur.U));
  run.cumulative_source.push_back(0.0);
  std::vector<double> sources{net_source(st, run.mesh, p, cur)};
  std::size_t next_mark = 0;
  while (next_mark < marks.size() && marks[next_mark] == 0) ++next_mark;

  const auto start = std::chrono::steady_clock::now();
  for (long k = 1; k <= steps; ++k) {
    const double src = sources.back();
    cur = st.step(cur);
    cur.time = static_cast<double>(k) * opt.dt;
    run.mass_U.push_back(lumped_mass(run.mesh, cur.U));
    run.cumulative_source.push_back(run.cumulative_source.back() + opt.dt * src);
    sources.push_back(net_source(st, run.mesh, p, cur));
    if (next_mark < marks.size() && marks[next_mark] == k) {
      run.snapshots.push_back(cur);
      ++next_mark;
    }
  }
  if (steps > 0) {
    run.seconds_per_step =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
        static_cast<double>(steps);
  }

  for (const FieldSnapshot& s : run.snapshots) {
    const long k = std::lround(s.time / opt.dt);
    MassAudit a;
    a.time = s.time;
    a.net_source = sources[static_cast<std::size_t>(k)];
    if (steps == 0) {
      a.dmass_dt = 0.0;
    } else if (k == 0) {
      a.dmass_dt = (run.mass_U[1] - run.mass_U[0]) / opt.dt;
    } else if (k == steps) {
      a.dmass_dt = (run.mass_U[k] - run.mass_U[k - 1]) / opt.dt;
    } else {
      a.dmass_dt = (run.mass_U[k + 1] - run.mass_U[k - 1]) / (2.0 * opt.dt);
    }
    run.audits.push_back(a);
  }
  return run;
}

}  // namespace impinn::sfem
