#pragma once

// Comparison metrics between the neural field and the SFEM reference:
// area-weighted relative L2, mass-balance violation, geometry statistics,
// intrinsic gradient norm, reaction rate and resource accounting.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"
#include "impinn/sfem.hpp"

namespace impinn::metrics {

// sqrt(sum w (p - r)^2) / sqrt(sum w r^2).
inline double relative_l2(std::span<const double> pred, std::span<const double> ref,
                          std::span<const double> weights) {
  if (pred.size() != ref.size() || ref.size() != weights.size()) {
    throw Error(ErrorKind::Validation, "relative_l2: length mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = pred[i] - ref[i];
    num += weights[i] * d * d;
    den += weights[i] * ref[i] * ref[i];
  }
  if (std::sqrt(den) < 1e-14) {
    throw Error(ErrorKind::ZeroReference, "relative_l2: reference norm is zero");
  }
  return std::sqrt(num) / std::sqrt(den);
}

// Sampler overload: pred(u, v) is evaluated at every mesh vertex.
template <class F>
  requires std::invocable<F, double, double>
double relative_l2(F&& pred, std::span<const double> ref, const sfem::TriMesh& mesh) {
  std::vector<double> p(mesh.num_vertices());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = pred(mesh.uv[i][0], mesh.uv[i][1]);
  return relative_l2(p, ref, mesh.lumped_area);
}

// Mean over checkpoints of |dM/dt - Phi| / (F0 Area).
inline double mass_violation(std::span<const sfem::MassAudit> audits, double F0,
                             double area) {
  if (audits.size() < 2) {
    throw Error(ErrorKind::Validation, "mass_violation needs at least 2 checkpoints");
  }
  if (!(F0 > 0.0) || !(area > 0.0)) {
    throw Error(ErrorKind::Validation, "mass_violation: F0 and area must be > 0");
  }
  double s = 0.0;
  for (const auto& a : audits) s += std::abs(a.dmass_dt - a.net_source);
  return s / static_cast<double>(audits.size()) / (F0 * area);
}

// Neural-field fields at the mesh vertices at physical time t.
inline sfem::FieldSnapshot sample_network(const network::NetworkParams& net,
                                          const network::FourierEmbedding& emb,
                                          const sfem::TriMesh& mesh, double horizon,
                                          double t, std::size_t chunk = 4096) {
  sfem::FieldSnapshot s;
  s.time = t;
  s.U.resize(mesh.num_vertices());
  s.V.resize(mesh.num_vertices());
  for (std::size_t b = 0; b < mesh.num_vertices(); b += chunk) {
    const std::size_t e = std::min(mesh.num_vertices(), b + chunk);
    std::vector<network::Point3> pts;
    for (std::size_t i = b; i < e; ++i) pts.push_back({mesh.uv[i][0], mesh.uv[i][1], t / horizon});
    const auto out = network::evaluate_batch(net, emb, pts, 1);
    for (std::size_t i = b; i < e; ++i) {
      s.U[i] = out.at(0, i - b, 0);
      s.V[i] = out.at(1, i - b, 0);
    }
  }
  return s;
}

// Mass balance of the neural field at time t, integrated over the mesh
// vertices with the lumped area weights.
template <geometry::Surface S>
sfem::MassAudit network_mass_audit(const network::NetworkParams& net,
                                   const network::FourierEmbedding& emb,
                                   const S& surface, const sfem::TriMesh& mesh,
                                   const physics::GrayScottParams& p, double horizon,
                                   double t, std::size_t chunk = 2048) {
  sfem::MassAudit a;
  a.time = t;
  for (std::size_t b = 0; b < mesh.num_vertices(); b += chunk) {
    const std::size_t e = std::min(mesh.num_vertices(), b + chunk);
    std::vector<network::Point3> pts;
    for (std::size_t i = b; i < e; ++i) pts.push_back({mesh.uv[i][0], mesh.uv[i][1], t / horizon});
    const auto out = network::evaluate_batch(net, emb, pts, ad::kJetWidth);
    for (std::size_t i = b; i < e; ++i) {
      const auto& [u, v] = mesh.uv[i];
      const auto U = physics::to_physical_time(out.jet(0, i - b), horizon);
      const auto V = physics::to_physical_time(out.jet(1, i - b), horizon);
      const auto m = geometry::metric_at(surface, u, v);
      const double w = mesh.lumped_area[i];
      a.dmass_dt += w * U.grad[2];
      a.net_source += w * physics::mass_flux_density(U, V, m, p,
                                                     physics::modulated_feed(p, u, v));
    }
  }
  return a;
}

// sqrt(g^{ij} psi_i psi_j).
template <class T>
double intrinsic_grad_norm(const ad::BasicJet2<T>& psi, const geometry::MetricSample& m) {
  const double a = psi.grad[0], b = psi.grad[1];
  const double q = m.g_inv[0][0] * a * a + 2.0 * m.g_inv[0][1] * a * b + m.g_inv[1][1] * b * b;
  return std::sqrt(std::max(q, 0.0));
}

inline double reaction_rate(double U, double V) { return U * V * V; }

struct Summary {
  double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
};

inline Summary summarize(std::span<const double> x) {
  Summary s;
  if (x.empty()) return s;
  s.min = *std::min_element(x.begin(), x.end());
  s.max = *std::max_element(x.begin(), x.end());
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double v = 0.0;
  for (double d : x) v += (d - s.mean) * (d - s.mean);
  s.std = std::sqrt(v / static_cast<double>(x.size()));
  return s;
}

struct GeometryStats {
  int resolution = 0;
  Summary z, K, H, det_g;
  double area = 0.0;
};

// Statistics over a resolution x resolution vertex grid on [0,1]^2.
template <geometry::Surface S>
GeometryStats curvature_stats(const S& surface, int resolution) {
  if (resolution < 100) {
    throw Error(ErrorKind::Validation, "curvature_stats: grid must be at least 100 x 100");
  }
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
  std::vector<double> z(n), K(n), H(n), d(n);
  const double h = 1.0 / (resolution - 1);
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * resolution + i;
      const auto jet = surface.height(i * h, j * h, 2);
      const auto c = geometry::curvature_from_jet(jet);
      z[k] = jet.z;
      K[k] = c.gaussian_K;
      H[k] = c.mean_H;
      d[k] = 1.0 + jet.zu * jet.zu + jet.zv * jet.zv;
    }
  }
  GeometryStats g;
  g.resolution = resolution;
  g.z = summarize(z);
  g.K = summarize(K);
  g.H = summarize(H);
  g.det_g = summarize(d);
  g.area = geometry::surface_area(surface, resolution);
  return g;
}

struct ResourceReport {
  std::size_t param_count = 0;
  std::size_t model_bytes = 0;
  std::size_t mesh_vertices = 0;
  std::size_t mesh_dof = 0;
  std::size_t stiffness_nonzeros = 0;
};

inline ResourceReport resource_report(const network::NetworkParams* params,
                                      std::size_t echo_bytes,
                                      const sfem::TriMesh* mesh) {
  ResourceReport r;
  if (params != nullptr && !params->layers.empty()) {
    r.param_count = params->size();
    const int m = params->input_dim() / 2;
    r.model_bytes = 4 + 8 + echo_bytes + 8 + 8 + 24 * static_cast<std::size_t>(m);
    for (const auto& l : params->layers) {
      r.model_bytes += 16 + 8 * (static_cast<std::size_t>(l.in) * l.out + l.out);
    }
  }
  if (mesh != nullptr && mesh->num_vertices() > 0) {
    r.mesh_vertices = mesh->num_vertices();
    r.mesh_dof = 2 * r.mesh_vertices;
    // Every vertex row holds itself plus its edge neighbours.
    r.stiffness_nonzeros = r.mesh_vertices + 2 * mesh->num_edges();
  }
  return r;
}

// Spearman rank correlation (average ranks for ties).
inline double rank_correlation(std::span<const double> a, std::span<const double> b) {
  auto ranks = [](std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return x[i] < x[j]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j);
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const Summary sa = summarize(ra), sb = summarize(rb);
  if (sa.std == 0.0 || sb.std == 0.0) return 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) c += (ra[i] - sa.mean) * (rb[i] - sb.mean);
  return c / static_cast<double>(ra.size()) / (sa.std * sb.std);
}

struct CheckpointRow {
  double time = 0.0;
  double rel_l2_U = 0.0;
  double rel_l2_V = 0.0;
  double mass_residual_pinn = 0.0;  // |dM/dt - Phi| / (F0 Area)
  double mass_residual_sfem = 0.0;
};

struct ComparisonReport {
  double rel_l2_U = 0.0;  // mean over the early window
  double rel_l2_V = 0.0;
  double early_window = 0.0;
  double mass_violation_pinn = 0.0;
  double mass_violation_sfem = 0.0;
  ResourceReport resources;
  std::vector<CheckpointRow> rows;
};

// Compares a trained network against an SFEM series at each snapshot.
// The headline L2 errors average the rows with 0 < t < early_window
// (all rows with t > 0 if none fall inside). Mass scores skip t = 0.
template <geometry::Surface S>
ComparisonReport compare(const network::NetworkParams& net,
                         const network::FourierEmbedding& emb, const S& surface,
                         const sfem::ReferenceRun& ref, const physics::GrayScottParams& p,
                         double horizon, double early_window, std::size_t echo_bytes) {
  ComparisonReport rep;
  rep.early_window = early_window;
  const double area = ref.mesh.total_area();
  std::vector<sfem::MassAudit> pinn, sfem_audits;
  for (std::size_t k = 0; k < ref.snapshots.size(); ++k) {
    const sfem::FieldSnapshot& s = ref.snapshots[k];
    const sfem::FieldSnapshot pred = sample_network(net, emb, ref.mesh, horizon, s.time);
    CheckpointRow row;
    row.time = s.time;
    row.rel_l2_U = relative_l2(pred.U, s.U, ref.mesh.lumped_area);
    // V can be identically zero early on (no seed square, no noise).
    double vref = 0.0;
    for (double v : s.V) vref = std::max(vref, std::abs(v));
    row.rel_l2_V = vref > 0.0 ? relative_l2(pred.V, s.V, ref.mesh.lumped_area)
                              : std::numeric_limits<double>::quiet_NaN();
    const auto pa = network_mass_audit(net, emb, surface, ref.mesh, p, horizon, s.time);
    const auto& sa = ref.audits[k];
    row.mass_residual_pinn = std::abs(pa.dmass_dt - pa.net_source) / (p.F0 * area);
    row.mass_residual_sfem = std::abs(sa.dmass_dt - sa.net_source) / (p.F0 * area);
    if (s.time > 0.0) {
      pinn.push_back(pa);
      sfem_audits.push_back(sa);
    }
    rep.rows.push_back(row);
  }

  double su = 0.0, sv = 0.0;
  int nu = 0, nv = 0;
  auto accumulate_rows = [&](bool windowed) {
    for (const auto& r : rep.rows) {
      if (r.time <= 0.0 || (windowed && r.time >= early_window)) continue;
      su += r.rel_l2_U;
      ++nu;
      if (std::isfinite(r.rel_l2_V)) {
        sv += r.rel_l2_V;
        ++nv;
      }
    }
  };
  accumulate_rows(true);
  if (nu == 0) accumulate_rows(false);
  rep.rel_l2_U = nu > 0 ? su / nu : std::numeric_limits<double>::quiet_NaN();
  rep.rel_l2_V = nv > 0 ? sv / nv : std::numeric_limits<double>::quiet_NaN();

  if (pinn.size() >= 2) {
    rep.mass_violation_pinn = mass_violation(pinn, p.F0, area);
    rep.mass_violation_sfem = mass_violation(sfem_audits, p.F0, area);
  } else {
    rep.mass_violation_pinn = rep.mass_violation_sfem =
        std::numeric_limits<double>::quiet_NaN();
  }
  rep.resources = resource_report(&net, echo_bytes, &ref.mesh);
  return rep;
}

}  // namespace impinn::metrics
