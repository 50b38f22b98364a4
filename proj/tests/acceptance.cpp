// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Pass criterion numbers as arguments to run a subset, e.g. `acceptance 1 4 10`.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "impinn/config.hpp"
#include "impinn/geometry.hpp"
#include "impinn/loss.hpp"
#include "impinn/metrics.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"
#include "impinn/presets_data.hpp"
#include "impinn/sfem.hpp"
#include "impinn/trainer.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace impinn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

config::RunConfig ci_small() {
  auto c = config::apply_text({}, config::presets::kCiSmall, "ci-small");
  c.threads = 1;
  config::validate(c);
  return c;
}

// ---- 1 ----------------------------------------------------------------------

Outcome parameter_count() {
  const network::NetworkConfig cfg;  // m = 128, 4 x 128 tanh, 2 outputs
  const std::size_t n = network::count_params(cfg);
  const std::size_t built = network::init_params(cfg).size();
  return {n == 82690 && built == 82690, fmt("count %zu, materialized %zu", n, built)};
}

// ---- 2 ----------------------------------------------------------------------

Outcome laplacian_oracle() {
  const network::NetworkConfig cfg;
  const auto emb = network::make_embedding(cfg);
  const auto net = network::init_params(cfg);
  const geometry::HeightField cloth;

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> in(0.05, 0.95), tau(0.0, 1.0);
  std::vector<network::Point3> pts(1000);
  for (auto& p : pts) p = {in(rng), in(rng), tau(rng)};

  const auto out = network::evaluate_batch(net, emb, pts, ad::kJetWidth);
  double worst = 0.0;
  int checked = 0;
  for (int channel = 0; channel < 2; ++channel) {
    oracle::DivergenceFormLaplacian lb{
        [&](std::span<const network::Point3> q) { return oracle::network_values(net, emb, q, channel); },
        [&](double u, double v) { return cloth.height(u, v, 0).z; }};
    const auto ref = lb(pts, 2e-4);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto m = geometry::metric_at(cloth, pts[i][0], pts[i][1]);
      const double got = physics::laplace_beltrami(out.jet(channel, i), m);
      if (std::abs(ref[i]) <= 1e-8) continue;
      worst = std::max(worst, std::abs(got - ref[i]) / std::abs(ref[i]));
      ++checked;
    }
  }
  return {worst < 1e-5 && checked > 0,
          fmt("max relative error %.3e over %d values", worst, checked)};
}

// ---- 3 ----------------------------------------------------------------------

Outcome euclidean_reduction() {
  network::NetworkConfig cfg;
  cfg.fourier_features = 32;
  cfg.width = 48;
  cfg.depth = 3;
  const auto emb = network::make_embedding(cfg);
  const auto net = network::init_params(cfg);
  const geometry::FlatSurface flat;
  const physics::GrayScottParams gs;
  const double T = 2000.0;

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = unit(rng), v = unit(rng), t = unit(rng);
    const auto s = physics::interior_sample(flat, gs, u, v, t);
    const auto out = network::evaluate_batch(net, emb, std::span(&s.x, 1), ad::kJetWidth);
    const auto U = out.jet(0, 0), V = out.jet(1, 0);
    const auto r = physics::gray_scott_residual(physics::to_physical_time(U, T),
                                                physics::to_physical_time(V, T), s.metric, gs,
                                                s.feed);
    const double pde = physics::terms::pde(U, V, s, gs, T);
    const auto ref = oracle::planar_residual(U, V, u, v, T, gs.D_u, gs.D_v, gs.F0, gs.k, gs.epsilon);
    const double ref_pde = ref.r_U * ref.r_U + ref.r_V * ref.r_V;
    worst = std::max({worst, std::abs(r.r_U - ref.r_U) / std::max(1.0, std::abs(ref.r_U)),
                      std::abs(r.r_V - ref.r_V) / std::max(1.0, std::abs(ref.r_V)),
                      std::abs(pde - ref_pde) / std::max(1.0, ref_pde)});
  }
  return {worst <= 1e-12, fmt("max deviation %.3e", worst)};
}

// ---- 4 ----------------------------------------------------------------------

Outcome sfem_spectrum() {
  const geometry::FlatSurface flat;
  const auto mesh100 = sfem::build_mesh(flat, 100);
  const auto A = sfem::assemble_stiffness(mesh100);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double lambda = oracle::first_nonzero_eigenvalue(A, mesh100.lumped_area);
  const double eig_err = std::abs(lambda - pi2) / pi2;

  const auto mesh = sfem::build_mesh(flat, 128);
  physics::GrayScottParams heat;
  heat.D_u = 1.0;
  heat.D_v = 0.5;
  const sfem::Stepper st(mesh, heat, 1e-3, false);
  sfem::FieldSnapshot s;
  std::vector<double> mode(mesh.num_vertices());
  for (std::size_t i = 0; i < mode.size(); ++i) mode[i] = std::cos(std::numbers::pi * mesh.uv[i][0]);
  s.U = mode;
  s.V = mode;
  for (int k = 0; k < 100; ++k) s = st.step(s);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mode.size(); ++i) {
    num += mesh.lumped_area[i] * s.U[i] * mode[i];
    den += mesh.lumped_area[i] * mode[i] * mode[i];
  }
  const double amp = num / den;
  const double exact = std::exp(-pi2 * 0.1);
  const double decay_err = std::abs(amp - exact) / exact;
  return {eig_err < 0.01 && decay_err < 0.01,
          fmt("lambda_1 %.5f (pi^2 %.5f, err %.3f%%); amplitude %.5f vs %.5f (err %.3f%%)", lambda,
              pi2, 100 * eig_err, amp, exact, 100 * decay_err)};
}

// ---- 5 ----------------------------------------------------------------------

Outcome exact_conservation() {
  const geometry::FlatSurface flat;
  const auto mesh = sfem::build_mesh(flat, 128);
  const physics::GrayScottParams gs;
  const sfem::Stepper st(mesh, gs, 1.0, false);
  auto s = sfem::initial_snapshot(mesh, physics::InitialCondition{});
  const double m0 = sfem::lumped_mass(mesh, s.U);
  const double v0 = sfem::lumped_mass(mesh, s.V);
  for (int k = 0; k < 1000; ++k) s = st.step(s);
  const double du = std::abs(sfem::lumped_mass(mesh, s.U) - m0) / m0;
  const double dv = std::abs(sfem::lumped_mass(mesh, s.V) - v0) / v0;
  return {du < 1e-6 && dv < 1e-6, fmt("relative drift U %.3e, V %.3e", du, dv)};
}

// ---- 6 ----------------------------------------------------------------------

Outcome pattern_onset() {
  const geometry::FlatSurface flat;
  sfem::ReferenceOptions opt;
  opt.n = 128;
  opt.dt = 1.0;
  opt.t_end = 2000.0;
  const auto run = sfem::run_reference(flat, physics::GrayScottParams{},
                                       physics::InitialCondition{}, opt);
  const auto v = metrics::summarize(run.snapshots.back().V);
  return {v.std > 0.03, fmt("V std %.4f at t = 2000 (mean %.4f, max %.4f)", v.std, v.mean, v.max)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome gradient_oracle() {
  network::NetworkConfig cfg;
  cfg.fourier_features = 16;
  cfg.width = 24;
  cfg.depth = 2;
  const auto emb = network::make_embedding(cfg);
  auto net = network::init_params(cfg);
  const trainer::Problem prob{geometry::HeightField{}, physics::GrayScottParams{},
                              physics::InitialCondition{}, false};
  trainer::TrainConfig tc;
  tc.collocation_batch = 48;
  tc.bc_batch = 48;
  tc.ic_batch = 48;
  tc.mass_points = 40;
  tc.mass_slices = 3;
  tc.T_horizon = 200.0;
  trainer::Rng rng(7);
  const auto batches = trainer::draw_batches(prob, tc, rng);

  const std::array<const char*, 4> names = {"pde", "bc", "ic", "mass"};
  std::string detail;
  bool ok = true;
  for (std::size_t chunk : {std::size_t{1024}, std::size_t{16}}) {
    tc.chunk_size = chunk;
    const auto ev = trainer::make_evaluator(prob, tc);
    for (int c = 0; c < 4; ++c) {
      physics::LossWeights w{0, 0, 0, 0};
      (c == 0 ? w.pde : c == 1 ? w.bc : c == 2 ? w.ic : w.mass) = 1.0;
      std::vector<double> grad(net.size());
      ev.evaluate(net, emb, batches, w, grad);
      std::mt19937_64 drng(100 + c);
      std::normal_distribution<double> normal;
      double worst = 0.0;
      for (int d = 0; d < 10; ++d) {
        std::vector<double> dir(net.size());
        double norm = 0.0;
        for (double& x : dir) {
          x = normal(drng);
          norm += x * x;
        }
        for (double& x : dir) x /= std::sqrt(norm);
        const double eps = 1e-5;
        const auto theta = net.theta;
        double an = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) an += grad[i] * dir[i];
        for (std::size_t i = 0; i < dir.size(); ++i) net.theta[i] = theta[i] + eps * dir[i];
        const double lp = ev.evaluate(net, emb, batches, w).total;
        for (std::size_t i = 0; i < dir.size(); ++i) net.theta[i] = theta[i] - eps * dir[i];
        const double lm = ev.evaluate(net, emb, batches, w).total;
        net.theta = theta;
        const double fd = (lp - lm) / (2 * eps);
        worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(fd), std::abs(an), 1e-300}));
      }
      ok = ok && worst < 1e-4;
      detail += fmt("%s%s/%zu %.1e", detail.empty() ? "" : ", ", names[c], chunk, worst);
    }
  }
  return {ok, "max relative error per component/chunk: " + detail};
}

// ---- 8, 9 -------------------------------------------------------------------

struct TrainedRun {
  network::FourierEmbedding emb;
  trainer::TrainResult result;
};

TrainedRun train_ci_small(double lambda_max) {
  auto c = ci_small();
  c.train.lambda_max = lambda_max;
  const trainer::Problem prob{geometry::HeightField(config::manifold_spec(c)), c.physics.gs,
                              physics::InitialCondition(c.physics.ic), c.physics.mass_includes_v};
  TrainedRun r{network::make_embedding(c.network), {}};
  r.result = trainer::train(network::init_params(c.network), r.emb, prob, config::train_config(c, 1));
  return r;
}

std::map<double, TrainedRun>& trained_cache() {
  static std::map<double, TrainedRun> cache;
  return cache;
}

const TrainedRun& trained(double lambda_max) {
  auto& cache = trained_cache();
  auto it = cache.find(lambda_max);
  if (it == cache.end()) it = cache.emplace(lambda_max, train_ci_small(lambda_max)).first;
  return it->second;
}

Outcome training_smoke() {
  const auto c = ci_small();
  const auto& h = trained(c.train.lambda_max).result.history;
  if (h.size() != static_cast<std::size_t>(c.train.n_epochs)) return {false, "history length mismatch"};
  const double drop = h.front().total / h.back().total;
  bool anneal_ok = true;
  for (const auto& e : h) {
    const double expect =
        c.train.lambda_max * std::min(1.0, static_cast<double>(e.epoch) / c.train.anneal_epochs);
    anneal_ok = anneal_ok && e.lambda_mass == expect;
  }
  const double bc = h.back().l_bc;
  return {drop >= 100.0 && bc < 1e-4 && anneal_ok,
          fmt("total %.3e -> %.3e (x%.1f), final L_BC %.3e, anneal trace %s", h.front().total,
              h.back().total, drop, bc, anneal_ok ? "exact" : "MISMATCH")};
}

Outcome mass_ordering() {
  const auto c = ci_small();
  const geometry::HeightField surface(config::manifold_spec(c));
  sfem::ReferenceOptions opt;
  opt.n = c.sfem.n;
  opt.dt = c.sfem.dt;
  opt.t_end = c.physics.T;
  opt.checkpoints = c.sfem.checkpoints;
  const auto ref = sfem::run_reference(surface, c.physics.gs,
                                       physics::InitialCondition(c.physics.ic), opt);
  auto report = [&](double lambda_max) {
    const auto& r = trained(lambda_max);
    return metrics::compare(r.result.params, r.emb, surface, ref, c.physics.gs, c.physics.T,
                            c.metrics.early_window, 0);
  };
  const auto with = report(c.train.lambda_max);
  const auto without = report(0.0);
  const bool finite = std::isfinite(with.mass_violation_pinn) &&
                      std::isfinite(with.mass_violation_sfem) &&
                      std::isfinite(without.mass_violation_pinn);
  return {finite && with.mass_violation_pinn < without.mass_violation_pinn,
          fmt("E_mass PINN(lambda_max=%g) %.4e, PINN(lambda_max=0) %.4e, SFEM %.4e",
              c.train.lambda_max, with.mass_violation_pinn, without.mass_violation_pinn,
              with.mass_violation_sfem)};
}

// ---- 10 ---------------------------------------------------------------------

Outcome geometry_calibration() {
  const auto s = metrics::curvature_stats(geometry::HeightField{}, 201);
  const bool ok = s.area >= 1.4 && s.area <= 1.9 && s.det_g.mean >= 2.0 && s.det_g.mean <= 3.3 &&
                  s.det_g.min >= 1.0 && s.z.min >= -0.2 && s.z.max <= 0.2;
  return {ok, fmt("area %.4f, mean det g %.4f, min det g %.6f, elevation [%.4f, %.4f]", s.area,
                  s.det_g.mean, s.det_g.min, s.z.min, s.z.max)};
}

// ---- 11 ---------------------------------------------------------------------

Outcome relative_l2_cases() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  std::vector<double> ref(500), w(500), twice(500);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref[i] = unit(rng);
    w[i] = unit(rng);
    twice[i] = 2.0 * ref[i];
  }
  const double h = metrics::relative_l2(twice, ref, w);
  const double z = metrics::relative_l2(ref, ref, w);
  bool threw = false;
  try {
    const std::vector<double> zero(ref.size(), 0.0);
    (void)metrics::relative_l2(ref, zero, w);
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::ZeroReference;
  }
  return {h == 1.0 && z == 0.0 && threw,
          fmt("2*ref -> %.17g, ref -> %.17g, zero reference %s", h, z,
              threw ? "rejected" : "NOT rejected")};
}

// ---- 12 ---------------------------------------------------------------------

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(IMPINN_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {};
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int rc = pclose(p);
  if (rc != 0) return {};
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  const auto nl = out.rfind('\n');
  return nl == std::string::npos ? out : out.substr(nl + 1);
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "impinn-acceptance-determinism";
  fs::remove_all(root);
  const std::string common =
      " --preset ci-small --out " + root.string() +
      " --set train.epochs=30 --set train.anneal_epochs=10 --set train.collocation_batch=256"
      " --set physics.T=20 --set sfem.n=24 --set sfem.checkpoints=[5,10]"
      " --set metrics.early_window=10 --set metrics.stats_resolution=101";
  std::vector<std::string> failures;
  std::size_t compared = 0;
  std::string model;
  for (const std::string cmd : {"gen-manifold", "train", "solve-sfem", "compare", "export"}) {
    std::string extra;
    if (cmd == "compare" || cmd == "export") extra = " --model " + model;
    const std::string threads = " --threads 1";
    const std::string a = run_cli(cmd + common + extra + threads);
    const std::string b = run_cli(cmd + common + extra + " --threads 2");
    if (a.empty() || b.empty()) {
      failures.push_back(cmd + " (command failed)");
      continue;
    }
    if (cmd == "train") model = (fs::path(a) / "model.ckpt").string();
    const auto fa = csv_files(a), fb = csv_files(b);
    if (fa.empty() || fa.size() != fb.size()) {
      failures.push_back(cmd + " (file sets differ)");
      continue;
    }
    for (const auto& [name, body] : fa) {
      ++compared;
      auto it = fb.find(name);
      if (it == fb.end() || it->second != body) failures.push_back(cmd + "/" + name);
    }
  }
  fs::remove_all(root);
  std::string detail = fmt("%zu CSV files compared across reruns", compared);
  for (const auto& f : failures) detail += "; differs: " + f;
  return {failures.empty() && compared > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"parameter count of the default network", parameter_count},
      {"Laplace-Beltrami jets vs finite differences", laplacian_oracle},
      {"Euclidean reduction of the residual pipeline", euclidean_reduction},
      {"SFEM spectrum and heat-mode decay", sfem_spectrum},
      {"SFEM mass conservation under pure diffusion", exact_conservation},
      {"SFEM pattern onset", pattern_onset},
      {"parameter gradients vs finite differences", gradient_oracle},
      {"ci-small training smoke", training_smoke},
      {"mass-constraint ablation ordering", mass_ordering},
      {"default manifold calibration", geometry_calibration},
      {"relative L2 homogeneity and zero cases", relative_l2_cases},
      {"bit-identical CSV reruns", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", id, o.pass ? "PASS" : "FAIL",
                criteria[k].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
