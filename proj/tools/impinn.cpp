// impinn: command-line driver.
//
//   impinn gen-manifold [opts]            surface samples, mesh and statistics
//   impinn train [opts]                   fit the neural field, write history and model
//   impinn solve-sfem [opts]              finite-element reference run
//   impinn compare [opts] [--model F]     neural field vs reference (trains if no model)
//   impinn export --model F [opts]        neural-field snapshots as CSV/VTK/PPM
//
// Common options: --config, --preset, --set key=value (repeatable), --out, --threads.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "impinn/config.hpp"
#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/io.hpp"
#include "impinn/metrics.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"
#include "impinn/presets_data.hpp"
#include "impinn/sfem.hpp"
#include "impinn/trainer.hpp"

namespace fs = std::filesystem;
using namespace impinn;

namespace {

struct Options {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::string out;
  int threads = -1;
  std::string model;
};

class Log {
 public:
  explicit Log(const fs::path& path) : file_(path) {
    if (!file_) throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  template <class... A>
  void operator()(const char* fmt, A... args) {
    char buf[1024];
    if constexpr (sizeof...(A) == 0) std::snprintf(buf, sizeof buf, "%s", fmt);
    else std::snprintf(buf, sizeof buf, fmt, args...);
    file_ << buf << '\n';
    file_.flush();
    std::cerr << buf << '\n';
  }

 private:
  std::ofstream file_;
};

struct Run {
  config::RunConfig cfg;
  std::string echo;
  int threads = 1;
  fs::path dir;
  std::optional<Log> log;

  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

config::RunConfig resolve_config(const Options& o) {
  config::RunConfig c;
  if (!o.preset.empty()) {
    if (o.preset == "paper-full") {
      c = config::apply_text(c, config::presets::kPaperFull, "preset paper-full");
    } else if (o.preset == "ci-small") {
      c = config::apply_text(c, config::presets::kCiSmall, "preset ci-small");
    } else {
      throw Error(ErrorKind::Config,
                  "unknown preset '" + o.preset + "' (known: paper-full, ci-small)");
    }
  }
  if (!o.config_path.empty()) c = config::apply_text(c, config::read_file(o.config_path), o.config_path);
  for (const auto& s : o.overrides) config::apply_override(c, s);
  if (!o.out.empty()) c.output.directory = o.out;
  if (o.threads >= 0) c.threads = o.threads;
  config::validate(c);
  return c;
}

Run open_run(const std::string& command, const Options& o) {
  Run r;
  r.cfg = resolve_config(o);
  r.echo = config::echo(r.cfg);
  r.threads = r.cfg.threads > 0 ? r.cfg.threads
                                 : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::localtime(&now));
  char hash[17];
  std::snprintf(hash, sizeof hash, "%08llx",
                static_cast<unsigned long long>(fnv1a(r.echo) & 0xffffffffULL));
  const fs::path base = fs::path(r.cfg.output.directory) /
                        (command + "-" + stamp + "-" + hash);
  fs::path dir = base;
  for (int k = 2; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create run directory " + dir.string());
  r.dir = dir;

  std::ofstream echo_file(dir / "config.echo");
  echo_file << "# " << command << "\n" << r.echo;
  if (!echo_file) throw Error(ErrorKind::Io, "cannot write config.echo");
  r.log.emplace(dir / "log.txt");
  (*r.log)("impinn %s", command.c_str());
  (*r.log)("run directory: %s", dir.string().c_str());
  (*r.log)("threads: %d", r.threads);
  return r;
}

std::string time_tag(double t) { return "t" + io::format_number(t, 9); }

// ---- grid helpers -----------------------------------------------------------

// Mesh vertex (i, j) sits at index j(n+1)+i with v = j/n; image row 0 is v = 1.
std::vector<double> to_image(const sfem::TriMesh& mesh, std::span<const double> f) {
  const int s = mesh.n + 1;
  std::vector<double> img(static_cast<std::size_t>(s) * s);
  for (int row = 0; row < s; ++row) {
    const int j = mesh.n - row;
    for (int i = 0; i < s; ++i) {
      img[static_cast<std::size_t>(row) * s + i] = f[static_cast<std::size_t>(j) * s + i];
    }
  }
  return img;
}

// |grad f| with the surface metric, from grid differences in (u, v).
template <geometry::Surface S>
std::vector<double> grid_grad_norm(const S& surface, const sfem::TriMesh& mesh,
                                   std::span<const double> f) {
  const int n = mesh.n;
  const int s = n + 1;
  const double h = 1.0 / n;
  auto at = [&](int i, int j) { return f[static_cast<std::size_t>(j) * s + i]; };
  std::vector<double> out(f.size());
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int i0 = std::max(i - 1, 0), i1 = std::min(i + 1, n);
      const int j0 = std::max(j - 1, 0), j1 = std::min(j + 1, n);
      const double fu = (at(i1, j) - at(i0, j)) / ((i1 - i0) * h);
      const double fv = (at(i, j1) - at(i, j0)) / ((j1 - j0) * h);
      const auto m = geometry::metric_at(surface, i * h, j * h);
      const double q = m.g_inv[0][0] * fu * fu + 2.0 * m.g_inv[0][1] * fu * fv +
                       m.g_inv[1][1] * fv * fv;
      out[static_cast<std::size_t>(j) * s + i] = std::sqrt(std::max(q, 0.0));
    }
  }
  return out;
}

template <geometry::Surface S>
void write_field_images(Run& r, const S& surface, const sfem::TriMesh& mesh,
                        const sfem::FieldSnapshot& snap, const std::string& prefix) {
  if (!r.cfg.output.ppm) return;
  const int side = mesh.n + 1;
  std::vector<double> uvv(snap.U.size()), phi(snap.U.size());
  for (std::size_t i = 0; i < snap.U.size(); ++i) {
    uvv[i] = metrics::reaction_rate(snap.U[i], snap.V[i]);
    phi[i] = geometry::chemical_potential(mesh.uv[i][0], mesh.uv[i][1]);
  }
  const auto grad = grid_grad_norm(surface, mesh, snap.U);
  io::write_ppm(r.path(prefix + "_U.ppm"), side, side, to_image(mesh, snap.U));
  io::write_ppm(r.path(prefix + "_V.ppm"), side, side, to_image(mesh, snap.V));
  io::write_ppm(r.path(prefix + "_gradU.ppm"), side, side, to_image(mesh, grad));
  io::write_ppm(r.path(prefix + "_UV2.ppm"), side, side, to_image(mesh, uvv));
  io::write_ppm(r.path(prefix + "_phi.ppm"), side, side, to_image(mesh, phi));
}

void write_snapshot(Run& r, const sfem::TriMesh& mesh, const physics::GrayScottParams& p,
                    const sfem::FieldSnapshot& snap, const std::string& prefix) {
  const std::string tag = prefix + "_" + time_tag(snap.time);
  io::CsvWriter csv(r.path(tag + ".csv"), {"u", "v", "x", "y", "z", "U", "V"});
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto& x = mesh.positions[i];
    csv.row({mesh.uv[i][0], mesh.uv[i][1], x[0], x[1], x[2], snap.U[i], snap.V[i]});
  }
  csv.close();
  if (!r.cfg.output.vtk) return;
  std::vector<double> F(mesh.num_vertices()), phi(mesh.num_vertices());
  for (std::size_t i = 0; i < F.size(); ++i) {
    F[i] = physics::modulated_feed(p, mesh.uv[i][0], mesh.uv[i][1]);
    phi[i] = geometry::chemical_potential(mesh.uv[i][0], mesh.uv[i][1]);
  }
  const std::vector<io::NamedField> fields = {
      {"U", snap.U}, {"V", snap.V}, {"F", F}, {"phi", phi}};
  io::write_vtk(r.path(tag + ".vtk"), mesh, fields, prefix + " t=" + io::format_number(snap.time));
}

trainer::Problem make_problem(const config::RunConfig& c) {
  return {geometry::HeightField(config::manifold_spec(c)), c.physics.gs,
          physics::InitialCondition(c.physics.ic), c.physics.mass_includes_v};
}

std::vector<double> snapshot_times(const config::RunConfig& c) {
  std::vector<double> t{0.0};
  for (double x : c.sfem.checkpoints) t.push_back(x);
  t.push_back(c.physics.T);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// ---- commands ---------------------------------------------------------------

int cmd_gen_manifold(Run& r) {
  const geometry::HeightField surface(config::manifold_spec(r.cfg));
  const int res = r.cfg.metrics.stats_resolution;
  {
    io::CsvWriter csv(r.path("manifold.csv"), {"u", "v", "z", "det_g", "K", "H", "phi"});
    const double h = 1.0 / (res - 1);
    for (int j = 0; j < res; ++j) {
      for (int i = 0; i < res; ++i) {
        const double u = i * h, v = j * h;
        const auto jet = surface.height(u, v, 2);
        const auto k = geometry::curvature_from_jet(jet);
        csv.row({u, v, jet.z, geometry::metric_from_jet(jet).det_g, k.gaussian_K, k.mean_H,
                 geometry::chemical_potential(u, v)});
      }
    }
    csv.close();
  }
  const auto st = metrics::curvature_stats(surface, res);
  {
    io::CsvWriter csv(r.path("manifold_stats.csv"),
                      {"resolution", "area", "z_min", "z_max", "det_g_mean", "det_g_min",
                       "det_g_max", "K_mean", "K_min", "K_max", "H_mean", "H_min", "H_max"});
    csv.row({static_cast<double>(res), st.area, st.z.min, st.z.max, st.det_g.mean,
             st.det_g.min, st.det_g.max, st.K.mean, st.K.min, st.K.max, st.H.mean, st.H.min,
             st.H.max});
    csv.close();
  }
  (*r.log)("area %.6f  elevation [%.4f, %.4f]  det g mean %.4f min %.6f max %.4f", st.area,
           st.z.min, st.z.max, st.det_g.mean, st.det_g.min, st.det_g.max);

  const sfem::TriMesh mesh = sfem::build_mesh(surface, r.cfg.sfem.n);
  std::vector<double> z(mesh.num_vertices()), K(z.size()), H(z.size()), phi(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto [u, v] = mesh.uv[i];
    const auto jet = surface.height(u, v, 2);
    const auto k = geometry::curvature_from_jet(jet);
    z[i] = jet.z;
    K[i] = k.gaussian_K;
    H[i] = k.mean_H;
    phi[i] = geometry::chemical_potential(u, v);
  }
  if (r.cfg.output.vtk) {
    const std::vector<io::NamedField> fields = {{"z", z}, {"K", K}, {"H", H}, {"phi", phi}};
    io::write_vtk(r.path("manifold.vtk"), mesh, fields, "manifold");
  }
  if (r.cfg.output.ppm) {
    const int side = mesh.n + 1;
    io::write_ppm(r.path("manifold_z.ppm"), side, side, to_image(mesh, z));
    io::write_ppm(r.path("manifold_K.ppm"), side, side, to_image(mesh, K));
    io::write_ppm(r.path("manifold_phi.ppm"), side, side, to_image(mesh, phi));
  }
  return 0;
}

void write_history(Run& r, const trainer::LossHistory& h) {
  io::CsvWriter csv(r.path("loss_history.csv"),
                    {"epoch", "l_pde", "l_bc", "l_ic", "l_mass", "lambda_mass", "total", "wall_ms"});
  for (const auto& e : h) {
    csv.row({static_cast<double>(e.epoch), e.l_pde, e.l_bc, e.l_ic, e.l_mass, e.lambda_mass,
             e.total, e.wall_ms});
  }
  csv.close();
}

struct Trained {
  network::FourierEmbedding emb;
  network::NetworkParams params;
  bool diverged = false;
};

Trained run_training(Run& r) {
  const trainer::Problem prob = make_problem(r.cfg);
  const trainer::TrainConfig tc = config::train_config(r.cfg, r.threads);
  Trained t{network::make_embedding(r.cfg.network), network::init_params(r.cfg.network)};
  (*r.log)("parameters: %zu", t.params.size());
  fs::create_directories(r.dir / "checkpoints");

  trainer::TrainHooks hooks;
  const int every = std::max(1, tc.n_epochs / 20);
  hooks.on_epoch = [&](const trainer::EpochRecord& e) {
    if (e.epoch % every == 0 || e.epoch + 1 == tc.n_epochs) {
      (*r.log)("epoch %6d  total %.4e  pde %.3e  bc %.3e  ic %.3e  mass %.3e  lambda %.4f",
               e.epoch, e.total, e.l_pde, e.l_bc, e.l_ic, e.l_mass, e.lambda_mass);
    }
  };
  hooks.on_checkpoint = [&](int epoch, const network::NetworkParams& p) {
    char name[64];
    std::snprintf(name, sizeof name, "checkpoints/model-%06d.ckpt", epoch);
    network::save_checkpoint(r.path(name), {r.echo, t.emb, p});
  };
  const auto start = std::chrono::steady_clock::now();
  trainer::TrainResult res = trainer::train(t.params, t.emb, prob, tc, hooks);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  (*r.log)("training time %.2f s (%.4f s/epoch)", secs,
           res.history.empty() ? 0.0 : secs / res.history.size());
  write_history(r, res.history);
  t.params = std::move(res.params);
  t.diverged = res.diverged;
  network::save_checkpoint(r.path("model.ckpt"), {r.echo, t.emb, t.params});
  if (t.diverged) (*r.log)("training diverged; model.ckpt holds the last finite parameters");
  return t;
}

int cmd_train(Run& r) {
  const Trained t = run_training(r);
  if (t.diverged) throw Error(ErrorKind::Divergence, "total loss was non-finite twice in a row");
  return 0;
}

sfem::ReferenceRun run_sfem(Run& r, const geometry::HeightField& surface) {
  sfem::ReferenceOptions opt;
  opt.n = r.cfg.sfem.n;
  opt.dt = r.cfg.sfem.dt;
  opt.t_end = r.cfg.physics.T;
  opt.checkpoints = r.cfg.sfem.checkpoints;
  const auto ref = sfem::run_reference(surface, r.cfg.physics.gs,
                                       physics::InitialCondition(r.cfg.physics.ic), opt);
  (*r.log)("sfem: %zu vertices, %.4f s/step", ref.mesh.num_vertices(), ref.seconds_per_step);
  return ref;
}

void write_sfem(Run& r, const geometry::HeightField& surface, const sfem::ReferenceRun& ref) {
  const double area = ref.mesh.total_area();
  io::CsvWriter mass(r.path("sfem_mass.csv"),
                     {"time", "mass_U", "dmass_dt", "net_source", "residual", "U_mean", "U_std",
                      "V_mean", "V_std"});
  for (std::size_t k = 0; k < ref.snapshots.size(); ++k) {
    const auto& s = ref.snapshots[k];
    const auto& a = ref.audits[k];
    const auto su = metrics::summarize(s.U), sv = metrics::summarize(s.V);
    const long step = std::lround(s.time / r.cfg.sfem.dt);
    mass.row({s.time, ref.mass_U[static_cast<std::size_t>(step)], a.dmass_dt, a.net_source,
              std::abs(a.dmass_dt - a.net_source) / (r.cfg.physics.gs.F0 * area), su.mean, su.std,
              sv.mean, sv.std});
    write_snapshot(r, ref.mesh, r.cfg.physics.gs, s, "sfem");
  }
  mass.close();
  write_field_images(r, surface, ref.mesh, ref.snapshots.back(), "sfem");
  const auto& last = ref.snapshots.back();
  (*r.log)("sfem t=%g: V std %.4e, U mean %.4f", last.time, metrics::summarize(last.V).std,
           metrics::summarize(last.U).mean);
}

int cmd_solve_sfem(Run& r) {
  const geometry::HeightField surface(config::manifold_spec(r.cfg));
  const auto ref = run_sfem(r, surface);
  write_sfem(r, surface, ref);
  return 0;
}

Trained load_model(Run& r, const std::string& path) {
  const network::Checkpoint ck = network::load_checkpoint(path);
  (*r.log)("model: %s (%zu parameters)", path.c_str(), ck.params.size());
  return {ck.embedding, ck.params, false};
}

int cmd_compare(Run& r, const Options& o) {
  const geometry::HeightField surface(config::manifold_spec(r.cfg));
  Trained t = o.model.empty() ? run_training(r) : load_model(r, o.model);
  const auto ref = run_sfem(r, surface);
  write_sfem(r, surface, ref);
  const auto rep = metrics::compare(t.params, t.emb, surface, ref, r.cfg.physics.gs,
                                    r.cfg.physics.T, r.cfg.metrics.early_window, r.echo.size());

  io::CsvWriter rows(r.path("comparison.csv"),
                     {"time", "rel_l2_U", "rel_l2_V", "mass_residual_pinn", "mass_residual_sfem"});
  for (const auto& row : rep.rows) {
    rows.row({row.time, row.rel_l2_U, row.rel_l2_V, row.mass_residual_pinn,
              row.mass_residual_sfem});
  }
  rows.close();
  io::CsvWriter sum(r.path("comparison_summary.csv"),
                    {"rel_l2_U", "rel_l2_V", "early_window", "e_mass_pinn", "e_mass_sfem",
                     "param_count", "model_bytes", "mesh_vertices", "mesh_dof",
                     "stiffness_nonzeros"});
  sum.row({rep.rel_l2_U, rep.rel_l2_V, rep.early_window, rep.mass_violation_pinn,
           rep.mass_violation_sfem, static_cast<double>(rep.resources.param_count),
           static_cast<double>(rep.resources.model_bytes),
           static_cast<double>(rep.resources.mesh_vertices),
           static_cast<double>(rep.resources.mesh_dof),
           static_cast<double>(rep.resources.stiffness_nonzeros)});
  sum.close();

  std::ofstream txt(r.path("comparison.txt"));
  char line[256];
  std::snprintf(line, sizeof line, "%10s %14s %14s %14s %14s\n", "time", "relL2(U)", "relL2(V)",
                "mass(PINN)", "mass(SFEM)");
  txt << line;
  for (const auto& row : rep.rows) {
    std::snprintf(line, sizeof line, "%10g %14.6e %14.6e %14.6e %14.6e\n", row.time,
                  row.rel_l2_U, row.rel_l2_V, row.mass_residual_pinn, row.mass_residual_sfem);
    txt << line;
  }
  std::snprintf(line, sizeof line,
                "\nrelative L2 (0 < t < %g): U %.6e  V %.6e\nE_mass: PINN %.6e  SFEM %.6e\n",
                rep.early_window, rep.rel_l2_U, rep.rel_l2_V, rep.mass_violation_pinn,
                rep.mass_violation_sfem);
  txt << line;
  std::snprintf(line, sizeof line,
                "parameters %zu  model bytes %zu  mesh vertices %zu  dof %zu  nonzeros %zu\n",
                rep.resources.param_count, rep.resources.model_bytes,
                rep.resources.mesh_vertices, rep.resources.mesh_dof,
                rep.resources.stiffness_nonzeros);
  txt << line;
  if (!txt) throw Error(ErrorKind::Io, "failed writing comparison.txt");
  txt.close();

  const auto pinn_last = metrics::sample_network(t.params, t.emb, ref.mesh, r.cfg.physics.T,
                                                 ref.snapshots.back().time);
  write_field_images(r, surface, ref.mesh, pinn_last, "pinn");
  (*r.log)("relative L2 U %.4e V %.4e; E_mass PINN %.4e SFEM %.4e", rep.rel_l2_U, rep.rel_l2_V,
           rep.mass_violation_pinn, rep.mass_violation_sfem);
  if (t.diverged) throw Error(ErrorKind::Divergence, "training diverged");
  return 0;
}

int cmd_export(Run& r, const Options& o) {
  if (o.model.empty()) throw Error(ErrorKind::Config, "export needs --model <checkpoint>");
  const geometry::HeightField surface(config::manifold_spec(r.cfg));
  const Trained t = load_model(r, o.model);
  const sfem::TriMesh mesh = sfem::build_mesh(surface, r.cfg.sfem.n);
  sfem::FieldSnapshot last;
  for (double time : snapshot_times(r.cfg)) {
    last = metrics::sample_network(t.params, t.emb, mesh, r.cfg.physics.T, time);
    write_snapshot(r, mesh, r.cfg.physics.gs, last, "pinn");
  }
  write_field_images(r, surface, mesh, last, "pinn");
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::Validation: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::NonFiniteGradient:
    case ErrorKind::NonFinite:
    case ErrorKind::Divergence: return 4;
    case ErrorKind::DegenerateTriangle:
    case ErrorKind::CgNoConvergence:
    case ErrorKind::ZeroReference: return 5;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-diffusion on a wrinkled surface: neural field and finite-element solvers"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Config file")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "Built-in preset: paper-full or ci-small");
    sub->add_option("--set", o.overrides, "Override, e.g. --set train.epochs=100 (repeatable)");
    sub->add_option("--out", o.out, "Output root (default: output.directory)");
    sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  };
  auto* gen = app.add_subcommand("gen-manifold", "Sample the surface, export mesh and statistics");
  auto* tr = app.add_subcommand("train", "Train the neural field");
  auto* sf = app.add_subcommand("solve-sfem", "Run the finite-element reference");
  auto* cmp = app.add_subcommand("compare", "Compare a trained model against the reference");
  auto* ex = app.add_subcommand("export", "Export neural-field snapshots");
  for (auto* s : {gen, tr, sf, cmp, ex}) add_common(s);
  cmp->add_option("--model", o.model, "Checkpoint to evaluate (trains one if omitted)")
      ->check(CLI::ExistingFile);
  ex->add_option("--model", o.model, "Checkpoint to evaluate")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<Run> run;
  try {
    run.emplace(open_run(command, o));
    int rc = 0;
    if (command == "gen-manifold") rc = cmd_gen_manifold(*run);
    else if (command == "train") rc = cmd_train(*run);
    else if (command == "solve-sfem") rc = cmd_solve_sfem(*run);
    else if (command == "compare") rc = cmd_compare(*run, o);
    else if (command == "export") rc = cmd_export(*run, o);
    (*run->log)("done");
    std::cout << run->dir.string() << '\n';
    return rc;
  } catch (const Error& e) {
    if (run && run->log) (*run->log)("error: %s", e.what());
    else std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    if (run && run->log) (*run->log)("error: %s", e.what());
    else std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
