#pragma once

// Run configuration: a small INI-style text format, validated into typed
// sections with every field defaulted.
//
// Grammar (one statement per line):
//   # comment                      (also after a value)
//   [section]                      following keys live in "section."
//   key = value                    key may itself be dotted
//   value := number | true | false | "string" | [number, number, ...]
// Unknown keys are rejected. `--set section.key=value` overrides use the
// same value syntax.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/geometry.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"
#include "impinn/trainer.hpp"

namespace impinn::config {

struct ManifoldSection {
  std::string kind = "cloth";  // "cloth" or "flat"
  std::vector<double> wrinkle_amplitude{0.05, 0.03, 0.02};
  std::vector<double> wrinkle_freq_u{2.0, 5.0, 9.0};
  std::vector<double> wrinkle_freq_v{3.0, 7.0, 11.0};
  std::vector<double> wrinkle_phase{0.0, 1.3, 2.1};
  geometry::GrfSpec grf{};
  double sag_amplitude = 0.05;
};

struct PhysicsSection {
  physics::GrayScottParams gs{};
  double T = 2000.0;
  physics::InitialConditionSpec ic{};
  bool mass_includes_v = false;
};

struct SfemSection {
  int n = 200;
  double dt = 1.0;
  std::vector<double> checkpoints{10.0, 50.0, 100.0, 500.0, 1000.0, 2000.0};
};

struct MetricsSection {
  double early_window = 500.0;
  int stats_resolution = 201;
  int image_resolution = 128;
};

struct OutputSection {
  std::string directory = "runs";
  bool wall_times = false;
  bool vtk = true;
  bool ppm = true;
};

struct RunConfig {
  int threads = 0;  // 0: all available cores
  ManifoldSection manifold;
  PhysicsSection physics;
  network::NetworkConfig network;
  trainer::TrainConfig train;
  SfemSection sfem;
  MetricsSection metrics;
  OutputSection output;
};

// ---- values -----------------------------------------------------------------

struct Value {
  enum class Kind { Number, Bool, String, List } kind = Kind::Number;
  std::string text;                // number literal or string contents
  std::vector<std::string> items;  // list elements (number literals)
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool is_number(std::string_view s) {
  if (s.empty()) return false;
  double d = 0.0;
  const char* b = s.data();
  if (*b == '+') ++b;
  const auto r = std::from_chars(b, s.data() + s.size(), d);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool is_key(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return s.front() != '.' && s.back() != '.';
}

// Strips a trailing comment that is not inside a string.
inline std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::Parse, where + ": " + msg);
}

inline Value parse_value(std::string_view s, const std::string& where) {
  s = trim(s);
  Value v;
  if (s.empty()) parse_fail(where, "missing value");
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::Bool;
    v.text = std::string(s);
    return v;
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') parse_fail(where, "unterminated string");
    const auto body = s.substr(1, s.size() - 2);
    if (body.find('"') != std::string_view::npos) parse_fail(where, "stray quote in string");
    v.kind = Value::Kind::String;
    v.text = std::string(body);
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') parse_fail(where, "unterminated list");
    v.kind = Value::Kind::List;
    auto body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (!is_number(item)) parse_fail(where, "list items must be numbers");
      v.items.emplace_back(item);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) parse_fail(where, "trailing comma in list");
    }
    return v;
  }
  if (!is_number(s)) parse_fail(where, "cannot parse value '" + std::string(s) + "'");
  v.text = std::string(s);
  return v;
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// ---- field registry ---------------------------------------------------------

struct Field {
  std::string key;
  std::function<void(RunConfig&, const Value&)> set;
  std::function<std::string(const RunConfig&)> get;
};

namespace detail {

[[noreturn]] inline void type_fail(const std::string& key, const char* want) {
  throw Error(ErrorKind::Validation, key + ": expected " + want);
}

inline double to_double(const std::string& key, const std::string& text) {
  double d = 0.0;
  const char* b = text.data();
  if (*b == '+') ++b;
  const auto r = std::from_chars(b, text.data() + text.size(), d);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(d)) {
    type_fail(key, "a finite number");
  }
  return d;
}

template <class I>
I to_integer(const std::string& key, const std::string& text) {
  I out{};
  const char* b = text.data();
  if (*b == '+') ++b;
  const auto r = std::from_chars(b, text.data() + text.size(), out);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) type_fail(key, "an integer");
  return out;
}

template <class Access>
Field real(std::string key, Access a) {
  return {key,
          [key, a](RunConfig& c, const Value& v) {
            if (v.kind != Value::Kind::Number) type_fail(key, "a number");
            a(c) = to_double(key, v.text);
          },
          [a](const RunConfig& c) { return fmt(a(c)); }};
}

template <class Access>
Field integer(std::string key, Access a) {
  return {key,
          [key, a](RunConfig& c, const Value& v) {
            if (v.kind != Value::Kind::Number) type_fail(key, "an integer");
            using T = std::remove_reference_t<decltype(a(c))>;
            a(c) = to_integer<T>(key, v.text);
          },
          [a](const RunConfig& c) { return std::to_string(a(c)); }};
}

template <class Access>
Field flag(std::string key, Access a) {
  return {key,
          [key, a](RunConfig& c, const Value& v) {
            if (v.kind != Value::Kind::Bool) type_fail(key, "true or false");
            a(c) = v.text == "true";
          },
          [a](const RunConfig& c) { return std::string(a(c) ? "true" : "false"); }};
}

template <class Access>
Field text(std::string key, Access a) {
  return {key,
          [key, a](RunConfig& c, const Value& v) {
            if (v.kind != Value::Kind::String) type_fail(key, "a quoted string");
            a(c) = v.text;
          },
          [a](const RunConfig& c) { return "\"" + a(c) + "\""; }};
}

template <class Access>
Field reals(std::string key, Access a) {
  return {key,
          [key, a](RunConfig& c, const Value& v) {
            if (v.kind != Value::Kind::List) type_fail(key, "a list of numbers");
            std::vector<double> out;
            for (const auto& item : v.items) out.push_back(to_double(key, item));
            a(c) = std::move(out);
          },
          [a](const RunConfig& c) {
            std::string s = "[";
            for (std::size_t i = 0; i < a(c).size(); ++i) {
              if (i) s += ", ";
              s += fmt(a(c)[i]);
            }
            return s + "]";
          }};
}

}  // namespace detail

// All settable keys, in echo order.
inline const std::vector<Field>& fields() {
  using namespace detail;
  static const std::vector<Field> all = {
      integer("threads", [](auto& c) -> auto& { return c.threads; }),

      text("manifold.kind", [](auto& c) -> auto& { return c.manifold.kind; }),
      reals("manifold.wrinkle_amplitude", [](auto& c) -> auto& { return c.manifold.wrinkle_amplitude; }),
      reals("manifold.wrinkle_freq_u", [](auto& c) -> auto& { return c.manifold.wrinkle_freq_u; }),
      reals("manifold.wrinkle_freq_v", [](auto& c) -> auto& { return c.manifold.wrinkle_freq_v; }),
      reals("manifold.wrinkle_phase", [](auto& c) -> auto& { return c.manifold.wrinkle_phase; }),
      real("manifold.grf_sigma", [](auto& c) -> auto& { return c.manifold.grf.sigma; }),
      real("manifold.grf_correlation_length", [](auto& c) -> auto& { return c.manifold.grf.correlation_length; }),
      integer("manifold.grf_modes", [](auto& c) -> auto& { return c.manifold.grf.n_modes; }),
      integer("manifold.grf_seed", [](auto& c) -> auto& { return c.manifold.grf.seed; }),
      real("manifold.sag_amplitude", [](auto& c) -> auto& { return c.manifold.sag_amplitude; }),

      real("physics.D_u", [](auto& c) -> auto& { return c.physics.gs.D_u; }),
      real("physics.D_v", [](auto& c) -> auto& { return c.physics.gs.D_v; }),
      real("physics.F0", [](auto& c) -> auto& { return c.physics.gs.F0; }),
      real("physics.k", [](auto& c) -> auto& { return c.physics.gs.k; }),
      real("physics.epsilon", [](auto& c) -> auto& { return c.physics.gs.epsilon; }),
      real("physics.T", [](auto& c) -> auto& { return c.physics.T; }),
      real("physics.ic_sigma", [](auto& c) -> auto& { return c.physics.ic.sigma_init; }),
      real("physics.ic_cutoff", [](auto& c) -> auto& { return c.physics.ic.cutoff; }),
      integer("physics.ic_modes", [](auto& c) -> auto& { return c.physics.ic.n_modes; }),
      integer("physics.ic_seed", [](auto& c) -> auto& { return c.physics.ic.seed; }),
      flag("physics.ic_seed_square", [](auto& c) -> auto& { return c.physics.ic.seed_square; }),
      real("physics.ic_square_size", [](auto& c) -> auto& { return c.physics.ic.square_size; }),
      real("physics.ic_square_U", [](auto& c) -> auto& { return c.physics.ic.square_U; }),
      real("physics.ic_square_V", [](auto& c) -> auto& { return c.physics.ic.square_V; }),
      flag("physics.mass_includes_v", [](auto& c) -> auto& { return c.physics.mass_includes_v; }),

      integer("network.fourier_features", [](auto& c) -> auto& { return c.network.fourier_features; }),
      real("network.sigma_scale", [](auto& c) -> auto& { return c.network.sigma_scale; }),
      integer("network.depth", [](auto& c) -> auto& { return c.network.depth; }),
      integer("network.width", [](auto& c) -> auto& { return c.network.width; }),
      integer("network.embedding_seed", [](auto& c) -> auto& { return c.network.embedding_seed; }),
      integer("network.init_seed", [](auto& c) -> auto& { return c.network.init_seed; }),

      integer("train.epochs", [](auto& c) -> auto& { return c.train.n_epochs; }),
      integer("train.collocation_batch", [](auto& c) -> auto& { return c.train.collocation_batch; }),
      integer("train.bc_batch", [](auto& c) -> auto& { return c.train.bc_batch; }),
      integer("train.ic_batch", [](auto& c) -> auto& { return c.train.ic_batch; }),
      real("train.lr", [](auto& c) -> auto& { return c.train.lr; }),
      real("train.beta1", [](auto& c) -> auto& { return c.train.beta1; }),
      real("train.beta2", [](auto& c) -> auto& { return c.train.beta2; }),
      real("train.adam_eps", [](auto& c) -> auto& { return c.train.adam_eps; }),
      integer("train.anneal_epochs", [](auto& c) -> auto& { return c.train.anneal_epochs; }),
      real("train.lambda_max", [](auto& c) -> auto& { return c.train.lambda_max; }),
      real("train.lambda_pde", [](auto& c) -> auto& { return c.train.lambda_pde; }),
      real("train.lambda_bc", [](auto& c) -> auto& { return c.train.lambda_bc; }),
      real("train.lambda_ic", [](auto& c) -> auto& { return c.train.lambda_ic; }),
      integer("train.seed", [](auto& c) -> auto& { return c.train.seed; }),
      integer("train.checkpoint_every", [](auto& c) -> auto& { return c.train.checkpoint_every; }),
      integer("train.mass_points", [](auto& c) -> auto& { return c.train.mass_points; }),
      integer("train.mass_slices", [](auto& c) -> auto& { return c.train.mass_slices; }),
      integer("train.chunk_size", [](auto& c) -> auto& { return c.train.chunk_size; }),

      integer("sfem.n", [](auto& c) -> auto& { return c.sfem.n; }),
      real("sfem.dt", [](auto& c) -> auto& { return c.sfem.dt; }),
      reals("sfem.checkpoints", [](auto& c) -> auto& { return c.sfem.checkpoints; }),

      real("metrics.early_window", [](auto& c) -> auto& { return c.metrics.early_window; }),
      integer("metrics.stats_resolution", [](auto& c) -> auto& { return c.metrics.stats_resolution; }),
      integer("metrics.image_resolution", [](auto& c) -> auto& { return c.metrics.image_resolution; }),

      text("output.directory", [](auto& c) -> auto& { return c.output.directory; }),
      flag("output.wall_times", [](auto& c) -> auto& { return c.output.wall_times; }),
      flag("output.vtk", [](auto& c) -> auto& { return c.output.vtk; }),
      flag("output.ppm", [](auto& c) -> auto& { return c.output.ppm; }),
  };
  return all;
}

inline const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

inline void set_value(RunConfig& c, const std::string& key, const Value& v,
                      const std::string& where) {
  const Field* f = find_field(key);
  if (f == nullptr) throw Error(ErrorKind::Config, where + ": unknown key '" + key + "'");
  f->set(c, v);
}

// ---- parsing ----------------------------------------------------------------

// Applies the statements in `text` on top of `base`. `origin` names the
// source in error messages.
inline RunConfig apply_text(RunConfig base, std::string_view text,
                            const std::string& origin = "<config>") {
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string_view::npos) {
      if (line.back() != ']') detail::parse_fail(where, "unterminated section header");
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!name.empty() && !detail::is_key(name)) detail::parse_fail(where, "bad section name");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) detail::parse_fail(where, "expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    if (!detail::is_key(key)) detail::parse_fail(where, "bad key '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    set_value(base, full, detail::parse_value(line.substr(eq + 1), where), where);
  }
  return base;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Applies one `key=value` override.
inline void apply_override(RunConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const std::string where = "--set " + std::string(assignment);
  if (eq == std::string_view::npos) detail::parse_fail(where, "expected key=value");
  const auto key = detail::trim(assignment.substr(0, eq));
  if (!detail::is_key(key)) detail::parse_fail(where, "bad key");
  set_value(c, std::string(key), detail::parse_value(assignment.substr(eq + 1), where), where);
}

// ---- conversion and validation ----------------------------------------------

inline geometry::HeightFieldSpec manifold_spec(const RunConfig& c) {
  const auto& m = c.manifold;
  geometry::HeightFieldSpec s;
  s.wrinkles.clear();
  if (m.kind == "flat") {
    s.grf.sigma = 0.0;
    s.grf.n_modes = 1;
    s.sag_amplitude = 0.0;
    return s;
  }
  const std::size_t n = m.wrinkle_amplitude.size();
  for (std::size_t i = 0; i < n; ++i) {
    s.wrinkles.push_back({m.wrinkle_amplitude[i], m.wrinkle_freq_u[i], m.wrinkle_freq_v[i],
                          m.wrinkle_phase[i]});
  }
  s.grf = m.grf;
  s.sag_amplitude = m.sag_amplitude;
  return s;
}

inline trainer::TrainConfig train_config(const RunConfig& c, int threads) {
  trainer::TrainConfig t = c.train;
  t.T_horizon = c.physics.T;
  t.threads = threads;
  t.record_wall_time = c.output.wall_times;
  return t;
}

inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, msg); };
  if (c.threads < 0) fail("threads must be >= 0");
  const auto& m = c.manifold;
  if (m.kind != "cloth" && m.kind != "flat") fail("manifold.kind must be \"cloth\" or \"flat\"");
  if (m.wrinkle_freq_u.size() != m.wrinkle_amplitude.size() ||
      m.wrinkle_freq_v.size() != m.wrinkle_amplitude.size() ||
      m.wrinkle_phase.size() != m.wrinkle_amplitude.size()) {
    fail("manifold.wrinkle_* lists must have equal length");
  }
  if (!(m.grf.sigma >= 0.0) || !(m.grf.correlation_length > 0.0) || m.grf.n_modes < 1) {
    fail("manifold.grf_*: sigma >= 0, correlation_length > 0, modes >= 1 required");
  }
  geometry::HeightField check(manifold_spec(c));
  c.physics.gs.validate();
  if (!(c.physics.T > 0.0)) fail("physics.T must be > 0");
  physics::InitialCondition ic_check(c.physics.ic);
  if (c.network.fourier_features < 1 || c.network.depth < 1 || c.network.width < 1 ||
      !(c.network.sigma_scale >= 0.0)) {
    fail("network.*: fourier_features, depth, width >= 1 and sigma_scale >= 0 required");
  }
  train_config(c, 1).validate();
  if (c.sfem.n < 1) fail("sfem.n must be >= 1");
  if (!(c.sfem.dt > 0.0)) fail("sfem.dt must be > 0");
  const double steps = c.physics.T / c.sfem.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    fail("physics.T must be a multiple of sfem.dt");
  }
  for (double t : c.sfem.checkpoints) {
    if (!(t >= 0.0 && t <= c.physics.T)) fail("sfem.checkpoints must lie in [0, physics.T]");
  }
  if (!(c.metrics.early_window > 0.0)) fail("metrics.early_window must be > 0");
  if (c.metrics.stats_resolution < 100) fail("metrics.stats_resolution must be >= 100");
  if (c.metrics.image_resolution < 2) fail("metrics.image_resolution must be >= 2");
  if (c.output.directory.empty()) fail("output.directory must not be empty");
}

// Canonical text of the resolved config; parsing it gives back an equal
// configuration.
inline std::string echo(const RunConfig& c) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.key.substr(0, dot);
    const std::string name = dot == std::string::npos ? f.key : f.key.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += name + " = " + f.get(c) + "\n";
  }
  return out;
}

inline bool equal(const RunConfig& a, const RunConfig& b) {
  for (const Field& f : fields()) {
    if (f.get(a) != f.get(b)) return false;
  }
  return true;
}

}  // namespace impinn::config
