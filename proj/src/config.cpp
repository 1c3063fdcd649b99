#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "stochper/cli.hpp"

namespace stochper {
namespace {

// A YAML mapping with its dotted path, for diagnostics.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& origin)
      : node_(std::move(node)), path_(std::move(path)), origin_(origin) {
    if (!node_.IsMap()) fail(node_, path_.empty() ? "config must be a mapping" : "'" + path_ + "' must be a mapping");
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const YAML::Mark m = at.Mark();
    std::string where = origin_;
    if (m.line >= 0) where += ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
    throw Error(ErrorKind::Parse, where + ": " + msg);
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, "unknown field '" + field(key.c_str()) + "'");
    }
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }
  YAML::Node raw(const char* key) const { return node_[key]; }
  std::string field(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }
  const std::string& origin() const { return origin_; }

  Section sub(const char* key) const { return Section(node_[key], field(key), origin_); }

  template <class T>
  T get(const char* key, const char* what) const {
    const YAML::Node n = node_[key];
    if (!n.IsScalar()) fail(n, "field '" + field(key) + "': expected " + what);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "field '" + field(key) + "': expected " + what + ", got '" + n.Scalar() + "'");
    }
  }

  double real(const char* key, double def) const { return has(key) ? get<double>(key, "a number") : def; }
  long integer(const char* key, long def) const { return has(key) ? get<long>(key, "an integer") : def; }
  bool boolean(const char* key, bool def) const { return has(key) ? get<bool>(key, "true or false") : def; }
  std::string text(const char* key, const std::string& def) const {
    return has(key) ? get<std::string>(key, "a string") : def;
  }

  std::vector<double> reals(const char* key) const {
    const YAML::Node n = node_[key];
    if (!n.IsSequence()) fail(n, "field '" + field(key) + "': expected a list of numbers");
    std::vector<double> out;
    for (const auto& v : n) {
      try {
        out.push_back(v.as<double>());
      } catch (const YAML::Exception&) {
        fail(v, "field '" + field(key) + "': expected a number");
      }
    }
    return out;
  }

  std::vector<std::string> texts(const char* key) const {
    const YAML::Node n = node_[key];
    if (!n.IsSequence()) fail(n, "field '" + field(key) + "': expected a list");
    std::vector<std::string> out;
    for (const auto& v : n) out.push_back(v.as<std::string>());
    return out;
  }

  ParamMap params() const {
    ParamMap out;
    for (const auto& kv : node_) {
      if (!kv.second.IsScalar()) {
        fail(kv.second, "field '" + field(kv.first.as<std::string>().c_str()) + "' must be a scalar");
      }
      out[kv.first.as<std::string>()] = kv.second.Scalar();
    }
    return out;
  }

  YAML::Node node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& origin_;
};

void parse_system(const Section& s, RunConfig& cfg) {
  s.allow({"builtin", "params", "polynomial"});
  if (s.has("builtin") == s.has("polynomial")) {
    s.fail(s.node(), "system needs exactly one of 'builtin' or 'polynomial'");
  }
  if (s.has("polynomial")) {
    if (s.has("params")) s.fail(s.raw("params"), "'system.params' only applies to builtins");
    const Section p = s.sub("polynomial");
    p.allow({"V", "F", "n", "noise", "sigma", "k", "forcing", "c", "C"});
    if (!p.has("V") || !p.has("F")) s.fail(p.node(), "'system.polynomial' needs V and F");
    cfg.builtin = "polynomial";
    cfg.params = p.params();
    return;
  }
  cfg.builtin = s.text("builtin", "");
  if (s.has("params")) cfg.params = s.sub("params").params();
}

void parse_certificate(const Section& s, RunConfig& cfg) {
  s.allow({"mode", "derive", "uf", "uf2"});
  const bool explicit_values = s.has("uf") || s.has("uf2");
  if (s.has("uf") && s.has("uf2")) s.fail(s.node(), "give either 'uf' or 'uf2' constants, not both");
  std::string mode = s.text("mode", "");
  if (s.boolean("derive", false)) {
    if (!mode.empty() && mode != "derive") s.fail(s.raw("derive"), "'derive' conflicts with mode '" + mode + "'");
    mode = "derive";
  }
  if (mode.empty()) mode = explicit_values ? "explicit" : "default";
  if (mode == "default") {
    if (explicit_values) s.fail(s.node(), "explicit constants need mode 'explicit'");
    cfg.cert_mode = CertificateMode::Default;
  } else if (mode == "derive") {
    if (explicit_values) s.fail(s.node(), "derived and explicit certificates are mutually exclusive");
    cfg.cert_mode = CertificateMode::Derive;
  } else if (mode == "explicit") {
    if (!explicit_values) s.fail(s.node(), "mode 'explicit' needs 'uf' or 'uf2' constants");
    cfg.cert_mode = CertificateMode::Explicit;
    cfg.cert_kind = s.has("uf") ? "uf" : "uf2";
    const Section c = s.sub(cfg.cert_kind == "uf" ? "uf" : "uf2");
    if (cfg.cert_kind == "uf") {
      c.allow({"a", "D", "b", "m", "M", "e", "c1", "M1", "c2", "M2"});
    } else {
      c.allow({"alpha", "beta", "b", "eps", "M", "c", "M1"});
    }
    for (const auto& kv : c.node()) {
      const auto key = kv.first.as<std::string>();
      cfg.cert_values[key] = c.get<double>(key.c_str(), "a number");
    }
  } else {
    s.fail(s.raw("mode"), "unknown certificate mode '" + mode + "' (default, explicit, derive)");
  }
}

void parse_grid(const Section& s, RunConfig& cfg) {
  s.allow({"radii", "sphere_res", "t_samples", "y_box", "y_res", "psi_threshold", "lpsi_threshold"});
  VerificationGrid& g = cfg.grid;
  if (s.has("radii")) g.radii = s.reals("radii");
  g.sphere_res = static_cast<int>(s.integer("sphere_res", g.sphere_res));
  g.t_samples = static_cast<int>(s.integer("t_samples", g.t_samples));
  g.y_box = s.real("y_box", g.y_box);
  g.y_res = static_cast<int>(s.integer("y_res", g.y_res));
  g.psi_threshold = s.real("psi_threshold", g.psi_threshold);
  g.lpsi_threshold = s.real("lpsi_threshold", g.lpsi_threshold);
  if (g.radii.empty()) s.fail(s.node(), "'grid.radii' must not be empty");
  for (double r : g.radii) {
    if (!(r > 0.0)) s.fail(s.raw("radii"), "'grid.radii' must be positive");
  }
  if (!std::is_sorted(g.radii.begin(), g.radii.end())) s.fail(s.raw("radii"), "'grid.radii' must be increasing");
  if (g.sphere_res < 8 || g.t_samples < 1 || g.y_res < 2 || !(g.y_box > 0.0)) {
    s.fail(s.node(), "grid needs sphere_res >= 8, t_samples >= 1, y_res >= 2 and y_box > 0");
  }
}

void parse_initial(const Section& s, RunConfig& cfg) {
  s.allow({"x", "y", "normal"});
  auto to_vec = [](const std::vector<double>& v) {
    return Vecd(Eigen::Map<const Vecd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  if (s.has("normal")) {
    if (s.has("x") || s.has("y")) s.fail(s.node(), "initial state is either a point (x, y) or 'normal'");
    const Section p = s.sub("normal");
    p.allow({"mean_x", "mean_y", "std_x", "std_y"});
    ProductNormal law;
    if (p.has("mean_x")) law.mean_x = to_vec(p.reals("mean_x"));
    if (p.has("mean_y")) law.mean_y = to_vec(p.reals("mean_y"));
    law.std_x = p.real("std_x", 1.0);
    law.std_y = p.real("std_y", 1.0);
    if (law.std_x < 0.0 || law.std_y < 0.0) p.fail(p.node(), "standard deviations must be nonnegative");
    cfg.initial = law;
    return;
  }
  PathState st;
  if (s.has("x")) st.x = to_vec(s.reals("x"));
  if (s.has("y")) st.y = to_vec(s.reals("y"));
  cfg.initial = st;
}

void parse_sde(const Section& s, RunConfig& cfg) {
  s.allow({"h", "scheme", "periods", "end_time", "seed", "ensemble_size", "burn_in_periods",
           "snapshot_times", "initial", "threads"});
  SdeConfig& c = cfg.sde;
  c.h = s.real("h", c.h);
  if (s.has("scheme")) {
    try {
      c.scheme = parse_scheme(s.text("scheme", ""));
    } catch (const Error& e) {
      s.fail(s.raw("scheme"), e.what());
    }
  }
  if (s.has("periods")) c.periods = static_cast<int>(s.integer("periods", 0));
  if (s.has("end_time")) c.end_time = s.real("end_time", 0.0);
  if (s.has("seed")) c.seed = s.get<std::uint64_t>("seed", "an unsigned integer");
  c.ensemble_size = static_cast<int>(s.integer("ensemble_size", c.ensemble_size));
  c.burn_in_periods = static_cast<int>(s.integer("burn_in_periods", c.burn_in_periods));
  if (s.has("snapshot_times")) c.snapshot_times = s.reals("snapshot_times");
  c.threads = static_cast<int>(s.integer("threads", c.threads));
  if (s.has("initial")) parse_initial(s.sub("initial"), cfg);
  if (c.ensemble_size < 1) s.fail(s.raw("ensemble_size"), "'sde.ensemble_size' must be at least 1");
  if (c.threads < 1) s.fail(s.raw("threads"), "'sde.threads' must be at least 1");
}

void parse_stats(const Section& s, RunConfig& cfg) {
  s.allow({"statistic", "epsilon", "alpha", "n_perm", "n_projections", "seed", "standardize",
           "profile", "max_pairs"});
  PeriodicityOptions& o = cfg.stats;
  if (s.has("statistic")) {
    try {
      o.test.statistic = parse_statistic(s.text("statistic", ""));
    } catch (const Error& e) {
      s.fail(s.raw("statistic"), e.what());
    }
  }
  o.epsilon = s.real("epsilon", o.epsilon);
  o.alpha = s.real("alpha", o.alpha);
  o.test.n_perm = static_cast<int>(s.integer("n_perm", o.test.n_perm));
  o.test.n_projections = static_cast<int>(s.integer("n_projections", o.test.n_projections));
  o.test.max_pairs = s.integer("max_pairs", o.test.max_pairs);
  o.standardize = s.boolean("standardize", o.standardize);
  cfg.profile = s.boolean("profile", cfg.profile);
  if (s.has("seed")) {
    o.test.seed = s.get<std::uint64_t>("seed", "an unsigned integer");
    cfg.stats_seed_set = true;
  }
  if (o.test.n_perm < 100) s.fail(s.raw("n_perm"), "'stats.n_perm' must be at least 100");
  if (!(o.epsilon > 0.0) || !(o.alpha > 0.0 && o.alpha < 1.0)) {
    s.fail(s.node(), "'stats.epsilon' must be positive and 'stats.alpha' in (0, 1)");
  }
}

void parse_output(const Section& s, RunConfig& cfg) {
  s.allow({"directory", "formats"});
  cfg.out_dir = s.text("directory", cfg.out_dir.string());
  if (s.has("formats")) {
    cfg.write_json = cfg.write_csv = false;
    for (const auto& f : s.texts("formats")) {
      if (f == "json") {
        cfg.write_json = true;
      } else if (f == "csv") {
        cfg.write_csv = true;
      } else {
        s.fail(s.raw("formats"), "unknown output format '" + f + "' (json, csv)");
      }
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::Parse, origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  RunConfig cfg;
  if (!root || root.IsNull()) throw Error(ErrorKind::Parse, origin + ": empty config");
  const Section top(root, "", origin);
  top.allow({"system", "certificate", "grid", "sde", "stats", "output"});
  if (!top.has("system")) top.fail(root, "missing 'system' section");
  parse_system(top.sub("system"), cfg);
  if (top.has("certificate")) parse_certificate(top.sub("certificate"), cfg);
  if (top.has("grid")) parse_grid(top.sub("grid"), cfg);
  if (top.has("sde")) parse_sde(top.sub("sde"), cfg);
  if (top.has("stats")) parse_stats(top.sub("stats"), cfg);
  if (top.has("output")) parse_output(top.sub("output"), cfg);
  if (!cfg.stats_seed_set) cfg.stats.test.seed = cfg.sde.seed;
  cfg.stats.test.threads = cfg.sde.threads;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

SystemSpec build_system(const RunConfig& cfg) {
  SystemSpec sys = builtin(cfg.builtin, cfg.params);
  sys.validate();
  return sys;
}

Certificate derive_certificate(const SystemSpec& sys, const VerificationGrid& grid) {
  if (!sys.hessian_friction()) {
    throw Error(ErrorKind::InvalidInput,
                "deriving constants needs Hessian friction; give '" + sys.name +
                    "' an explicit certificate or use its default");
  }
  const auto& f = sys.fields;
  const auto& F = std::get<HessianFriction<double>>(f.friction).F;
  const bool poly = sys.meta.V_poly && sys.meta.F_poly;

  UfCertificate c;
  if (poly) {
    c.a = uf1_constants(*sys.meta.V_poly, *sys.meta.F_poly).a;
  } else if (sys.meta.a) {
    c.a = *sys.meta.a;
  } else {
    throw Error(ErrorKind::InvalidInput, "no way to choose a for '" + sys.name + "'");
  }

  const InnerBoundFit fit =
      poly ? fit_inner_bound(*sys.meta.V_poly, *sys.meta.F_poly, c.a, grid.radii, grid.sphere_res)
           : fit_inner_bound(f.potential, F, sys.n, c.a, grid.radii, grid.sphere_res, grid.t_samples);
  c.b = fit.b_hat;
  c.m = fit.m_hat;
  c.M = fit.M_hat;

  // the shell fit never sees the origin
  const Vecd zero = Vecd::Zero(sys.n);
  for (int j = 0; j < grid.t_samples; ++j) {
    const double t = sys.period * j / grid.t_samples;
    const double g = f.potential.grad_x(zero, t).dot(F.grad(zero) - c.a * zero);
    c.M = std::max(c.M, -g);
  }

  if (const auto* shipped = sys.meta.certificate ? std::get_if<UfCertificate>(&*sys.meta.certificate) : nullptr) {
    c.e = shipped->e;
    c.c1 = shipped->c1;
    c.M1 = shipped->M1;
    c.c2 = shipped->c2;
    c.M2 = shipped->M2;
  } else {
    c.e = f.perturbation.bound;
    // sup of |V_t| and the noise trace over the grid, constant part only
    const auto dirs = sphere_points(sys.n, grid.sphere_res);
    std::vector<Vecd> ys{Vecd::Zero(sys.n)};
    for (int i = 0; i < sys.n; ++i) {
      ys.push_back(grid.y_box * Vecd::Unit(sys.n, i));
      ys.push_back(-grid.y_box * Vecd::Unit(sys.n, i));
    }
    auto visit = [&](const Vecd& x) {
      for (int j = 0; j < grid.t_samples; ++j) {
        const double t = sys.period * j / grid.t_samples;
        c.M1 = std::max(c.M1, std::abs(f.potential.dt(x, t)));
        for (const auto& y : ys) c.M2 = std::max(c.M2, f.noise.eval(x, y, t).squaredNorm());
      }
    };
    visit(zero);
    for (double r : grid.radii) {
      for (const auto& d : dirs) visit(r * d);
    }
  }

  CalibrationGrid cg;
  cg.R_max = grid.radii.back();
  cg.sphere_res = std::min(grid.sphere_res, 64);
  cg.t_samples = grid.t_samples;
  c.D = calibrate_D(sys, c, cg).D;
  c.validate();
  return c;
}

Certificate resolve_certificate(const SystemSpec& sys, const RunConfig& cfg, std::string* note) {
  auto say = [&](const std::string& s) {
    if (note) *note = s;
  };
  switch (cfg.cert_mode) {
    case CertificateMode::Default:
      if (sys.meta.certificate) {
        validate(*sys.meta.certificate);
        say("shipped with builtin");
        return *sys.meta.certificate;
      }
      say("derived (builtin ships no constants)");
      return derive_certificate(sys, cfg.grid);
    case CertificateMode::Derive:
      say("derived");
      return derive_certificate(sys, cfg.grid);
    case CertificateMode::Explicit:
      break;
  }
  const auto value = [&](const char* key, double fallback) {
    const auto it = cfg.cert_values.find(key);
    return it == cfg.cert_values.end() ? fallback : it->second;
  };
  Certificate out;
  if (cfg.cert_kind == "uf") {
    if (!sys.hessian_friction()) {
      throw Error(ErrorKind::WrongVariant, "'uf' constants need Hessian friction; '" + sys.name + "' has general friction");
    }
    UfCertificate base;
    if (sys.meta.certificate) {
      if (const auto* u = std::get_if<UfCertificate>(&*sys.meta.certificate)) base = *u;
    }
    out = UfCertificate{value("a", base.a),   value("D", base.D),   value("b", base.b),
                        value("m", base.m),   value("M", base.M),   value("e", base.e),
                        value("c1", base.c1), value("M1", base.M1), value("c2", base.c2),
                        value("M2", base.M2)};
  } else {
    if (sys.hessian_friction()) {
      throw Error(ErrorKind::WrongVariant, "'uf2' constants need general friction; '" + sys.name + "' has Hessian friction");
    }
    Uf2Certificate base;
    if (sys.meta.certificate) {
      if (const auto* u = std::get_if<Uf2Certificate>(&*sys.meta.certificate)) base = *u;
    }
    out = Uf2Certificate{value("alpha", base.alpha), value("beta", base.beta), value("b", base.b),
                         value("eps", base.eps),     value("M", base.M),       value("c", base.c),
                         value("M1", base.M1)};
  }
  validate(out);
  say("explicit");
  return out;
}

}  // namespace stochper
