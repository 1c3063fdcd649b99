#include "stochper/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace stochper {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> time_samples(double period, int count) {
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) ts[static_cast<std::size_t>(j)] = period * j / count;
  return ts;
}

/// Points of the y-box: the origin plus, for each of y_res - 1 radii up to
/// y_box, the 2n axis directions and the 2^min(n,3) diagonal directions.
std::vector<Vecd> y_samples(int n, double y_box, int y_res) {
  std::vector<Vecd> dirs = sphere_points(n, 2 * n);
  const int nd = std::min(n, 3);
  for (int mask = 0; mask < (1 << nd); ++mask) {
    Vecd d = Vecd::Zero(n);
    for (int i = 0; i < nd; ++i) d(i) = (mask >> i) & 1 ? -1.0 : 1.0;
    dirs.push_back(d.normalized());
  }
  std::vector<Vecd> out{Vecd::Zero(n)};
  for (int j = 1; j < y_res; ++j) {
    const double rho = y_box * j / (y_res - 1);
    for (const Vecd& d : dirs) out.push_back(rho * d);
  }
  return out;
}

/// Tracks the minimum of a margin together with its witness. Ties keep the
/// first point visited, so sweeps in a fixed order are reproducible.
struct Worst {
  double margin = kInf;
  Vecd x, y;
  double t = 0.0;

  void offer(double m, const Vecd& px, const Vecd& py, double pt) {
    if (std::isnan(m)) m = -kInf;
    if (m < margin) {
      margin = m;
      x = px;
      y = py;
      t = pt;
    }
  }

  ReportEntry entry(const std::string& cond, const std::string& note = {}) const {
    ReportEntry e;
    e.condition = cond;
    e.margin = margin;
    e.pass = margin >= -kMarginTol;
    e.witness_x = x;
    e.witness_y = y;
    e.witness_t = t;
    e.note = note;
    return e;
  }
};

bool strictly_increasing_tail(const std::vector<double>& v) {
  const std::size_t s = v.size();
  return s >= 3 && v[s - 3] < v[s - 2] && v[s - 2] < v[s - 1];
}

bool strictly_decreasing_tail(const std::vector<double>& v) {
  const std::size_t s = v.size();
  return s >= 3 && v[s - 3] > v[s - 2] && v[s - 2] > v[s - 1];
}

void check_grid(const VerificationGrid& g) {
  if (g.radii.size() < 3) throw Error(ErrorKind::InvalidInput, "grid needs at least three radii");
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    if (!(g.radii[i] > 0.0) || (i > 0 && g.radii[i] <= g.radii[i - 1])) {
      throw Error(ErrorKind::InvalidInput, "grid radii must be positive and increasing");
    }
  }
  if (g.sphere_res < 1 || g.t_samples < 1 || g.y_res < 2 || g.y_box < 0.0) {
    throw Error(ErrorKind::InvalidInput, "grid resolutions must be positive (y_res >= 2)");
  }
}

/// Visits x = 0 (if `origin`) and then every x = R u on the shells, with all
/// t samples; the callback receives the shell index (-1 for the origin).
template <class Fn>
void sweep_x(int n, const VerificationGrid& g, double period, bool origin, Fn&& fn) {
  const auto dirs = sphere_points(n, g.sphere_res);
  const auto ts = time_samples(period, g.t_samples);
  if (origin) {
    const Vecd zero = Vecd::Zero(n);
    for (double t : ts) fn(-1, zero, t);
  }
  for (std::size_t s = 0; s < g.radii.size(); ++s) {
    for (const Vecd& u : dirs) {
      const Vecd x = g.radii[s] * u;
      for (double t : ts) fn(static_cast<int>(s), x, t);
    }
  }
}

ReportEntry lower_bound_entry(const SystemSpec& sys, const VerificationGrid& g,
                              const std::string& cond) {
  const auto& V = sys.fields.potential;
  Worst w;
  Worst periodic;
  const Vecd zero = Vecd::Zero(sys.n);
  sweep_x(sys.n, g, sys.period, true, [&](int, const Vecd& x, double t) {
    const double v = V.eval(x, t);
    w.offer(std::isfinite(V.lower_bound) ? v - V.lower_bound : v, x, zero, t);
    const double shifted = V.eval(x, t + sys.period);
    periodic.offer(-std::abs(shifted - v) / (1.0 + std::abs(v)) + 1e-10, x, zero, t);
  });
  ReportEntry e = w.entry(cond);
  if (!std::isfinite(V.lower_bound)) {
    e.pass = std::isfinite(w.margin);
    e.note = "no declared lower bound; margin is the sampled minimum of V";
  } else {
    e.note = "margin = min V - declared lower bound";
  }
  if (periodic.margin < 0.0) {
    e.pass = false;
    e.note += "; V is not periodic at the witness of the periodicity sweep";
    e.witness_x = periodic.x;
    e.witness_t = periodic.t;
  }
  return e;
}

// --- hypotheses for Hessian friction ----------------------------------------

void hypotheses_uf(const SystemSpec& sys, const UfCertificate& c, const VerificationGrid& g,
                   VerificationReport& rep) {
  const auto& f = sys.fields;
  const auto& F = std::get<HessianFriction<double>>(f.friction).F;
  const int n = sys.n;
  const Vecd zero = Vecd::Zero(n);
  const std::size_t S = g.radii.size();
  const auto growth = [&](double r) { return c.b * std::pow(r, 2.0 * c.m); };

  rep.entries.push_back(lower_bound_entry(sys, g, "H1"));

  // H2 and H3 share the x sweep
  std::vector<double> shell_min(S, kInf);
  Worst h2_last, h3, h5v;
  std::vector<double> ratio(S, 0.0);
  sweep_x(n, g, sys.period, true, [&](int s, const Vecd& x, double t) {
    const double r = x.norm();
    const double V = f.potential.eval(x, t);
    const Vecd gradV = f.potential.grad_x(x, t);
    const Vecd u = F.grad(x) - c.a * x;
    const double bracket = V + c.a * F.eval(x) - 0.5 * c.a * c.a * r * r;
    if (s >= 0) {
      const auto k = static_cast<std::size_t>(s);
      shell_min[k] = std::min(shell_min[k], bracket);
      if (k + 1 == S) h2_last.offer(bracket - g.psi_threshold, x, zero, t);
      if (g.radii[k] >= 1.0) ratio[k] = std::max(ratio[k], c.e * u.norm() / std::pow(r, 2.0 * c.m));
    }
    h3.offer(c.M - growth(r) + gradV.dot(u), x, zero, t);
    h5v.offer(c.c1 * growth(r) + c.M1 - std::abs(f.potential.dt(x, t)), x, zero, t);
  });

  ReportEntry h2 = h2_last.entry("H2", "min over shell of V + aF - a^2/2 |x|^2");
  h2.shell_values = shell_min;
  h2.pass = strictly_increasing_tail(shell_min) && h2_last.margin > 0.0;
  rep.entries.push_back(h2);
  rep.entries.push_back(h3.entry("H3", "margin = min of M - b|x|^{2m} + <grad V, grad F - a x>"));

  // H4 and the noise part of H5 also sweep the y box
  const auto ys = y_samples(n, g.y_box, g.y_res);
  Worst h4, h5n;
  sweep_x(n, g, sys.period, true, [&](int, const Vecd& x, double t) {
    const double xr = growth(x.norm());
    for (const Vecd& y : ys) {
      h4.offer(c.e - f.perturbation.eval(x, y, t).norm(), x, y, t);
      const double tr = f.noise.eval(x, y, t).squaredNorm();
      h5n.offer(2.0 * c.c2 * (c.a * y.squaredNorm() + xr) + c.M2 - tr, x, y, t);
    }
  });
  rep.entries.push_back(h4.entry("H4", "margin = e - |E|"));

  ReportEntry lim;
  lim.condition = "H4-limit";
  lim.shell_values = ratio;
  const double last = ratio.back();
  bool trend = true;
  for (std::size_t k = (S >= 3 ? S - 3 : 0); k + 1 < S; ++k) trend = trend && ratio[k + 1] <= ratio[k];
  lim.pass = c.e == 0.0 || (trend && last < 0.1);
  lim.margin = 0.1 - last;
  lim.witness_x = Vecd::Zero(n);
  lim.witness_x(0) = g.radii.back();
  lim.witness_y = zero;
  lim.note = "max over shell of e |grad F - a x| / |x|^{2m}, shells with R >= 1";
  rep.entries.push_back(lim);

  rep.entries.push_back(h5v.entry("H5-Vt", "margin = c1 b|x|^{2m} + M1 - |V_t|"));
  rep.entries.push_back(
      h5n.entry("H5-noise", "margin = 2 c2 (a|y|^2 + b|x|^{2m}) + M2 - tr(Sigma Sigma^T)"));
}

// --- assumptions for general friction ---------------------------------------

void hypotheses_uf2(const SystemSpec& sys, const Uf2Certificate& c, const VerificationGrid& g,
                    VerificationReport& rep) {
  const auto& f = sys.fields;
  const auto& C = std::get<GeneralFriction<double>>(f.friction);
  const int n = sys.n;
  const Vecd zero = Vecd::Zero(n);
  const auto growth = [&](double r) { return c.b * std::pow(r, 2.0 + c.eps); };

  ReportEntry a1 = lower_bound_entry(sys, g, "A1");
  if (f.potential.time_dependent) {
    a1.pass = false;
    a1.note += "; V must not depend on t";
  }
  rep.entries.push_back(a1);

  const auto ys = y_samples(n, g.y_box, g.y_res);
  Worst sym, norm, forcing, a4, a3;
  sweep_x(n, g, sys.period, true, [&](int, const Vecd& x, double t) {
    const Vecd gradV = f.potential.grad_x(x, t);
    a3.offer(x.dot(gradV) - growth(x.norm()) + c.M, x, zero, t);
    for (const Vecd& y : ys) {
      const Matd m = C.eval(x, y, t);
      const Matd ms = 0.5 * (m + m.transpose());
      Eigen::SelfAdjointEigenSolver<Matd> eig(ms, Eigen::EigenvaluesOnly);
      sym.offer(eig.eigenvalues().minCoeff() - 2.0 * c.alpha, x, y, t);
      Eigen::JacobiSVD<Matd> svd(m);
      norm.offer(c.beta - svd.singularValues()(0), x, y, t);
      forcing.offer(c.beta - f.perturbation.eval(x, y, t).norm(), x, y, t);
      const double tr = f.noise.eval(x, y, t).squaredNorm();
      a4.offer(c.c * c.alpha * (y.squaredNorm() + growth(x.norm())) + c.M1 - tr, x, y, t);
    }
  });
  rep.entries.push_back(sym.entry("A2-symmetric", "margin = min eig C^s - 2 alpha"));
  rep.entries.push_back(norm.entry("A2-norm", "margin = beta - |C|"));
  rep.entries.push_back(forcing.entry("A2-forcing", "margin = beta - |E|"));
  rep.entries.push_back(a3.entry("A3", "margin = <x, grad V> - b|x|^{2+eps} + M"));
  rep.entries.push_back(a4.entry("A4", "margin = c alpha (|y|^2 + b|x|^{2+eps}) + M1 - tr"));
}

/// sup over r >= 0 of -(alpha b / 2) r^{2+eps} + alpha (beta + 2 alpha)^2 r^2 + alpha beta r.
double uf2_radial_sup(const Uf2Certificate& c) {
  const auto h = [&](double r) {
    return -0.5 * c.alpha * c.b * std::pow(r, 2.0 + c.eps) +
           c.alpha * std::pow(c.beta + 2.0 * c.alpha, 2) * r * r + c.alpha * c.beta * r;
  };
  double hi = 1.0;
  while (h(hi) > 0.0 || h(2.0 * hi) > h(hi)) hi *= 2.0;
  const int N = 20000;
  double best = 0.0, arg = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double r = hi * i / N;
    if (h(r) > best) best = h(r), arg = r;
  }
  double lo = std::max(0.0, arg - hi / N), up = arg + hi / N;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (up - lo) / 3, m2 = up - (up - lo) / 3;
    if (h(m1) < h(m2)) lo = m1; else up = m2;
  }
  return std::max(best, h(0.5 * (lo + up)));
}

}  // namespace

bool VerificationReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.pass; });
}

const ReportEntry& VerificationReport::at(const std::string& condition) const {
  for (const auto& e : entries) {
    if (e.condition == condition) return e;
  }
  throw Error(ErrorKind::InvalidInput, "report has no condition '" + condition + "'");
}

Calibration calibrate_D(const SystemSpec& sys, const UfCertificate& cert,
                        const CalibrationGrid& grid) {
  const auto& F = detail::hessian_friction<double>(sys).F;
  const auto& V = sys.fields.potential;
  if (grid.radial_points < 3 || !(grid.R_max > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "calibration grid needs R_max > 0 and >= 3 radii");
  }
  const auto dirs = sphere_points(sys.n, grid.sphere_res);
  const auto ts = time_samples(sys.period, grid.t_samples);
  Calibration out;
  out.bracket_min = kInf;
  double outer = kInf, inner = kInf;
  for (int i = 0; i < grid.radial_points; ++i) {
    const double r = grid.R_max * i / (grid.radial_points - 1);
    double shell = kInf;
    for (std::size_t d = 0; d < (i == 0 ? 1 : dirs.size()); ++d) {
      const Vecd x = r * dirs[d];
      for (double t : ts) {
        const double v = V.eval(x, t) + cert.a * F.eval(x) - 0.5 * cert.a * cert.a * r * r;
        if (!std::isfinite(v)) {
          throw Error(ErrorKind::NumericDomain, "Psi is not finite on the calibration grid",
                      witness_of(x));
        }
        shell = std::min(shell, v);
        if (v < out.bracket_min) {
          out.bracket_min = v;
          out.witness_x = x;
          out.witness_t = t;
        }
      }
    }
    if (i == grid.radial_points - 2) inner = shell;
    if (i == grid.radial_points - 1) outer = shell;
  }
  if (outer <= out.bracket_min && outer < inner) {
    throw Error(ErrorKind::CertificateFailure,
                "Psi keeps decreasing at the edge of the calibration grid", witness_of(out.witness_x));
  }
  out.D = 1.0 - out.bracket_min;
  return out;
}

VerificationReport verify_hypotheses(const SystemSpec& sys, const Certificate& cert,
                                     const VerificationGrid& grid) {
  check_grid(grid);
  validate(cert);
  VerificationReport rep;
  rep.grid = grid;
  if (const auto* uf = std::get_if<UfCertificate>(&cert)) {
    detail::hessian_friction<double>(sys);
    hypotheses_uf(sys, *uf, grid, rep);
  } else {
    const auto& uf2 = std::get<Uf2Certificate>(cert);
    if (sys.hessian_friction()) {
      throw Error(ErrorKind::WrongVariant, "alpha-certificate needs a general-friction system");
    }
    hypotheses_uf2(sys, uf2, grid, rep);
  }
  return rep;
}

VerificationReport verify_khasminskii(const SystemSpec& sys, const Certificate& cert,
                                      const VerificationGrid& grid) {
  check_grid(grid);
  validate(cert);
  VerificationReport rep;
  rep.grid = grid;
  const int n = sys.n;
  const auto dirs = sphere_points(n, grid.sphere_res);
  const auto ys = y_samples(n, grid.y_box, grid.y_res);
  const auto ts = time_samples(sys.period, grid.t_samples);
  const std::size_t S = grid.radii.size();

  const auto* uf = std::get_if<UfCertificate>(&cert);
  const auto* uf2 = std::get_if<Uf2Certificate>(&cert);
  if (uf2 != nullptr && sys.hessian_friction()) {
    throw Error(ErrorKind::WrongVariant, "alpha-certificate needs a general-friction system");
  }
  if (uf != nullptr) detail::hessian_friction<double>(sys);

  // Point values; M* needs a full sweep before the bound line can be checked.
  struct Point {
    Vecd x, y;
    double t, psi, lpsi, line;
  };
  std::vector<Point> pts;
  pts.reserve(S * dirs.size() * ys.size() * ts.size());
  double mstar = 0.0;
  TestFunction<double> f2;
  if (uf2 != nullptr) f2 = psi_uf2_test_function<double>(sys, *uf2);
  for (std::size_t s = 0; s < S; ++s) {
    for (const Vecd& u : dirs) {
      const Vecd x = grid.radii[s] * u;
      for (const Vecd& y : ys) {
        for (double t : ts) {
          Point p{x, y, t, 0.0, 0.0, 0.0};
          if (uf != nullptr) {
            const auto& F = std::get<HessianFriction<double>>(sys.fields.friction).F;
            p.psi = psi<double>(sys, *uf, x, y, t);
            p.lpsi = generator_psi<double>(sys, *uf, x, y, t);
            const double q = uf->a * y.squaredNorm() + uf->b * std::pow(x.norm(), 2.0 * uf->m);
            const double rest = 0.5 * (1.0 - uf->c1 - uf->c2) * q;
            mstar = std::max(mstar, uf->e * y.norm() + uf->e * (F.grad(x) - uf->a * x).norm() - rest);
            p.line = -rest + uf->M1 + 0.5 * uf->M2 + uf->M;
          } else {
            p.psi = psi_uf2<double>(sys, *uf2, x, y, t);
            p.lpsi = generator_apply<double>(sys, f2, x, y, t);
            p.line = -0.5 * uf2->alpha * (1.0 - uf2->c) *
                         (y.squaredNorm() + uf2->b * std::pow(x.norm(), 2.0 + uf2->eps)) +
                     0.5 * uf2->M1;
          }
          pts.push_back(std::move(p));
        }
      }
    }
  }
  if (uf2 != nullptr) {
    mstar = uf2->beta * uf2->beta / uf2->alpha + uf2->alpha * uf2->M + uf2_radial_sup(*uf2);
  }
  rep.constants["M_star"] = mstar;

  std::vector<double> psi_min(S, kInf), lpsi_max(S, -kInf);
  Worst wpsi, wl, line;
  const std::size_t per_shell = dirs.size() * ys.size() * ts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const std::size_t s = i / per_shell;
    psi_min[s] = std::min(psi_min[s], p.psi);
    lpsi_max[s] = std::max(lpsi_max[s], p.lpsi);
    if (s + 1 == S) {
      wpsi.offer(p.psi - grid.psi_threshold, p.x, p.y, p.t);
      wl.offer(-grid.lpsi_threshold - p.lpsi, p.x, p.y, p.t);
    }
    line.offer(p.line + mstar - p.lpsi, p.x, p.y, p.t);
  }
  ReportEntry e1 = wpsi.entry("khasminskii-psi", "min of Psi over x-shell x y-box");
  e1.shell_values = psi_min;
  e1.pass = strictly_increasing_tail(psi_min) && wpsi.margin > 0.0;
  ReportEntry e2 = wl.entry("khasminskii-lpsi", "max of L Psi over x-shell x y-box");
  e2.shell_values = lpsi_max;
  e2.pass = strictly_decreasing_tail(lpsi_max) && wl.margin > 0.0;
  ReportEntry e3 = line.entry("bound-line", "margin = bound line + M* - L Psi");
  rep.entries.push_back(e1);
  rep.entries.push_back(e2);
  rep.entries.push_back(e3);
  return rep;
}

}  // namespace stochper
