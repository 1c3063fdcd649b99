#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochper/certificate.hpp"
#include "stochper/model.hpp"

namespace stochper {

namespace detail {
template <class S>
const HessianFriction<S>& hessian_friction(const SystemSpec& sys) {
  const auto* h = std::get_if<HessianFriction<S>>(&sys.get<S>().friction);
  if (h == nullptr) {
    throw Error(ErrorKind::WrongVariant,
                "system '" + sys.name + "' has general friction; use the alpha-Lyapunov function");
  }
  return *h;
}
}  // namespace detail

/// Psi = 1/2 |y + grad F - a x|^2 + [V + a F - a^2/2 |x|^2] + D.
template <class S>
S psi(const SystemSpec& sys, const UfCertificate& cert, const Vec<S>& x, const Vec<S>& y,
      const S& t) {
  detail::check_dims(sys, x, y);
  const auto& F = detail::hessian_friction<S>(sys).F;
  const S a(cert.a);
  const Vec<S> w = y + F.grad(x) - a * x;
  return S(0.5) * w.squaredNorm() + sys.get<S>().potential.eval(x, t) + a * F.eval(x) -
         S(0.5) * a * a * x.squaredNorm() + S(cert.D);
}

/// Psi = 1/2 |y + alpha x|^2 + V(x, t) + alpha^2/2 |x|^2 for general friction.
template <class S>
S psi_uf2(const SystemSpec& sys, const Uf2Certificate& cert, const Vec<S>& x, const Vec<S>& y,
          const S& t = S(0)) {
  detail::check_dims(sys, x, y);
  const S al(cert.alpha);
  return S(0.5) * (y + al * x).squaredNorm() + sys.get<S>().potential.eval(x, t) +
         S(0.5) * al * al * x.squaredNorm();
}

/// Closed-form generator drift
///   L Psi = V_t + 1/2 tr(Sigma Sigma^T) - <E, y + grad F - a x> - a |y|^2
///           - <grad_x V, grad F - a x>.
template <class S>
S generator_psi(const SystemSpec& sys, const UfCertificate& cert, const Vec<S>& x,
                const Vec<S>& y, const S& t) {
  detail::check_dims(sys, x, y);
  const SystemFields<S>& f = sys.get<S>();
  const auto& F = detail::hessian_friction<S>(sys).F;
  const S a(cert.a);
  const Vec<S> u = F.grad(x) - a * x;
  const Mat<S> sigma = f.noise.eval(x, y, t);
  const S vt = f.potential.dt(x, t);
  const S trace = sigma.squaredNorm();
  const S forcing = f.perturbation.eval(x, y, t).dot(y + u);
  const S inner = f.potential.grad_x(x, t).dot(u);
  const S kinetic = a * y.squaredNorm();
  const S value = vt + S(0.5) * trace - forcing - kinetic - inner;
  if (!is_finite(value)) {
    std::vector<double> w = detail::point_witness(x, y, t);
    for (const S& term : {vt, trace, forcing, kinetic, inner}) w.push_back(static_cast<double>(term));
    throw Error(ErrorKind::NumericDomain,
                "generator is not finite; witness = (x, y, t, V_t, tr, <E,.>, a|y|^2, <grad V,.>)",
                std::move(w));
  }
  return value;
}

/// Closed-form generator of psi_uf2:
///   L Psi = -alpha [|y|^2 + <x, grad V>] - <y, (C^s - 2 alpha I) y>
///           - alpha <x, (C - 2 alpha I) y> - <E, y + alpha x> + 1/2 tr(Sigma Sigma^T) + V_t.
template <class S>
S generator_psi_uf2(const SystemSpec& sys, const Uf2Certificate& cert, const Vec<S>& x,
                    const Vec<S>& y, const S& t) {
  detail::check_dims(sys, x, y);
  const SystemFields<S>& f = sys.get<S>();
  const S al(cert.alpha);
  const Eigen::Index n = x.size();
  const Mat<S> C = friction_matrix(f, x, y, t);
  const Mat<S> shifted = C - S(2) * al * Mat<S>::Identity(n, n);
  const S value = -al * (y.squaredNorm() + x.dot(f.potential.grad_x(x, t))) -
                  y.dot(shifted * y) - al * x.dot(shifted * y) -
                  f.perturbation.eval(x, y, t).dot(y + al * x) +
                  S(0.5) * f.noise.eval(x, y, t).squaredNorm() + f.potential.dt(x, t);
  if (!is_finite(value)) {
    throw Error(ErrorKind::NumericDomain, "generator is not finite", detail::point_witness(x, y, t));
  }
  return value;
}

/// A test function f(x, y, t) with optional derivative oracles.
template <class S>
struct TestFunction {
  std::function<S(const Vec<S>&, const Vec<S>&, S)> value;
  std::function<S(const Vec<S>&, const Vec<S>&, S)> dt;
  std::function<Vec<S>(const Vec<S>&, const Vec<S>&, S)> grad_x;
  std::function<Vec<S>(const Vec<S>&, const Vec<S>&, S)> grad_y;
  std::function<Mat<S>(const Vec<S>&, const Vec<S>&, S)> hess_y;
};

namespace detail {
template <class S>
S fd_step(const Vec<S>& v, double base) {
  using std::sqrt;
  return S(base) * (S(1) + sqrt(v.squaredNorm()));
}
}  // namespace detail

/// Generic generator
///   Lf = f_t + 1/2 tr(Sigma Sigma^T hess_y f) + <y, grad_x f> - <M y + grad_x V + E, grad_y f>.
/// Missing derivative oracles are replaced by central differences of `value`
/// when `allow_numeric` is set; otherwise a Capability error is thrown.
template <class S>
S generator_apply(const SystemSpec& sys, const TestFunction<S>& f, const Vec<S>& x,
                  const Vec<S>& y, const S& t, bool allow_numeric = false) {
  detail::check_dims(sys, x, y);
  if (!f.value) throw Error(ErrorKind::Capability, "test function has no value");
  const bool complete = f.dt && f.grad_x && f.grad_y && f.hess_y;
  if (!complete && !allow_numeric) {
    throw Error(ErrorKind::Capability,
                "test function lacks derivative oracles and numeric fallback is not allowed");
  }
  const Eigen::Index n = x.size();
  auto numeric_grad = [&](bool in_x) {
    const Vec<S>& base = in_x ? x : y;
    const S h = detail::fd_step(base, 1e-5);
    Vec<S> g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec<S> p = base, m = base;
      p(i) += h;
      m(i) -= h;
      g(i) = in_x ? (f.value(p, y, t) - f.value(m, y, t)) / (S(2) * h)
                  : (f.value(x, p, t) - f.value(x, m, t)) / (S(2) * h);
    }
    return g;
  };
  const S ft = f.dt ? f.dt(x, y, t) : [&] {
    const S h = S(1e-5) * (S(1) + (t < S(0) ? S(-t) : t));
    return S((f.value(x, y, t + h) - f.value(x, y, t - h)) / (S(2) * h));
  }();
  const Vec<S> gx = f.grad_x ? f.grad_x(x, y, t) : numeric_grad(true);
  const Vec<S> gy = f.grad_y ? f.grad_y(x, y, t) : numeric_grad(false);
  Mat<S> hy;
  if (f.hess_y) {
    hy = f.hess_y(x, y, t);
  } else {
    const S h = detail::fd_step(y, 1e-4);
    const S c = f.value(x, y, t);
    hy.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        Vec<S> pp = y, pm = y, mp = y, mm = y;
        pp(i) += h, pp(j) += h;
        pm(i) += h, pm(j) -= h;
        mp(i) -= h, mp(j) += h;
        mm(i) -= h, mm(j) -= h;
        if (i == j) {
          Vec<S> p = y, m = y;
          p(i) += h;
          m(i) -= h;
          hy(i, i) = (f.value(x, p, t) - S(2) * c + f.value(x, m, t)) / (h * h);
        } else {
          hy(i, j) = (f.value(x, pp, t) - f.value(x, pm, t) - f.value(x, mp, t) +
                      f.value(x, mm, t)) / (S(4) * h * h);
          hy(j, i) = hy(i, j);
        }
      }
    }
  }
  const SystemFields<S>& fields = sys.get<S>();
  const Mat<S> sigma = fields.noise.eval(x, y, t);
  const Mat<S> ssT = sigma * sigma.transpose();
  const Vec<S> force = friction_matrix(fields, x, y, t) * y + fields.potential.grad_x(x, t) +
                       fields.perturbation.eval(x, y, t);
  const S value = ft + S(0.5) * (ssT.cwiseProduct(hy)).sum() + y.dot(gx) - force.dot(gy);
  if (!is_finite(value)) {
    throw Error(ErrorKind::NumericDomain, "generator is not finite", detail::point_witness(x, y, t));
  }
  return value;
}

/// Psi with analytic derivatives:
///   grad_y Psi = y + grad F - a x,
///   grad_x Psi = grad_x V + D^2F y - a y + D^2F grad F - a D^2F x,
///   hess_y Psi = I,  d_t Psi = V_t.
template <class S>
TestFunction<S> psi_test_function(const SystemSpec& sys, const UfCertificate& cert) {
  detail::hessian_friction<S>(sys);
  const SystemSpec* s = &sys;
  TestFunction<S> f;
  f.value = [s, cert](const Vec<S>& x, const Vec<S>& y, S t) { return psi<S>(*s, cert, x, y, t); };
  f.dt = [s](const Vec<S>& x, const Vec<S>&, S t) { return s->get<S>().potential.dt(x, t); };
  f.grad_y = [s, cert](const Vec<S>& x, const Vec<S>& y, S) {
    const auto& F = detail::hessian_friction<S>(*s).F;
    return Vec<S>(y + F.grad(x) - S(cert.a) * x);
  };
  f.grad_x = [s, cert](const Vec<S>& x, const Vec<S>& y, S t) {
    const auto& F = detail::hessian_friction<S>(*s).F;
    const S a(cert.a);
    const Mat<S> H = F.hess(x);
    const Vec<S> w = y + F.grad(x) - a * x;
    return Vec<S>(s->get<S>().potential.grad_x(x, t) + H * w - a * y);
  };
  f.hess_y = [](const Vec<S>& x, const Vec<S>&, S) {
    return Mat<S>(Mat<S>::Identity(x.size(), x.size()));
  };
  return f;
}

/// psi_uf2 with analytic derivatives. The system must outlive the result.
template <class S>
TestFunction<S> psi_uf2_test_function(const SystemSpec& sys, const Uf2Certificate& cert) {
  const SystemSpec* s = &sys;
  const double al = cert.alpha;
  TestFunction<S> f;
  f.value = [s, cert](const Vec<S>& x, const Vec<S>& y, S t) {
    return psi_uf2<S>(*s, cert, x, y, t);
  };
  f.dt = [s](const Vec<S>& x, const Vec<S>&, S t) { return s->get<S>().potential.dt(x, t); };
  f.grad_y = [al](const Vec<S>& x, const Vec<S>& y, S) { return Vec<S>(y + S(al) * x); };
  f.grad_x = [s, al](const Vec<S>& x, const Vec<S>& y, S t) {
    return Vec<S>(S(al) * (y + S(al) * x) + s->get<S>().potential.grad_x(x, t) +
                  S(al * al) * x);
  };
  f.hess_y = [](const Vec<S>& x, const Vec<S>&, S) {
    return Mat<S>(Mat<S>::Identity(x.size(), x.size()));
  };
  return f;
}

// --- grid certification ------------------------------------------------------

struct CalibrationGrid {
  double R_max = 10.0;
  int radial_points = 200;
  int sphere_res = 64;
  int t_samples = 64;
};

struct Calibration {
  double D = 0.0;
  double bracket_min = 0.0;  // min of V + aF - a^2/2 |x|^2 on the grid
  Vecd witness_x;
  double witness_t = 0.0;
  bool grid_valid_only = true;
};

/// Smallest D with min Psi = 1 on the grid. The y-part of Psi is minimized
/// exactly (y = -(grad F - a x)), so only x and t are sampled. Throws
/// CertificateFailure when the bracket still decreases at the outer edge.
Calibration calibrate_D(const SystemSpec& sys, const UfCertificate& cert,
                        const CalibrationGrid& grid = {});

struct VerificationGrid {
  std::vector<double> radii{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int sphere_res = 256;
  int t_samples = 64;
  double y_box = 5.0;
  int y_res = 5;
  double psi_threshold = 100.0;
  double lpsi_threshold = 100.0;
};

struct ReportEntry {
  std::string condition;
  bool pass = false;
  double margin = 0.0;
  Vecd witness_x;
  Vecd witness_y;
  double witness_t = 0.0;
  std::vector<double> shell_values;  // per-shell extreme, when the check is shell-based
  std::string note;
};

struct VerificationReport {
  std::vector<ReportEntry> entries;
  VerificationGrid grid;
  std::map<std::string, double> constants;  // instantiated constants such as M*

  bool all_pass() const;
  const ReportEntry& at(const std::string& condition) const;
};

/// Pointwise tolerance for inequality checks.
inline constexpr double kMarginTol = 1e-9;

/// (H1)-(H5) for Hessian friction or (A1)-(A4) for general friction.
VerificationReport verify_hypotheses(const SystemSpec& sys, const Certificate& cert,
                                     const VerificationGrid& grid);

/// Khasminskii limit conditions on x-shells crossed with the y-box, plus
/// the pointwise bound-line check with an instantiated M*.
VerificationReport verify_khasminskii(const SystemSpec& sys, const Certificate& cert,
                                      const VerificationGrid& grid);

}  // namespace stochper
