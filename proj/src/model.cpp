#include "stochper/model.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace stochper {

namespace {

// --- parameter access --------------------------------------------------------

class Params {
 public:
  Params(const std::string& builtin, const ParamMap& p, std::set<std::string> allowed)
      : builtin_(builtin), p_(p) {
    for (const auto& [k, v] : p_) {
      if (!allowed.contains(k)) {
        throw Error(ErrorKind::InvalidInput, "builtin '" + builtin + "' has no parameter '" + k + "'");
      }
    }
  }

  double real(const std::string& key, double fallback) const {
    auto it = p_.find(key);
    if (it == p_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput,
                  "parameter '" + key + "' of '" + builtin_ + "' is not a number: " + it->second);
    }
  }

  int integer(const std::string& key, int fallback) const {
    const double v = real(key, fallback);
    if (v != std::floor(v)) {
      throw Error(ErrorKind::InvalidInput, "parameter '" + key + "' must be an integer");
    }
    return static_cast<int>(v);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = p_.find(key);
    return it == p_.end() ? fallback : it->second;
  }

  bool has(const std::string& key) const { return p_.contains(key); }

 private:
  std::string builtin_;
  const ParamMap& p_;
};

// --- noise and perturbation --------------------------------------------------

enum class NoiseKind { Zero, Constant, Saturating };

struct NoiseConfig {
  NoiseKind kind = NoiseKind::Zero;
  double sigma = 0.0;
  double c = 0.0;
  double C = 0.0;
  double exponent = 2.0;  // |x|^exponent inside the saturating form
  int k = 1;
};

NoiseConfig read_noise(const Params& p, int n, const std::string& default_kind,
                       double default_sigma, double exponent) {
  NoiseConfig cfg;
  const std::string kind = p.text("noise", default_kind);
  cfg.k = p.integer("k", n);
  if (cfg.k < 1 || cfg.k > kMaxDim) throw Error(ErrorKind::InvalidInput, "k must be in [1, 8]");
  cfg.exponent = exponent;
  if (kind == "zero") {
    cfg.kind = NoiseKind::Zero;
  } else if (kind == "constant") {
    cfg.kind = NoiseKind::Constant;
    cfg.sigma = p.real("sigma", default_sigma);
  } else if (kind == "saturating") {
    cfg.kind = NoiseKind::Saturating;
    cfg.c = p.real("c", 0.0);
    cfg.C = p.real("C", 1.0);
    if (cfg.c < 0.0 || cfg.C < 0.0) {
      throw Error(ErrorKind::InvalidInput, "saturating noise needs c, C >= 0");
    }
    if (cfg.k != n) throw Error(ErrorKind::InvalidInput, "saturating noise requires k = n");
  } else {
    throw Error(ErrorKind::InvalidInput,
                "noise must be zero, constant or saturating (got '" + kind + "')");
  }
  return cfg;
}

template <class S>
MatrixField<S> make_noise(int n, const NoiseConfig& cfg) {
  MatrixField<S> out;
  out.cols = cfg.k;
  const int k = cfg.k;
  switch (cfg.kind) {
    case NoiseKind::Zero:
      out.eval = [n, k](const Vec<S>&, const Vec<S>&, S) { return Mat<S>::Zero(n, k).eval(); };
      break;
    case NoiseKind::Constant: {
      const double sigma = cfg.sigma;
      out.eval = [n, k, sigma](const Vec<S>&, const Vec<S>&, S) {
        Mat<S> m = Mat<S>::Zero(n, k);
        for (int i = 0; i < std::min(n, k); ++i) m(i, i) = S(sigma);
        return m;
      };
      break;
    }
    case NoiseKind::Saturating: {
      const double c = cfg.c, C = cfg.C, expo = cfg.exponent;
      out.eval = [n, c, C, expo](const Vec<S>& x, const Vec<S>& y, S) {
        using std::pow;
        using std::sqrt;
        const S r2 = x.squaredNorm();
        const S xpow = expo == 2.0 ? r2 : S(pow(r2, S(expo / 2.0)));
        const S s = sqrt(S(c) * (xpow + y.squaredNorm()) + S(C));
        return Mat<S>((s * Mat<S>::Identity(n, n)).eval());
      };
      break;
    }
  }
  return out;
}

/// Trace-bound constants (c2, M2) matching the noise, for a certificate with
/// growth a|y|^2 + b|x|^{2m}.
std::pair<double, double> noise_trace_constants(const NoiseConfig& cfg, int n, double a, double b) {
  switch (cfg.kind) {
    case NoiseKind::Zero: return {0.0, 0.0};
    case NoiseKind::Constant: return {0.0, std::min(n, cfg.k) * cfg.sigma * cfg.sigma};
    case NoiseKind::Saturating: return {n * cfg.c / (2.0 * std::min(a, b)), n * cfg.C};
  }
  return {0.0, 0.0};
}

template <class S>
VectorField<S> make_forcing(int n, double amplitude) {
  VectorField<S> out;
  out.bound = std::abs(amplitude);
  out.eval = [n, amplitude](const Vec<S>&, const Vec<S>&, S t) {
    using std::sin;
    Vec<S> e = Vec<S>::Zero(n);
    if (amplitude != 0.0) e(0) = -S(amplitude) * sin(t);
    return e;
  };
  return out;
}

// --- radial fields -----------------------------------------------------------

/// F(x) = phi(|x|^2): grad = 2 phi' x, Hessian = 2 phi' I + 4 phi'' x x^T.
template <class S, class Phi, class DPhi, class DDPhi>
ScalarField<S> radial_friction(Phi phi, DPhi dphi, DDPhi ddphi) {
  ScalarField<S> F;
  F.eval = [phi](const Vec<S>& x) { return S(phi(S(x.squaredNorm()))); };
  F.grad = [dphi](const Vec<S>& x) {
    return Vec<S>(S(2) * S(dphi(S(x.squaredNorm()))) * x);
  };
  F.hess = [dphi, ddphi](const Vec<S>& x) {
    const S u = x.squaredNorm();
    const Eigen::Index n = x.size();
    Mat<S> H = S(2) * S(dphi(u)) * Mat<S>::Identity(n, n);
    H += S(4) * S(ddphi(u)) * (x * x.transpose());
    return H;
  };
  return F;
}

/// V(x, t) = psi(|x|^2, t): grad_x = 2 psi_u x.
template <class S, class Psi, class DPsiU, class DPsiT>
TimeScalarField<S> radial_potential(Psi psi, DPsiU psi_u, DPsiT psi_t, double period,
                                    double lower_bound, bool time_dependent) {
  TimeScalarField<S> V;
  V.eval = [psi](const Vec<S>& x, S t) { return S(psi(S(x.squaredNorm()), t)); };
  V.grad_x = [psi_u](const Vec<S>& x, S t) {
    return Vec<S>(S(2) * S(psi_u(S(x.squaredNorm()), t)) * x);
  };
  V.dt = [psi_t](const Vec<S>& x, S t) { return S(psi_t(S(x.squaredNorm()), t)); };
  V.period = period;
  V.lower_bound = lower_bound;
  V.time_dependent = time_dependent;
  return V;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Each builtin is written once, generic in the scalar type.

template <class S>
ScalarField<S> friction_example41(bool relax) {
  const double sgn = relax ? -1.0 : 1.0;
  return radial_friction<S>([sgn](S u) { return S(u * u + sgn * u); },
                            [sgn](S u) { return S(2 * u + sgn); }, [](S) { return S(2); });
}

template <class S>
ScalarField<S> friction_example43(bool relax) {
  using std::exp;
  if (!relax) {
    return radial_friction<S>([](S u) { using std::exp; return S(u * exp(u) / 4); },
                              [](S u) { using std::exp; return S(exp(u) * (u + 1) / 4); },
                              [](S u) { using std::exp; return S(exp(u) * (u + 2) / 4); });
  }
  return radial_friction<S>([](S u) { using std::exp; return S((exp(u) * (u - 2) + 2) / 4); },
                            [](S u) { using std::exp; return S(exp(u) * (u - 1) / 4); },
                            [](S u) { using std::exp; return S(exp(u) * u / 4); });
}

template <class S>
TimeScalarField<S> potential_log() {
  return radial_potential<S>(
      [](S u, S t) { using std::log; using std::sin; return S(log(2 + sin(t) + u)); },
      [](S u, S t) { using std::sin; return S(1 / (2 + sin(t) + u)); },
      [](S u, S t) { using std::sin; using std::cos; return S(cos(t) / (2 + sin(t) + u)); },
      kTwoPi, 0.0, true);
}

template <class S>
TimeScalarField<S> potential_sqrt() {
  return radial_potential<S>(
      [](S u, S t) { using std::sqrt; using std::sin; return S(sqrt(2 + sin(t) + u)); },
      [](S u, S t) { using std::sqrt; using std::sin; return S(1 / (2 * sqrt(2 + sin(t) + u))); },
      [](S u, S t) {
        using std::sqrt; using std::sin; using std::cos;
        return S(cos(t) / (2 * sqrt(2 + sin(t) + u)));
      },
      kTwoPi, 1.0, true);
}

template <class S>
TimeScalarField<S> potential_exp() {
  return radial_potential<S>(
      [](S u, S t) { using std::exp; using std::sin; return S((2 + sin(t)) * (1 - exp(-u))); },
      [](S u, S t) { using std::exp; using std::sin; return S((2 + sin(t)) * exp(-u)); },
      [](S u, S t) { using std::exp; using std::cos; return S(cos(t) * (1 - exp(-u))); },
      kTwoPi, 0.0, true);
}

/// Time-independent potential c4 u^2 + c2 u.
template <class S>
TimeScalarField<S> potential_quartic(double c4, double c2) {
  return radial_potential<S>([c4, c2](S u, S) { return S(c4 * u * u + c2 * u); },
                             [c4, c2](S u, S) { return S(2 * c4 * u + c2); },
                             [](S, S) { return S(0); }, kTwoPi, 0.0, false);
}

template <class S>
ScalarField<S> poly_scalar(const MultiPoly& p) {
  ScalarField<S> F;
  F.eval = [p](const Vec<S>& x) { return p(x); };
  F.grad = [p](const Vec<S>& x) { return p.gradient(x); };
  F.hess = [p](const Vec<S>& x) { return p.hessian(x); };
  return F;
}

template <class S>
TimeScalarField<S> poly_potential(const MultiPoly& p, double lower_bound) {
  TimeScalarField<S> V;
  V.eval = [p](const Vec<S>& x, S) { return p(x); };
  V.grad_x = [p](const Vec<S>& x, S) { return p.gradient(x); };
  V.dt = [](const Vec<S>&, S) { return S(0); };
  V.period = kTwoPi;
  V.lower_bound = lower_bound;
  V.time_dependent = false;
  return V;
}

/// C(x, y, t) = (2 alpha + delta (1 + sin t) / (1 + |y|^2)) I + delta cos t J,
/// J the rotation generator in the first coordinate pair.
template <class S>
GeneralFriction<S> general_friction(int n, double alpha, double delta) {
  GeneralFriction<S> C;
  C.alpha = alpha;
  C.beta = 2 * alpha + 3 * delta;
  C.eval = [n, alpha, delta](const Vec<S>&, const Vec<S>& y, S t) {
    using std::sin;
    using std::cos;
    Mat<S> m = (S(2 * alpha) + S(delta) * (1 + sin(t)) / (1 + y.squaredNorm())) *
               Mat<S>::Identity(n, n);
    if (n >= 2) {
      m(0, 1) += S(delta) * cos(t);
      m(1, 0) -= S(delta) * cos(t);
    }
    return m;
  };
  return C;
}

// --- assembly ----------------------------------------------------------------

struct Recipe {
  std::string name;
  int n = 1;
  NoiseConfig noise;
  double forcing = 0.0;
  std::function<FrictionSpec<double>()> friction_d;
  std::function<FrictionSpec<Quad>()> friction_q;
  std::function<TimeScalarField<double>()> potential_d;
  std::function<TimeScalarField<Quad>()> potential_q;
};

SystemSpec assemble(const Recipe& r, const ParamMap& params) {
  SystemSpec sys;
  sys.name = r.name;
  sys.n = r.n;
  sys.k = r.noise.k;
  sys.params = params;
  sys.fields.friction = r.friction_d();
  sys.fields.potential = r.potential_d();
  sys.fields.perturbation = make_forcing<double>(r.n, r.forcing);
  sys.fields.noise = make_noise<double>(r.n, r.noise);
  SystemFields<Quad> q;
  q.friction = r.friction_q();
  q.potential = r.potential_q();
  q.perturbation = make_forcing<Quad>(r.n, r.forcing);
  q.noise = make_noise<Quad>(r.n, r.noise);
  sys.quad_fields = std::move(q);
  sys.period = sys.fields.potential.period;
  sys.validate();
  return sys;
}

int read_dim(const Params& p) {
  const int n = p.integer("n", 1);
  if (n < 1 || n > kMaxDim) throw Error(ErrorKind::InvalidInput, "n must be in [1, 8]");
  return n;
}

UfCertificate with_noise(UfCertificate c, const NoiseConfig& noise, int n) {
  std::tie(c.c2, c.M2) = noise_trace_constants(noise, n, c.a, c.b);
  return c;
}

SystemSpec make_published_example(const std::string& name, const ParamMap& params) {
  const Params p(name, params, {"n", "noise", "sigma", "c", "C", "k", "forcing"});
  Recipe r;
  r.name = name;
  r.n = read_dim(p);
  r.forcing = p.real("forcing", 0.0);
  UfCertificate cert;
  const bool relax = name.ends_with("-relax");
  if (name.starts_with("example-4.1")) {
    cert = relax ? UfCertificate{8, 50, 8, 1, 44, 0, 0, 1, 0, 0}
                 : UfCertificate{8, 19, 8, 1, 36, 0, 0, 1, 0, 0};
    r.friction_d = [relax] { return FrictionSpec<double>(HessianFriction<double>{friction_example41<double>(relax)}); };
    r.friction_q = [relax] { return FrictionSpec<Quad>(HessianFriction<Quad>{friction_example41<Quad>(relax)}); };
    r.potential_d = [] { return potential_log<double>(); };
    r.potential_q = [] { return potential_log<Quad>(); };
  } else if (name == "example-4.2") {
    cert = UfCertificate{2, 1, 2, 1.5, 2, 0, 0, 0.5, 0, 0};
    r.friction_d = [] { return FrictionSpec<double>(HessianFriction<double>{friction_example41<double>(false)}); };
    r.friction_q = [] { return FrictionSpec<Quad>(HessianFriction<Quad>{friction_example41<Quad>(false)}); };
    r.potential_d = [] { return potential_sqrt<double>(); };
    r.potential_q = [] { return potential_sqrt<Quad>(); };
  } else {
    cert = relax ? UfCertificate{1, 2, 0.5, 2, 4, 0, 0, 1, 0, 0}
                 : UfCertificate{1, 2, 1, 2, 3, 0, 0, 1, 0, 0};
    r.friction_d = [relax] { return FrictionSpec<double>(HessianFriction<double>{friction_example43<double>(relax)}); };
    r.friction_q = [relax] { return FrictionSpec<Quad>(HessianFriction<Quad>{friction_example43<Quad>(relax)}); };
    r.potential_d = [] { return potential_exp<double>(); };
    r.potential_q = [] { return potential_exp<Quad>(); };
  }
  r.noise = read_noise(p, r.n, "zero", 1.0, 2.0 * cert.m);
  cert.e = std::abs(r.forcing);
  cert = with_noise(cert, r.noise, r.n);
  SystemSpec sys = assemble(r, params);
  sys.meta.a = cert.a;
  sys.meta.D = cert.D;
  sys.meta.certificate = cert;
  return sys;
}

SystemSpec make_open_problem(const ParamMap& params) {
  const Params p("open-problem-v4", params, {"n", "noise", "sigma", "k", "forcing"});
  Recipe r;
  r.name = "open-problem-v4";
  r.n = read_dim(p);
  r.forcing = p.real("forcing", 1.0);
  r.noise = read_noise(p, r.n, "constant", 1.0, 4.0);
  // x'' + x' + x^3 = dB/dt + sin t, i.e. F = |x|^2/2, V = |x|^4/4, E = -sin t e_1
  r.friction_d = [] {
    return FrictionSpec<double>(HessianFriction<double>{radial_friction<double>(
        [](double u) { return u / 2; }, [](double) { return 0.5; }, [](double) { return 0.0; })});
  };
  r.friction_q = [] {
    return FrictionSpec<Quad>(HessianFriction<Quad>{radial_friction<Quad>(
        [](Quad u) { return Quad(u / 2); }, [](Quad) { return Quad(0.5); },
        [](Quad) { return Quad(0); })});
  };
  r.potential_d = [] { return potential_quartic<double>(0.25, 0.0); };
  r.potential_q = [] { return potential_quartic<Quad>(0.25, 0.0); };
  SystemSpec sys = assemble(r, params);
  const int n = r.n;
  sys.meta.V_poly = 0.25 * MultiPoly::norm_power(n, 2);
  sys.meta.F_poly = 0.5 * MultiPoly::norm_power(n, 1);
  // a = 1 makes grad F - a x vanish; halving once gives <grad V, grad F - a x> = |x|^4 / 2.
  UfCertificate cert{0.5, 1.0, 0.25, 2.0, 0.0, std::abs(r.forcing), 0.0, 0.0, 0.0, 0.0};
  cert = with_noise(cert, r.noise, n);
  sys.meta.a = cert.a;
  sys.meta.D = cert.D;
  sys.meta.certificate = cert;
  sys.meta.note = "forcing sin t enters the bracketed drift as E = -sin t";
  return sys;
}

SystemSpec make_van_der_pol(const ParamMap& params) {
  const Params p("van-der-pol", params, {"n", "noise", "sigma", "k", "forcing", "mu"});
  Recipe r;
  r.name = "van-der-pol";
  r.n = read_dim(p);
  r.forcing = p.real("forcing", 1.0);
  const double mu = p.real("mu", 1.0);
  if (!(mu > 0.0)) throw Error(ErrorKind::InvalidInput, "mu must be positive");
  r.noise = read_noise(p, r.n, "constant", 0.3, 4.0);
  // F = mu (|x|^4/12 - |x|^2/2): friction mu (x^2 - 1) in one dimension
  r.friction_d = [mu] {
    return FrictionSpec<double>(HessianFriction<double>{radial_friction<double>(
        [mu](double u) { return mu * (u * u / 12 - u / 2); },
        [mu](double u) { return mu * (u / 6 - 0.5); }, [mu](double) { return mu / 6; })});
  };
  r.friction_q = [mu] {
    return FrictionSpec<Quad>(HessianFriction<Quad>{radial_friction<Quad>(
        [mu](Quad u) { return Quad(mu * (u * u / 12 - u / 2)); },
        [mu](Quad u) { return Quad(mu * (u / 6 - 0.5)); }, [mu](Quad) { return Quad(mu / 6); })});
  };
  r.potential_d = [] { return potential_quartic<double>(0.0, 0.5); };
  r.potential_q = [] { return potential_quartic<Quad>(0.0, 0.5); };
  SystemSpec sys = assemble(r, params);
  const int n = r.n;
  sys.meta.V_poly = 0.5 * MultiPoly::norm_power(n, 1);
  sys.meta.F_poly = (mu / 12) * MultiPoly::norm_power(n, 2) - (mu / 2) * MultiPoly::norm_power(n, 1);
  // <grad V, grad F - x> = mu |x|^4 / 3 - (mu + 1)|x|^2
  UfCertificate cert{1.0, 1.0 + 0.75 * mu, mu / 6, 2.0, 1.5 * (mu + 1) * (mu + 1) / mu,
                     std::abs(r.forcing), 0.0, 0.0, 0.0, 0.0};
  cert = with_noise(cert, r.noise, n);
  sys.meta.a = cert.a;
  sys.meta.D = cert.D;
  sys.meta.certificate = cert;
  return sys;
}

SystemSpec make_polynomial(const ParamMap& params) {
  const Params p("polynomial", params, {"n", "V", "F", "noise", "sigma", "k", "forcing"});
  if (!p.has("V") || !p.has("F")) {
    throw Error(ErrorKind::InvalidInput, "polynomial builtin needs V and F coefficient lists");
  }
  const MultiPoly V = MultiPoly::parse(p.text("V", ""));
  const MultiPoly F = MultiPoly::parse(p.text("F", ""));
  if (V.dim() != F.dim()) throw Error(ErrorKind::Parse, "V and F have different dimensions");
  if (p.has("n") && p.integer("n", V.dim()) != V.dim()) {
    throw Error(ErrorKind::Parse, "n does not match the polynomial exponent tuples");
  }
  Recipe r;
  r.name = "polynomial";
  r.n = V.dim();
  r.forcing = p.real("forcing", 0.0);
  r.noise = read_noise(p, r.n, "constant", 1.0, 2.0);
  r.friction_d = [F] { return FrictionSpec<double>(HessianFriction<double>{poly_scalar<double>(F)}); };
  r.friction_q = [F] { return FrictionSpec<Quad>(HessianFriction<Quad>{poly_scalar<Quad>(F)}); };
  // no declared lower bound; the verifier reports the sampled minimum
  const double lb = -std::numeric_limits<double>::infinity();
  r.potential_d = [V, lb] { return poly_potential<double>(V, lb); };
  r.potential_q = [V, lb] { return poly_potential<Quad>(V, lb); };
  SystemSpec sys = assemble(r, params);
  sys.meta.V_poly = V;
  sys.meta.F_poly = F;
  try {
    sys.meta.a = uf1_constants(V, F).a;
  } catch (const Error&) {
    // leading forms not positive definite: left for the verifier to report
  }
  return sys;
}

SystemSpec make_general(const ParamMap& params) {
  const Params p("langevin-general", params,
                 {"n", "noise", "sigma", "k", "forcing", "alpha", "delta"});
  const int n = read_dim(p);
  const double alpha = p.real("alpha", 1.0);
  const double delta = p.real("delta", 0.25);
  if (!(alpha > 0.0) || delta < 0.0) {
    throw Error(ErrorKind::InvalidInput, "alpha must be positive and delta nonnegative");
  }
  Recipe r;
  r.name = "langevin-general";
  r.n = n;
  r.forcing = p.real("forcing", 1.0);
  r.noise = read_noise(p, n, "constant", 0.5, 4.0);
  r.friction_d = [n, alpha, delta] { return FrictionSpec<double>(general_friction<double>(n, alpha, delta)); };
  r.friction_q = [n, alpha, delta] { return FrictionSpec<Quad>(general_friction<Quad>(n, alpha, delta)); };
  r.potential_d = [] { return potential_quartic<double>(0.25, 0.5); };
  r.potential_q = [] { return potential_quartic<Quad>(0.25, 0.5); };
  SystemSpec sys = assemble(r, params);
  const double beta = 2 * alpha + 3 * delta;
  if (std::abs(r.forcing) > beta) {
    throw Error(ErrorKind::InvalidInput, "forcing amplitude must not exceed beta");
  }
  double trace_bound = 0.0;
  if (r.noise.kind == NoiseKind::Constant) {
    trace_bound = std::min(n, r.noise.k) * r.noise.sigma * r.noise.sigma;
  } else if (r.noise.kind == NoiseKind::Saturating) {
    throw Error(ErrorKind::InvalidInput, "langevin-general supports zero or constant noise");
  }
  // <x, grad V> = |x|^4 + |x|^2 >= |x|^{2+2}
  sys.meta.certificate = Uf2Certificate{alpha, beta, 1.0, 2.0, 0.0, 0.5, trace_bound};
  sys.meta.a = alpha;
  return sys;
}

}  // namespace

void SystemSpec::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) throw Error(ErrorKind::Contract, "period must be positive");
  if (n < 1 || n > kMaxDim) throw Error(ErrorKind::Contract, "n must be in [1, 8]");
  if (k < 1 || k > kMaxDim) throw Error(ErrorKind::Contract, "k must be in [1, 8]");
  if (fields.noise.cols != k) throw Error(ErrorKind::Contract, "noise column count differs from k");
  if (const auto* h = std::get_if<HessianFriction<double>>(&fields.friction)) {
    if (!h->F.has_hess() || !h->F.has_grad()) {
      throw Error(ErrorKind::Contract, "Hessian friction requires grad and hess of F");
    }
  }
  if (!fields.potential.eval || !fields.potential.grad_x || !fields.potential.dt ||
      !fields.perturbation.eval || !fields.noise.eval) {
    throw Error(ErrorKind::Contract, "system has unset fields");
  }
}

std::vector<BuiltinInfo> list_builtins() {
  return {
      {"example-4.1", "V = ln(2 + sin t + |x|^2), F = |x|^4 + |x|^2; a = 8, D = 19",
       "n, noise, sigma, c, C, k, forcing"},
      {"example-4.2", "V = sqrt(2 + sin t + |x|^2), F = |x|^4 + |x|^2; a = 2, D = 1",
       "n, noise, sigma, c, C, k, forcing"},
      {"example-4.3", "V = (2 + sin t)(1 - exp(-|x|^2)), F = |x|^2 exp(|x|^2) / 4; a = 1, D = 2",
       "n, noise, sigma, c, C, k, forcing"},
      {"example-4.1-relax", "example-4.1 with F = |x|^4 - |x|^2 (relaxation friction)",
       "n, noise, sigma, c, C, k, forcing"},
      {"example-4.3-relax", "example-4.3 with F = (exp(|x|^2)(|x|^2 - 2) + 2) / 4",
       "n, noise, sigma, c, C, k, forcing"},
      {"open-problem-v4", "x'' + x' + x^3 = dB/dt + sin t (F = x^2/2, V = x^4/4, E = -sin t)",
       "n, noise, sigma, k, forcing"},
      {"van-der-pol", "forced van der Pol: friction mu(x^2 - 1), V = x^2/2, E = -A sin t",
       "n, noise, sigma, k, forcing, mu"},
      {"polynomial", "user polynomials V(x) and F(x) in record format", "V, F, noise, sigma, k, forcing"},
      {"langevin-general", "general friction C(x,y,t) with C^s >= 2 alpha I, V = |x|^4/4 + |x|^2/2",
       "n, noise, sigma, k, forcing, alpha, delta"},
  };
}

SystemSpec builtin(const std::string& name, const ParamMap& params) {
  if (name == "example-4.1" || name == "example-4.2" || name == "example-4.3" ||
      name == "example-4.1-relax" || name == "example-4.3-relax") {
    return make_published_example(name, params);
  }
  if (name == "open-problem-v4") return make_open_problem(params);
  if (name == "van-der-pol") return make_van_der_pol(params);
  if (name == "polynomial") return make_polynomial(params);
  if (name == "langevin-general") return make_general(params);
  std::ostringstream msg;
  msg << "unknown builtin '" << name << "'; valid names:";
  for (const auto& b : list_builtins()) msg << ' ' << b.name;
  throw Error(ErrorKind::Catalog, msg.str());
}

}  // namespace stochper
