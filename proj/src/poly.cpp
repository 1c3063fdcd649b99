#include "stochper/poly.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "stochper/error.hpp"

namespace stochper {

namespace {

constexpr double kPdTolerance = 1e-9;

int total_degree(const MultiPoly::Exponents& e) {
  int d = 0;
  for (int v : e) d += v;
  return d;
}

std::string fmt_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

class RecordParser {
 public:
  explicit RecordParser(std::string_view text) : s_(text) {}

  std::vector<std::pair<MultiPoly::Exponents, double>> parse() {
    std::vector<std::pair<MultiPoly::Exponents, double>> out;
    skip_ws();
    bool bracketed = false;
    if (peek() == '[') {
      ++pos_;
      bracketed = true;
    }
    while (true) {
      skip_ws();
      if (at_end()) break;
      if (bracketed && peek() == ']') {
        ++pos_;
        break;
      }
      out.push_back(record());
      skip_ws();
      if (!at_end() && peek() == ',') ++pos_;
    }
    skip_ws();
    if (!at_end()) fail("trailing characters");
    if (out.empty()) fail("no terms");
    return out;
  }

 private:
  std::pair<MultiPoly::Exponents, double> record() {
    expect('(');
    skip_ws();
    expect('(');
    MultiPoly::Exponents e;
    while (true) {
      skip_ws();
      e.push_back(integer());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(')');
      break;
    }
    skip_ws();
    expect(',');
    skip_ws();
    const double c = number();
    skip_ws();
    expect(')');
    return {std::move(e), c};
  }

  int integer() {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc() || v < 0) fail("expected a nonnegative integer exponent");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  double number() {
    double v = 0.0;
    std::size_t start = pos_;
    if (start < s_.size() && s_[start] == '+') ++start;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected a coefficient");
    if (!std::isfinite(v)) fail("coefficient is not finite");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  bool at_end() const { return pos_ >= s_.size(); }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse,
                "polynomial: " + what + " at offset " + std::to_string(pos_) + " in \"" +
                    std::string(s_) + "\"");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr std::array<std::uint64_t, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                   23, 29, 31, 37, 41, 43, 47, 53};

// Projected gradient descent on the unit sphere with step halving.
std::pair<double, Vecd> sphere_descent(const MultiPoly& f, Vecd u) {
  double fu = f(u);
  double step = 0.1;
  for (int it = 0; it < 200; ++it) {
    const Vecd g = f.gradient(u);
    const Vecd tangent = g - g.dot(u) * u;
    if (tangent.norm() < 1e-14) break;
    Vecd cand = u - step * tangent;
    cand.normalize();
    const double fc = f(cand);
    if (fc < fu) {
      u = cand;
      fu = fc;
      step *= 1.25;
    } else {
      step *= 0.5;
      if (step < 1e-16) break;
    }
  }
  return {fu, u};
}

bool nearly_equal(const MultiPoly& a, const MultiPoly& b) {
  const MultiPoly d = a - b;
  for (const auto& t : d.terms()) {
    if (std::abs(t.coef) > 1e-12) return false;
  }
  return true;
}

[[noreturn]] void not_positive_definite(const char* which, const HomogeneousForm& form) {
  Vecd witness;
  double value = 0.0;
  if (form.degree() % 2 != 0) {
    // odd forms change sign; any nonzero value gives a negative direction
    for (const auto& u : sphere_points(form.dim(), 64)) {
      const double v = form(u);
      if (v != 0.0) {
        witness = v < 0 ? u : Vecd(-u);
        value = -std::abs(v);
        break;
      }
    }
  } else {
    const auto sm = min_on_sphere(form, 512);
    witness = sm.witness;
    value = sm.value;
  }
  std::ostringstream msg;
  msg << "leading form of " << which << " (degree " << form.degree()
      << ") is not positive definite: min on sphere " << value;
  throw Error(ErrorKind::CertificateFailure, msg.str(), witness_of(witness));
}

}  // namespace

// --- MultiPoly --------------------------------------------------------------

MultiPoly::MultiPoly(int n) : n_(n) {
  if (n < 1 || n > kMaxDim) {
    throw Error(ErrorKind::InvalidInput, "polynomial dimension must be in [1, " +
                                             std::to_string(kMaxDim) + "]");
  }
}

MultiPoly::MultiPoly(int n, const std::vector<Term>& terms) : MultiPoly(n) {
  for (const auto& t : terms) {
    if (static_cast<int>(t.exps.size()) != n) {
      throw Error(ErrorKind::InvalidInput, "exponent tuple length does not match dimension");
    }
    if (!std::isfinite(t.coef)) throw Error(ErrorKind::InvalidInput, "non-finite coefficient");
    for (int e : t.exps) {
      if (e < 0) throw Error(ErrorKind::InvalidInput, "negative exponent");
    }
    terms_[t.exps] += t.coef;
  }
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
}

MultiPoly MultiPoly::constant(int n, double c) {
  return MultiPoly(n, {Term{Exponents(static_cast<std::size_t>(n), 0), c}});
}

MultiPoly MultiPoly::variable(int n, int i) {
  Exponents e(static_cast<std::size_t>(n), 0);
  e.at(static_cast<std::size_t>(i)) = 1;
  return MultiPoly(n, {Term{e, 1.0}});
}

MultiPoly MultiPoly::norm_power(int n, int k) {
  MultiPoly sq(n);
  for (int i = 0; i < n; ++i) {
    Exponents e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(i)] = 2;
    sq += MultiPoly(n, {Term{e, 1.0}});
  }
  MultiPoly out = constant(n, 1.0);
  for (int j = 0; j < k; ++j) out = out * sq;
  return out;
}

MultiPoly MultiPoly::parse(std::string_view text) {
  RecordParser parser(text);
  const auto records = parser.parse();
  const int n = static_cast<int>(records.front().first.size());
  std::map<Exponents, double> seen;
  std::vector<Term> terms;
  for (const auto& [e, c] : records) {
    if (static_cast<int>(e.size()) != n) {
      throw Error(ErrorKind::Parse, "polynomial: exponent tuples have inconsistent lengths");
    }
    if (seen.contains(e)) throw Error(ErrorKind::Parse, "polynomial: repeated exponent tuple");
    seen[e] = c;
    terms.push_back({e, c});
  }
  if (n < 1 || n > kMaxDim) throw Error(ErrorKind::Parse, "polynomial: unsupported dimension");
  return MultiPoly(n, terms);
}

int MultiPoly::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
  return d;
}

bool MultiPoly::is_homogeneous() const {
  if (terms_.empty()) return false;
  const int d = degree();
  return std::all_of(terms_.begin(), terms_.end(),
                     [d](const auto& kv) { return total_degree(kv.first) == d; });
}

std::vector<MultiPoly::Term> MultiPoly::terms() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& [e, c] : terms_) out.push_back({e, c});
  return out;
}

double MultiPoly::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

MultiPoly MultiPoly::derivative(int i) const {
  MultiPoly out(n_);
  for (const auto& [e, c] : terms_) {
    const int ei = e[static_cast<std::size_t>(i)];
    if (ei == 0) continue;
    Exponents d = e;
    d[static_cast<std::size_t>(i)] -= 1;
    out.terms_[d] += c * ei;
  }
  std::erase_if(out.terms_, [](const auto& kv) { return kv.second == 0.0; });
  return out;
}

MultiPoly MultiPoly::homogeneous_part(int d) const {
  MultiPoly out(n_);
  for (const auto& [e, c] : terms_) {
    if (total_degree(e) == d) out.terms_[e] = c;
  }
  return out;
}

void MultiPoly::check_dim(const MultiPoly& o) const {
  if (o.n_ != n_) throw Error(ErrorKind::InvalidInput, "polynomial dimension mismatch");
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  check_dim(o);
  for (const auto& [e, c] : o.terms_) terms_[e] += c;
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) {
  check_dim(o);
  for (const auto& [e, c] : o.terms_) terms_[e] -= c;
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  return *this;
}

MultiPoly& MultiPoly::operator*=(double s) {
  for (auto& [e, c] : terms_) c *= s;
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  return *this;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  a.check_dim(b);
  MultiPoly out(a.n_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      MultiPoly::Exponents e = ea;
      for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
      out.terms_[e] += ca * cb;
    }
  }
  std::erase_if(out.terms_, [](const auto& kv) { return kv.second == 0.0; });
  return out;
}

std::string MultiPoly::to_string() const {
  std::string out;
  for (const auto& [e, c] : terms_) {
    if (!out.empty()) out += ' ';
    out += "((";
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(e[i]);
    }
    out += "), " + fmt_double(c) + ")";
  }
  return out;
}

// --- forms and the sphere ----------------------------------------------------

HomogeneousForm::HomogeneousForm(MultiPoly p) : poly_(std::move(p)) {
  if (!poly_.is_homogeneous()) {
    throw Error(ErrorKind::Contract, "homogeneous form requires a nonzero homogeneous polynomial");
  }
  degree_ = poly_.degree();
}

HomogeneousForm leading_form(const MultiPoly& poly) {
  if (poly.is_zero()) throw Error(ErrorKind::EmptyInput, "leading form of the zero polynomial");
  return HomogeneousForm(poly.homogeneous_part(poly.degree()));
}

std::vector<Vecd> sphere_points(int n, int count) {
  std::vector<Vecd> pts;
  if (n == 1) {
    pts.push_back(Vecd::Constant(1, 1.0));
    pts.push_back(Vecd::Constant(1, -1.0));
    return pts;
  }
  if (n == 2) {
    pts.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
      const double th = 2.0 * std::numbers::pi * j / count;
      Vecd u(2);
      u << std::cos(th), std::sin(th);
      pts.push_back(u);
    }
    return pts;
  }
  if (n > static_cast<int>(kPrimes.size())) {
    throw Error(ErrorKind::InvalidInput, "sphere sampling dimension too large");
  }
  for (int i = 0; i < n && static_cast<int>(pts.size()) < count; ++i) {
    for (double s : {1.0, -1.0}) {
      if (static_cast<int>(pts.size()) >= count) break;
      Vecd u = Vecd::Zero(n);
      u(i) = s;
      pts.push_back(u);
    }
  }
  std::uint64_t idx = 1;
  while (static_cast<int>(pts.size()) < count) {
    Vecd z(n);
    for (int d = 0; d < n; ++d) {
      const double r = radical_inverse(idx, kPrimes[static_cast<std::size_t>(d)]);
      z(d) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * r - 1.0);
    }
    ++idx;
    const double norm = z.norm();
    if (norm > 1e-12) pts.push_back(z / norm);
  }
  return pts;
}

SphereMinimum min_on_sphere(const HomogeneousForm& form, int resolution) {
  if (form.degree() % 2 != 0) {
    throw Error(ErrorKind::Contract, "min_on_sphere requires an even-degree form");
  }
  if (resolution < 8) throw Error(ErrorKind::Contract, "min_on_sphere resolution must be >= 8");
  SphereMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  best.resolution = resolution;
  const int n = form.dim();
  for (const auto& u0 : sphere_points(n, resolution)) {
    auto [v, u] = n == 1 ? std::pair<double, Vecd>{form(u0), u0} : sphere_descent(form.poly(), u0);
    if (v < best.value) {
      best.value = v;
      best.witness = u;
    }
  }
  best.positive_definite = best.value > kPdTolerance;
  return best;
}

// --- polynomial theorem constants --------------------------------------------

MultiPoly inner_product_poly(const MultiPoly& V, const MultiPoly& F, double a) {
  if (V.dim() != F.dim()) throw Error(ErrorKind::InvalidInput, "V and F dimensions differ");
  const int n = V.dim();
  MultiPoly out(n);
  for (int i = 0; i < n; ++i) {
    out += V.derivative(i) * (F.derivative(i) - a * MultiPoly::variable(n, i));
  }
  return out;
}

Uf1Constants uf1_constants(const MultiPoly& V, const MultiPoly& F, std::optional<double> a_override,
                           int resolution) {
  if (V.dim() != F.dim()) throw Error(ErrorKind::InvalidInput, "V and F dimensions differ");
  const int n = V.dim();
  const HomogeneousForm P = leading_form(V);
  const HomogeneousForm Q = leading_form(F);
  if (P.degree() < 2 || P.degree() % 2 != 0) not_positive_definite("V", P);
  if (Q.degree() < 2 || Q.degree() % 2 != 0) not_positive_definite("F", Q);
  const SphereMinimum minP = min_on_sphere(P, resolution);
  const SphereMinimum minQ = min_on_sphere(Q, resolution);
  if (!minP.positive_definite) not_positive_definite("V", P);
  if (!minQ.positive_definite) not_positive_definite("F", Q);

  Uf1Constants k;
  k.p = P.degree() / 2;
  k.q = Q.degree() / 2;
  k.m = k.p + k.q - 1;
  k.nu = minQ.value;
  k.lambda = std::numeric_limits<double>::quiet_NaN();
  k.literal_norm_power = nearly_equal(Q.poly(), MultiPoly::norm_power(n, k.q)) ||
                         nearly_equal(P.poly(), MultiPoly::norm_power(n, k.p));

  const bool quadratic = k.p == 1 && k.q == 1;
  if (quadratic) {
    k.lambda = std::min(minP.value, minQ.value);
    k.a = a_override.value_or(k.lambda);
    const double window = k.lambda + k.lambda * k.a - 0.5 * k.a * k.a;
    if (!(k.a > 0.0 && k.a < 2.0 * k.lambda && window > 0.0)) {
      throw Error(ErrorKind::Contract, "a must lie in (0, 2 lambda) with lambda + lambda a - a^2/2 > 0");
    }
  } else {
    k.a = a_override.value_or(1.0);
    if (!(k.a > 0.0)) throw Error(ErrorKind::Contract, "a must be positive");
  }

  const int lead_degree = 2 * k.m;
  while (true) {
    const MultiPoly lead = inner_product_poly(V, F, k.a).homogeneous_part(lead_degree);
    if (!lead.is_zero()) {
      const SphereMinimum sm = min_on_sphere(HomogeneousForm(lead), resolution);
      if (sm.positive_definite) {
        k.inner_leading_min = sm.value;
        break;
      }
    }
    if (a_override || k.a_reductions >= 40) {
      throw Error(ErrorKind::CertificateFailure,
                  "leading form of <grad V, grad F - a x> is not positive definite for a = " +
                      fmt_double(k.a));
    }
    k.a *= 0.5;
    ++k.a_reductions;
  }

  k.c_max_formula = quadratic ? std::min(2.0 * (2.0 * k.lambda - k.a), 2.0 * k.a)
                              : std::min(4.0 * k.p * k.q * k.nu, 2.0 * k.a);
  k.c_max = std::min(k.inner_leading_min, 2.0 * k.a);

  if (!(k.c_max > 0.0) || !(k.nu > 0.0)) {
    throw Error(ErrorKind::CertificateFailure, "derived constants violate positivity");
  }
  return k;
}

// --- empirical inner-product growth ------------------------------------------

InnerBoundFit fit_inner_bound(const std::function<double(const Vecd&, double)>& g, int n,
                              double period, const std::vector<double>& radii, int sphere_res,
                              int t_samples) {
  if (radii.size() < 3) throw Error(ErrorKind::Contract, "fit_inner_bound needs >= 3 shells");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw Error(ErrorKind::Contract, "radii must increase");
  }
  if (t_samples < 1) throw Error(ErrorKind::Contract, "t_samples must be >= 1");

  const auto dirs = sphere_points(n, sphere_res);
  InnerBoundFit fit;
  fit.radii = radii;
  std::vector<Vecd> argmin(radii.size());
  std::vector<double> argmin_t(radii.size());
  // (point, t, g) for the M estimate
  struct Sample {
    double r;
    double g;
  };
  std::vector<Sample> samples;
  for (std::size_t s = 0; s < radii.size(); ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < t_samples; ++j) {
      const double t = period * j / t_samples;
      for (const auto& u : dirs) {
        const Vecd x = radii[s] * u;
        const double v = g(x, t);
        if (!std::isfinite(v)) {
          throw Error(ErrorKind::NumericDomain, "inner product is not finite", witness_of(x));
        }
        samples.push_back({radii[s], v});
        if (v < best) {
          best = v;
          argmin[s] = x;
          argmin_t[s] = t;
        }
      }
    }
    fit.shell_min.push_back(best);
  }

  const std::size_t S = radii.size();
  fit.witness = argmin[S - 1];
  fit.witness_t = argmin_t[S - 1];
  if (!(fit.shell_min[S - 3] < fit.shell_min[S - 2] && fit.shell_min[S - 2] < fit.shell_min[S - 1])) {
    throw Error(ErrorKind::DissipativityFailure,
                "shell minima of <grad V, grad F - a x> do not grow over the top three shells",
                witness_of(fit.witness));
  }

  const std::size_t want = std::max<std::size_t>(3, (S + 1) / 2);
  std::vector<double> lx, ly;
  for (std::size_t s = S; s-- > S - want;) {
    if (!(fit.shell_min[s] > 0.0)) break;
    lx.push_back(std::log(radii[s]));
    ly.push_back(std::log(fit.shell_min[s]));
  }
  if (lx.size() < 2) {
    fit.grows = false;
    double worst = 0.0;
    for (const auto& smp : samples) worst = std::max(worst, -smp.g);
    fit.M_hat = worst;
    return fit;
  }
  const double k = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / k;
  fit.grows = slope > 0.0;
  fit.m_hat = slope / 2.0;
  fit.coefficient = std::exp(intercept);
  fit.b_hat = fit.coefficient / 2.0;
  double worst = 0.0;
  for (const auto& smp : samples) {
    worst = std::max(worst, fit.b_hat * std::pow(smp.r, 2.0 * fit.m_hat) - smp.g);
  }
  fit.M_hat = worst;
  return fit;
}

InnerBoundFit fit_inner_bound(const MultiPoly& V, const MultiPoly& F, double a,
                              const std::vector<double>& radii, int sphere_res) {
  if (V.dim() != F.dim()) throw Error(ErrorKind::InvalidInput, "V and F dimensions differ");
  auto g = [&](const Vecd& x, double) {
    return V.gradient(x).dot(F.gradient(x) - a * x);
  };
  return fit_inner_bound(g, V.dim(), 1.0, radii, sphere_res, 1);
}

InnerBoundFit fit_inner_bound(const TimeScalarField<double>& V, const ScalarField<double>& F,
                              int n, double a, const std::vector<double>& radii, int sphere_res,
                              int t_samples) {
  if (!F.has_grad() || !V.grad_x) {
    throw Error(ErrorKind::Capability, "fit_inner_bound needs gradients of V and F");
  }
  auto g = [&](const Vecd& x, double t) { return V.grad_x(x, t).dot(F.grad(x) - a * x); };
  return fit_inner_bound(g, n, V.period, radii, sphere_res, t_samples);
}

}  // namespace stochper
