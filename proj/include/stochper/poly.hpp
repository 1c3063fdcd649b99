#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochper/field.hpp"
#include "stochper/types.hpp"

namespace stochper {

/// Multivariate polynomial over R^n stored as exponent-tuple -> coefficient.
/// Zero coefficients are never stored, so the zero polynomial has no terms.
class MultiPoly {
 public:
  using Exponents = std::vector<int>;

  struct Term {
    Exponents exps;
    double coef = 0.0;
  };

  MultiPoly() = default;
  explicit MultiPoly(int n);
  /// Duplicate exponent tuples are summed.
  MultiPoly(int n, const std::vector<Term>& terms);

  static MultiPoly constant(int n, double c);
  static MultiPoly variable(int n, int i);
  /// |x|^{2k} expanded into monomials.
  static MultiPoly norm_power(int n, int k);

  /// Parses the record format `((4,0), 1.0) ((0,2), -0.5)`; records may be
  /// separated by commas and the whole list wrapped in `[ ]`. Repeated
  /// exponent tuples are rejected. Throws Parse.
  static MultiPoly parse(std::string_view text);

  int dim() const { return n_; }
  /// Maximal total degree, -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_homogeneous() const;
  std::size_t size() const { return terms_.size(); }
  std::vector<Term> terms() const;
  double coefficient(const Exponents& e) const;

  template <class S>
  S operator()(const Vec<S>& x) const;
  template <class S>
  Vec<S> gradient(const Vec<S>& x) const;
  template <class S>
  Mat<S> hessian(const Vec<S>& x) const;

  MultiPoly derivative(int i) const;
  MultiPoly homogeneous_part(int d) const;

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator-=(const MultiPoly& o);
  MultiPoly& operator*=(double s);
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator*(MultiPoly a, double s) { return a *= s; }
  friend MultiPoly operator*(double s, MultiPoly a) { return a *= s; }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);

  /// Same record format accepted by parse().
  std::string to_string() const;

 private:
  void check_dim(const MultiPoly& o) const;

  int n_ = 0;
  std::map<Exponents, double> terms_;
};

/// A polynomial whose terms all share one total degree.
class HomogeneousForm {
 public:
  /// Throws Contract unless `p` is nonzero and homogeneous.
  explicit HomogeneousForm(MultiPoly p);

  const MultiPoly& poly() const { return poly_; }
  int degree() const { return degree_; }
  int dim() const { return poly_.dim(); }

  template <class S>
  S operator()(const Vec<S>& x) const {
    return poly_(x);
  }

 private:
  MultiPoly poly_;
  int degree_ = 0;
};

/// Top-degree homogeneous part. Throws EmptyInput on the zero polynomial.
HomogeneousForm leading_form(const MultiPoly& poly);

/// Deterministic quasi-uniform unit vectors. Point sets are nested: the
/// first `count` points for count = N are a subset of those for 2N.
std::vector<Vecd> sphere_points(int n, int count);

struct SphereMinimum {
  double value = 0.0;
  Vecd witness;
  bool positive_definite = false;
  int resolution = 0;
};

/// Minimum of an even-degree form over the unit sphere: sampling followed by
/// projected-gradient descent (200 iterations, step halving) from every
/// sample. Heuristic, not a certificate. Throws Contract on odd degree or
/// resolution < 8.
SphereMinimum min_on_sphere(const HomogeneousForm& form, int resolution);

/// Constants of the polynomial existence theorem.
struct Uf1Constants {
  int p = 0;
  int q = 0;
  int m = 0;  // p + q - 1
  double lambda = 0.0;  // p = q = 1: sphere min of min(P2, Q2); else NaN
  double nu = 0.0;      // sphere min of Q_{2q}
  double a = 0.0;
  /// Admissible noise constant: min{L, 2a} with L the sphere minimum of the
  /// leading form of <grad V, grad F - a x>.
  double c_max = 0.0;
  /// Closed-form value min{2(2 lambda - a), 2a} or min{4 p q nu, 2a}.
  double c_max_formula = 0.0;
  double inner_leading_min = 0.0;
  /// Either Q_{2q} = |x|^{2q} or P_{2p} = |x|^{2p} holds literally.
  bool literal_norm_power = false;
  /// Number of times a was halved to keep the inner-product leading form
  /// positive definite (only needed when q = 1 < p).
  int a_reductions = 0;
};

/// <grad V, grad F - a x> as a polynomial.
MultiPoly inner_product_poly(const MultiPoly& V, const MultiPoly& F, double a);

/// Throws CertificateFailure (witness = direction) if a leading form is not
/// positive definite or has odd degree.
Uf1Constants uf1_constants(const MultiPoly& V, const MultiPoly& F,
                           std::optional<double> a_override = std::nullopt,
                           int resolution = 512);

struct InnerBoundFit {
  double b_hat = 0.0;
  double m_hat = 0.0;
  double M_hat = 0.0;
  double coefficient = 0.0;  // fitted leading coefficient, b_hat = coefficient / 2
  std::vector<double> radii;
  std::vector<double> shell_min;
  bool grows = false;
  Vecd witness;  // argmin of g on the outermost shell
  double witness_t = 0.0;
};

/// g(x, t) = <grad_x V, grad F - a x>. Fits log(min_shell g) against log R on
/// the outer half of the shells (at least three). Throws
/// DissipativityFailure if the minima over the top three shells are not
/// strictly increasing.
InnerBoundFit fit_inner_bound(const std::function<double(const Vecd&, double)>& g, int n,
                              double period, const std::vector<double>& radii, int sphere_res,
                              int t_samples);

InnerBoundFit fit_inner_bound(const MultiPoly& V, const MultiPoly& F, double a,
                              const std::vector<double>& radii, int sphere_res);

InnerBoundFit fit_inner_bound(const TimeScalarField<double>& V, const ScalarField<double>& F,
                              int n, double a, const std::vector<double>& radii, int sphere_res,
                              int t_samples);

// ---------------------------------------------------------------------------

template <class S>
S MultiPoly::operator()(const Vec<S>& x) const {
  S total(0);
  for (const auto& [e, c] : terms_) {
    S mono(c);
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) mono *= x(i);
    }
    total += mono;
  }
  return total;
}

template <class S>
Vec<S> MultiPoly::gradient(const Vec<S>& x) const {
  Vec<S> g = Vec<S>::Zero(n_);
  for (const auto& [e, c] : terms_) {
    for (int i = 0; i < n_; ++i) {
      const int ei = e[static_cast<std::size_t>(i)];
      if (ei == 0) continue;
      S mono(c * ei);
      for (int j = 0; j < n_; ++j) {
        const int p = e[static_cast<std::size_t>(j)] - (j == i ? 1 : 0);
        for (int k = 0; k < p; ++k) mono *= x(j);
      }
      g(i) += mono;
    }
  }
  return g;
}

template <class S>
Mat<S> MultiPoly::hessian(const Vec<S>& x) const {
  Mat<S> h = Mat<S>::Zero(n_, n_);
  for (const auto& [e, c] : terms_) {
    for (int i = 0; i < n_; ++i) {
      for (int j = i; j < n_; ++j) {
        Exponents d = e;
        double factor = c;
        factor *= d[static_cast<std::size_t>(i)];
        if (d[static_cast<std::size_t>(i)]-- == 0) continue;
        factor *= d[static_cast<std::size_t>(j)];
        if (d[static_cast<std::size_t>(j)]-- == 0) continue;
        S mono(factor);
        for (int k = 0; k < n_; ++k) {
          for (int r = 0; r < d[static_cast<std::size_t>(k)]; ++r) mono *= x(k);
        }
        h(i, j) += mono;
      }
    }
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < i; ++j) h(i, j) = h(j, i);
  }
  return h;
}

}  // namespace stochper
