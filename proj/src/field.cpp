#include "stochper/field.hpp"

#include <cmath>

#include "stochper/error.hpp"

namespace stochper {

namespace {

double checked(const std::function<double(const Vecd&)>& f, const Vecd& p) {
  const double v = f(p);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NumericDomain, "non-finite value in finite-difference stencil",
                witness_of(p));
  }
  return v;
}

}  // namespace

Vecd fd_gradient(const std::function<double(const Vecd&)>& f, const Vecd& x) {
  const double h = 1e-5 * (1.0 + x.norm());
  Vecd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vecd p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (checked(f, p) - checked(f, m)) / (2.0 * h);
  }
  return g;
}

Matd fd_hessian(const std::function<double(const Vecd&)>& f, const Vecd& x) {
  const double h = 1e-4 * (1.0 + x.norm());
  const Eigen::Index n = x.size();
  const double center = checked(f, x);
  Matd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vecd p = x, m = x;
    p(i) += h;
    m(i) -= h;
    H(i, i) = (checked(f, p) - 2.0 * center + checked(f, m)) / (h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Vecd pp = x, pm = x, mp = x, mm = x;
      pp(i) += h, pp(j) += h;
      pm(i) += h, pm(j) -= h;
      mp(i) -= h, mp(j) += h;
      mm(i) -= h, mm(j) -= h;
      H(i, j) = (checked(f, pp) - checked(f, pm) - checked(f, mp) + checked(f, mm)) / (4.0 * h * h);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

ScalarField<double> numeric_derivatives(ScalarField<double> field) {
  if (!field.eval) throw Error(ErrorKind::Capability, "scalar field has no eval");
  auto f = field.eval;
  if (!field.grad) field.grad = [f](const Vecd& x) { return fd_gradient(f, x); };
  if (!field.hess) field.hess = [f](const Vecd& x) { return fd_hessian(f, x); };
  return field;
}

}  // namespace stochper
