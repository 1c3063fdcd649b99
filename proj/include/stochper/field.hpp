#pragma once

#include <functional>
#include <variant>

#include "stochper/types.hpp"

namespace stochper {

/// Time-independent scalar field on R^n (the friction function F).
/// `hess` is an optional capability; builtins always supply it.
template <class S>
struct ScalarField {
  std::function<S(const Vec<S>&)> eval;
  std::function<Vec<S>(const Vec<S>&)> grad;
  std::function<Mat<S>(const Vec<S>&)> hess;

  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hess() const { return static_cast<bool>(hess); }
};

/// Time-periodic scalar field V(x, t) with its x-gradient and t-derivative.
template <class S>
struct TimeScalarField {
  std::function<S(const Vec<S>&, S)> eval;
  std::function<Vec<S>(const Vec<S>&, S)> grad_x;
  std::function<S(const Vec<S>&, S)> dt;
  double period = 0.0;
  double lower_bound = 0.0;  // declared; verifiers check it on the grid
  bool time_dependent = true;
};

/// Bounded perturbation E(x, y, t) with declared sup-norm bound.
template <class S>
struct VectorField {
  std::function<Vec<S>(const Vec<S>&, const Vec<S>&, S)> eval;
  double bound = 0.0;
};

/// Noise intensity Sigma(x, y, t), an n x k matrix.
template <class S>
struct MatrixField {
  std::function<Mat<S>(const Vec<S>&, const Vec<S>&, S)> eval;
  int cols = 0;
};

/// Friction D^2 F(x) from a friction function F.
template <class S>
struct HessianFriction {
  ScalarField<S> F;
};

/// General friction matrix C(x, y, t) with C^s >= 2 alpha I and ||C|| <= beta.
template <class S>
struct GeneralFriction {
  std::function<Mat<S>(const Vec<S>&, const Vec<S>&, S)> eval;
  double alpha = 0.0;
  double beta = 0.0;
};

template <class S>
using FrictionSpec = std::variant<HessianFriction<S>, GeneralFriction<S>>;

template <class S>
struct SystemFields {
  FrictionSpec<S> friction;
  TimeScalarField<S> potential;
  VectorField<S> perturbation;
  MatrixField<S> noise;
};

/// Fills in central-difference gradient (step 1e-5 (1 + |x|)) and Hessian
/// (step 1e-4 (1 + |x|)) for a field that only provides `eval`. Existing
/// analytic derivatives are kept. Throws NumericDomain if a stencil value is
/// not finite.
ScalarField<double> numeric_derivatives(ScalarField<double> field);

/// Central-difference gradient of an arbitrary function, same step rule.
Vecd fd_gradient(const std::function<double(const Vecd&)>& f, const Vecd& x);

/// Central-difference Hessian, step 1e-4 (1 + |x|); f(x) is evaluated once.
Matd fd_hessian(const std::function<double(const Vecd&)>& f, const Vecd& x);

}  // namespace stochper
