#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochper/certificate.hpp"
#include "stochper/error.hpp"
#include "stochper/field.hpp"
#include "stochper/poly.hpp"
#include "stochper/types.hpp"

namespace stochper {

/// String-valued builtin parameters, e.g. {"n": "2", "noise": "saturating"}.
using ParamMap = std::map<std::string, std::string>;

/// Constants a builtin ships with; absent entries must be derived.
struct BuiltinMetadata {
  std::optional<double> a;
  std::optional<double> D;
  std::optional<Certificate> certificate;
  std::optional<MultiPoly> V_poly;  // polynomial potential, if any
  std::optional<MultiPoly> F_poly;  // polynomial friction function, if any
  std::string note;
};

/// A stochastic time-periodic Newtonian system
///   dx = y dt,  dy = -[M(x,y,t) y + grad_x V(x,t) + E(x,y,t)] dt + Sigma dB
/// with M = D^2 F(x) (Hessian friction) or a general matrix C(x,y,t).
/// Builtins carry both a double and a quad-precision copy of every field.
struct SystemSpec {
  std::string name;
  int n = 0;
  int k = 0;
  double period = 0.0;
  SystemFields<double> fields;
  std::optional<SystemFields<Quad>> quad_fields;
  BuiltinMetadata meta;
  ParamMap params;

  bool hessian_friction() const {
    return std::holds_alternative<HessianFriction<double>>(fields.friction);
  }

  template <class S>
  const SystemFields<S>& get() const {
    if constexpr (std::is_same_v<S, double>) {
      return fields;
    } else {
      if (!quad_fields) {
        throw Error(ErrorKind::Capability, "system '" + name + "' has no quad-precision fields");
      }
      return *quad_fields;
    }
  }

  /// Throws Contract if the period, dimensions or noise shape are invalid.
  void validate() const;
};

/// Friction matrix D^2 F(x) or C(x, y, t).
template <class S>
Mat<S> friction_matrix(const SystemFields<S>& f, const Vec<S>& x, const Vec<S>& y, const S& t) {
  if (const auto* h = std::get_if<HessianFriction<S>>(&f.friction)) return h->F.hess(x);
  return std::get<GeneralFriction<S>>(f.friction).eval(x, y, t);
}

namespace detail {
template <class S>
void check_dims(const SystemSpec& sys, const Vec<S>& x, const Vec<S>& y) {
  if (x.size() != sys.n || y.size() != sys.n) {
    throw Error(ErrorKind::InvalidInput, "state dimension does not match system dimension " +
                                             std::to_string(sys.n));
  }
}

template <class S>
std::vector<double> point_witness(const Vec<S>& x, const Vec<S>& y, const S& t) {
  std::vector<double> w = witness_of(x);
  for (Eigen::Index i = 0; i < y.size(); ++i) w.push_back(static_cast<double>(y(i)));
  w.push_back(static_cast<double>(t));
  return w;
}
}  // namespace detail

/// Right-hand side (dx, dy) of the drift.
template <class S>
std::pair<Vec<S>, Vec<S>> drift(const SystemSpec& sys, const Vec<S>& x, const Vec<S>& y,
                                const S& t) {
  detail::check_dims(sys, x, y);
  const SystemFields<S>& f = sys.get<S>();
  Vec<S> dy = -(friction_matrix(f, x, y, t) * y + f.potential.grad_x(x, t) +
                f.perturbation.eval(x, y, t));
  if (!all_finite(dy)) {
    throw Error(ErrorKind::NumericDomain, "drift is not finite", detail::point_witness(x, y, t));
  }
  return {y, std::move(dy)};
}

template <class S>
Mat<S> diffusion(const SystemSpec& sys, const Vec<S>& x, const Vec<S>& y, const S& t) {
  detail::check_dims(sys, x, y);
  Mat<S> sigma = sys.get<S>().noise.eval(x, y, t);
  if (sigma.rows() != sys.n || sigma.cols() != sys.k) {
    throw Error(ErrorKind::Contract, "noise intensity has wrong shape");
  }
  if (!all_finite(sigma)) {
    throw Error(ErrorKind::NumericDomain, "noise intensity is not finite",
                detail::point_witness(x, y, t));
  }
  return sigma;
}

struct BuiltinInfo {
  std::string name;
  std::string description;
  std::string params;
};

std::vector<BuiltinInfo> list_builtins();

/// Builds a named system. Common params:
///   n         dimension (default 1; open-problem-v4 and van-der-pol accept n)
///   noise     zero | constant | saturating (default per builtin)
///   sigma     constant noise level, Sigma = sigma I
///   c, C      saturating noise, Sigma = sqrt(c (|x|^{2m} + |y|^2) + C) I
///   forcing   amplitude A of E = -A sin(t) e_1
/// Throws Catalog for unknown names and Parse for malformed polynomials.
SystemSpec builtin(const std::string& name, const ParamMap& params = {});

}  // namespace stochper
