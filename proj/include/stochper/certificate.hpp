#pragma once

#include <string>
#include <variant>

namespace stochper {

/// Constants for the Hessian-friction Lyapunov function
///   Psi = 1/2 |y + grad F - a x|^2 + [V + a F - a^2/2 |x|^2] + D
/// and the growth/noise hypotheses it is checked against.
struct UfCertificate {
  double a = 0.0;
  double D = 0.0;
  double b = 0.0;   // inner-product growth coefficient
  double m = 0.0;   // growth exponent is 2m
  double M = 0.0;
  double e = 0.0;   // perturbation bound
  double c1 = 0.0;  // |V_t| <= c1 b |x|^{2m} + M1
  double M1 = 0.0;
  double c2 = 0.0;  // tr(Sigma Sigma^T) <= 2 c2 (a|y|^2 + b|x|^{2m}) + M2
  double M2 = 0.0;

  /// Throws Contract if a sign/range constraint fails (notably c1 + c2 >= 1).
  void validate() const;
};

/// Constants for the general-friction system with
///   Psi = 1/2 |y + alpha x|^2 + V(x) + alpha^2/2 |x|^2.
struct Uf2Certificate {
  double alpha = 0.0;
  double beta = 0.0;
  double b = 0.0;
  double eps = 0.0;
  double M = 0.0;
  double c = 0.0;
  double M1 = 0.0;

  void validate() const;
};

using Certificate = std::variant<UfCertificate, Uf2Certificate>;

inline void validate(const Certificate& cert) {
  std::visit([](const auto& c) { c.validate(); }, cert);
}

}  // namespace stochper
