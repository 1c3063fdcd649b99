#include "stochper/certificate.hpp"

#include <cmath>

#include "stochper/error.hpp"

namespace stochper {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Contract, "certificate invariant violated: " + what);
}

bool finite_all(std::initializer_list<double> vs) {
  for (double v : vs) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void UfCertificate::validate() const {
  require(finite_all({a, D, b, m, M, e, c1, M1, c2, M2}), "all constants finite");
  require(a > 0.0, "a > 0");
  require(b > 0.0, "b > 0");
  require(m > 0.0, "m > 0");
  require(M >= 0.0, "M >= 0");
  require(e >= 0.0, "e >= 0");
  require(c1 >= 0.0 && M1 >= 0.0 && c2 >= 0.0 && M2 >= 0.0, "c1, M1, c2, M2 >= 0");
  require(c1 + c2 < 1.0, "c1 + c2 < 1 (got " + std::to_string(c1 + c2) + ")");
}

void Uf2Certificate::validate() const {
  require(finite_all({alpha, beta, b, eps, M, c, M1}), "all constants finite");
  require(alpha > 0.0 && beta > 0.0, "alpha, beta > 0");
  require(b > 0.0 && eps > 0.0, "b, eps > 0");
  require(M >= 0.0 && M1 >= 0.0, "M, M1 >= 0");
  require(c > 0.0 && c < 1.0, "c in (0, 1)");
}

}  // namespace stochper
