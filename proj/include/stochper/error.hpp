#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stochper {

enum class ErrorKind {
  InvalidInput,
  NumericDomain,
  Contract,
  Catalog,
  Parse,
  EmptyInput,
  CertificateFailure,
  DissipativityFailure,
  WrongVariant,
  Capability,
  BlowUp,
  EnsembleQuality,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. The kind drives CLI exit codes;
/// the witness (when present) is the offending point or direction.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<double> witness = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  ErrorKind kind_;
  std::vector<double> witness_;
};

template <class Derived>
std::vector<double> witness_of(const Derived& v) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(static_cast<double>(v(i)));
  return out;
}

}  // namespace stochper
