#include "stochper/error.hpp"

namespace stochper {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::NumericDomain: return "numeric-domain";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Catalog: return "catalog";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::CertificateFailure: return "certificate-failure";
    case ErrorKind::DissipativityFailure: return "dissipativity-failure";
    case ErrorKind::WrongVariant: return "wrong-variant";
    case ErrorKind::Capability: return "capability";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::EnsembleQuality: return "ensemble-quality";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::vector<double> witness)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      witness_(std::move(witness)) {}

}  // namespace stochper
