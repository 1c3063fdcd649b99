#pragma once

#include <json.hpp>

#include "stochper/certificate.hpp"
#include "stochper/lyapunov.hpp"
#include "stochper/poly.hpp"
#include "stochper/stats.hpp"

namespace stochper {

/// Non-finite numbers become null.
nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const PeriodicityReport& report);
nlohmann::json to_json(const Uf1Constants& c);
nlohmann::json to_json(const Certificate& cert);

/// Two-space indented text with a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace stochper
