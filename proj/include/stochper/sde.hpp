#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stochper/certificate.hpp"
#include "stochper/model.hpp"

namespace stochper {

enum class Scheme { EulerMaruyama, TamedEuler };

std::string to_string(Scheme s);
/// Accepts "euler-maruyama" and "tamed-euler". Throws InvalidInput.
Scheme parse_scheme(const std::string& name);

struct PathState {
  Vecd x;
  Vecd y;
  double t = 0.0;
};

struct SdeConfig {
  double h = 1e-3;
  Scheme scheme = Scheme::TamedEuler;
  /// Horizon: number of periods, or an end time; the later of the two and
  /// the last snapshot wins.
  std::optional<int> periods;
  std::optional<double> end_time;
  std::uint64_t seed = 0;
  int ensemble_size = 1;
  int burn_in_periods = 0;
  /// Empty means k T for k = max(1, burn_in_periods) .. periods.
  std::vector<double> snapshot_times;
  /// Speed only; results never depend on it.
  int threads = 1;
};

/// The step grid after snapping h to T / N.
struct StepGrid {
  double requested_h = 0.0;
  double h = 0.0;
  long steps_per_period = 0;
  long total_steps = 0;
  std::vector<long> snapshot_steps;

  /// Exact time of a grid step: (step / N) T + (step mod N) h.
  double time_of(long step, double period) const;
};

/// Throws InvalidInput if h or the horizon is invalid or a snapshot time is
/// not a grid point (tolerance 1e-9 relative).
StepGrid resolve_grid(const SystemSpec& sys, const SdeConfig& cfg);

/// x+ = x + h y, y+ = y + h dy + Sigma dW. Throws BlowUp (witness = state, h)
/// when the update is not finite.
PathState em_step(const SystemSpec& sys, const PathState& s, double h, const Vecd& dw);

/// Drift increment h b / (1 + h |b|) with b = (y, dy); diffusion untamed.
PathState tamed_step(const SystemSpec& sys, const PathState& s, double h, const Vecd& dw);

PathState step(Scheme scheme, const SystemSpec& sys, const PathState& s, double h, const Vecd& dw);

struct PathResult {
  std::vector<PathState> snapshots;
  bool blew_up = false;
  long blowup_step = -1;
  PathState last_finite;
};

/// One path with RNG substream `path`; snapshots at the configured times.
/// A blow-up truncates the snapshot list and keeps the last finite state.
PathResult simulate_path(const SystemSpec& sys, const SdeConfig& cfg, const PathState& initial,
                         std::uint64_t path = 0);

/// Point mass, or independent normals per coordinate.
struct ProductNormal {
  Vecd mean_x, mean_y;
  double std_x = 1.0;
  double std_y = 1.0;
};
using InitialLaw = std::variant<PathState, ProductNormal>;

PathState draw_initial(const InitialLaw& law, std::uint64_t seed, std::uint64_t path, int n);

/// Ensemble samples of (x, y) frozen at one time; rows are accepted paths.
struct EmpiricalLaw {
  double t = 0.0;
  Eigen::MatrixXd samples;         // rows x 2n
  std::vector<std::uint64_t> paths;  // path index of each row
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

struct Ensemble {
  std::vector<EmpiricalLaw> snapshots;
  StepGrid grid;
  long rejected = 0;
  long size = 0;
};

/// Paths run concurrently; path i draws from substream (seed, i), so results
/// are identical for any thread count. Throws EnsembleQuality when more
/// than 1% of paths blow up.
Ensemble ensemble_snapshots(const SystemSpec& sys, const SdeConfig& cfg,
                            const InitialLaw& initial = PathState{});

struct DynkinEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long excluded = 0;
};

/// Monte Carlo (E Psi(Z_h) - Psi(z)) / h over m one-step Euler-Maruyama
/// samples; sample i uses substream (seed, i).
DynkinEstimate dynkin_estimate(const SystemSpec& sys, const UfCertificate& cert,
                               const PathState& z, double h, long m, std::uint64_t seed,
                               int threads = 1);

/// FNV-1a over the canonical text of the system name, params and config.
std::uint64_t config_hash(const SystemSpec& sys, const SdeConfig& cfg);

/// CSV with header `t,path,x1..xn,y1..yn`, shortest round-trip number format.
void write_csv(const EmpiricalLaw& law, int n, const std::filesystem::path& file);
EmpiricalLaw read_csv(const std::filesystem::path& file);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace stochper
