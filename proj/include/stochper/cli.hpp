#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "stochper/certificate.hpp"
#include "stochper/lyapunov.hpp"
#include "stochper/model.hpp"
#include "stochper/sde.hpp"
#include "stochper/stats.hpp"

namespace stochper {

enum class CertificateMode { Default, Explicit, Derive };

/// One file fully determines a run. YAML layout:
///
///   system:      {builtin: <name>, params: {...}}
///                | {polynomial: {V: <records>, F: <records>, noise, ...}}
///   certificate: {mode: default | explicit | derive, uf: {...} | uf2: {...}}
///                (derive: true is shorthand for mode: derive)
///   grid:        {radii: [...], sphere_res, t_samples, y_box, y_res,
///                 psi_threshold, lpsi_threshold}
///   sde:         {h, scheme, periods, end_time, seed, ensemble_size,
///                 burn_in_periods, snapshot_times: [...],
///                 initial: {x: [...], y: [...]} | {normal: {std_x, std_y, ...}}}
///   stats:       {statistic, epsilon, alpha, n_perm, n_projections, seed,
///                 standardize, profile}
///   output:      {directory, formats: [json, csv]}
struct RunConfig {
  std::string builtin;
  ParamMap params;
  CertificateMode cert_mode = CertificateMode::Default;
  /// Explicit mode: "uf" or "uf2" constants; keys left out fall back to
  /// the builtin's shipped certificate, else zero.
  std::string cert_kind;
  std::map<std::string, double> cert_values;
  VerificationGrid grid;
  SdeConfig sde;
  InitialLaw initial = PathState{};
  PeriodicityOptions stats;
  bool stats_seed_set = false;
  bool profile = false;
  std::filesystem::path out_dir = "out";
  bool write_json = true;
  bool write_csv = true;
};

/// Throws Parse with "<origin>:<line>:<column>: ..." diagnostics.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& file);

SystemSpec build_system(const RunConfig& cfg);

/// Constants filled in from polynomial machinery and grid sweeps.
Certificate derive_certificate(const SystemSpec& sys, const VerificationGrid& grid);

/// Certificate per the config mode. `note` receives a one-line provenance.
Certificate resolve_certificate(const SystemSpec& sys, const RunConfig& cfg, std::string* note = nullptr);

/// 0 success, 1 usage/config, 2 certificate or verdict failure, 3 simulation quality.
int exit_code(ErrorKind kind);

// Commands print a summary to `out`, diagnostics to `err`, write files
// under cfg.out_dir and return an exit code instead of throwing.
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Reads snapshot_*.csv from `snapshots` when given, else simulates first.
/// Only snapshots at multiples of the period enter the distance sequence;
/// the rest feed the profile when stats.profile is on.
int cmd_periodicity(const RunConfig& cfg, const std::optional<std::filesystem::path>& snapshots,
                    std::ostream& out, std::ostream& err);
int cmd_list_builtins(std::ostream& out);
int cmd_constants(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Entry point for the command-line tool; never throws.
int run_cli(int argc, char** argv);

}  // namespace stochper
