#include "stochper/sde.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochper/lyapunov.hpp"
#include "stochper/parallel.hpp"
#include "stochper/rng.hpp"

namespace stochper {

std::string to_string(Scheme s) {
  return s == Scheme::EulerMaruyama ? "euler-maruyama" : "tamed-euler";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "euler-maruyama") return Scheme::EulerMaruyama;
  if (name == "tamed-euler") return Scheme::TamedEuler;
  throw Error(ErrorKind::InvalidInput,
              "unknown scheme '" + name + "' (expected euler-maruyama or tamed-euler)");
}

double StepGrid::time_of(long step, double period) const {
  const long k = step / steps_per_period;
  const long j = step % steps_per_period;
  return static_cast<double>(k) * period + static_cast<double>(j) * h;
}

StepGrid resolve_grid(const SystemSpec& sys, const SdeConfig& cfg) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) {
    throw Error(ErrorKind::InvalidInput, "step h must be positive");
  }
  if (cfg.ensemble_size < 1) throw Error(ErrorKind::InvalidInput, "ensemble_size must be >= 1");
  if (cfg.burn_in_periods < 0) throw Error(ErrorKind::InvalidInput, "burn_in_periods must be >= 0");
  StepGrid g;
  g.requested_h = cfg.h;
  const double ratio = sys.period / cfg.h;
  const double nearest = std::round(ratio);
  g.steps_per_period = std::abs(ratio - nearest) <= 1e-12 * ratio
                           ? static_cast<long>(nearest)
                           : static_cast<long>(std::ceil(ratio));
  g.steps_per_period = std::max(g.steps_per_period, 1L);
  g.h = sys.period / static_cast<double>(g.steps_per_period);

  const auto step_of = [&](double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw Error(ErrorKind::InvalidInput, "snapshot and end times must be nonnegative");
    }
    const double k = std::floor(t / sys.period);
    const double rem = (t - k * sys.period) / g.h;
    const double j = std::round(rem);
    if (std::abs(rem - j) > 1e-9 * std::max(1.0, rem)) {
      throw Error(ErrorKind::InvalidInput,
                  "time " + format_double(t) + " is not a multiple of the snapped step " +
                      format_double(g.h));
    }
    return static_cast<long>(k) * g.steps_per_period + static_cast<long>(j);
  };

  long horizon = 0;
  if (cfg.periods) {
    if (*cfg.periods < 0) throw Error(ErrorKind::InvalidInput, "periods must be >= 0");
    horizon = static_cast<long>(*cfg.periods) * g.steps_per_period;
  }
  if (cfg.end_time) horizon = std::max(horizon, step_of(*cfg.end_time));
  if (cfg.snapshot_times.empty()) {
    if (!cfg.periods) {
      throw Error(ErrorKind::InvalidInput, "periods are required when snapshot times are not given");
    }
    for (int k = std::max(1, cfg.burn_in_periods); k <= *cfg.periods; ++k) {
      g.snapshot_steps.push_back(static_cast<long>(k) * g.steps_per_period);
    }
  } else {
    for (double t : cfg.snapshot_times) {
      const long s = step_of(t);
      if (!g.snapshot_steps.empty() && s <= g.snapshot_steps.back()) {
        throw Error(ErrorKind::InvalidInput, "snapshot times must be strictly increasing");
      }
      g.snapshot_steps.push_back(s);
    }
  }
  if (!g.snapshot_steps.empty()) horizon = std::max(horizon, g.snapshot_steps.back());
  g.total_steps = horizon;
  return g;
}

namespace {

[[noreturn]] void blow_up(const PathState& s, double h) {
  std::vector<double> w = witness_of(s.x);
  for (Eigen::Index i = 0; i < s.y.size(); ++i) w.push_back(s.y(i));
  w.push_back(s.t);
  w.push_back(h);
  throw Error(ErrorKind::BlowUp, "state is not finite after the step", std::move(w));
}

Vecd noise_term(const SystemSpec& sys, const PathState& s, const Vecd& dw) {
  if (dw.size() != sys.k) throw Error(ErrorKind::InvalidInput, "noise increment must have length k");
  return diffusion<double>(sys, s.x, s.y, s.t) * dw;
}

}  // namespace

PathState em_step(const SystemSpec& sys, const PathState& s, double h, const Vecd& dw) {
  const auto [dx, dy] = drift<double>(sys, s.x, s.y, s.t);
  PathState out{s.x + h * dx, s.y + h * dy + noise_term(sys, s, dw), s.t + h};
  if (!all_finite(out.x) || !all_finite(out.y)) blow_up(s, h);
  return out;
}

PathState tamed_step(const SystemSpec& sys, const PathState& s, double h, const Vecd& dw) {
  const auto [dx, dy] = drift<double>(sys, s.x, s.y, s.t);
  const double norm = std::sqrt(dx.squaredNorm() + dy.squaredNorm());
  const double scale = h / (1.0 + h * norm);
  PathState out{s.x + scale * dx, s.y + scale * dy + noise_term(sys, s, dw), s.t + h};
  if (!all_finite(out.x) || !all_finite(out.y)) blow_up(s, h);
  return out;
}

PathState step(Scheme scheme, const SystemSpec& sys, const PathState& s, double h,
               const Vecd& dw) {
  return scheme == Scheme::TamedEuler ? tamed_step(sys, s, h, dw) : em_step(sys, s, h, dw);
}

namespace {

/// Runs one path over the grid; `on_snapshot(index, state)` fires at each
/// snapshot step. Fields see the within-period time j h, so stepping is
/// exactly periodic. Returns false on blow-up.
template <class Fn>
bool run_path(const SystemSpec& sys, Scheme scheme, const StepGrid& grid, std::uint64_t seed,
              std::uint64_t path, PathState state, long& blowup_step, PathState& last_finite,
              Fn&& on_snapshot) {
  NormalStream rng(seed, path, StreamTag::Noise);
  const double sqrt_h = std::sqrt(grid.h);
  Vecd dw(sys.k);
  std::size_t next = 0;
  const auto& snaps = grid.snapshot_steps;
  PathState local = state;
  for (long i = 0; i <= grid.total_steps; ++i) {
    if (next < snaps.size() && snaps[next] == i) {
      PathState rec = local;
      rec.t = grid.time_of(i, sys.period);
      on_snapshot(next, rec);
      ++next;
    }
    if (i == grid.total_steps) break;
    local.t = static_cast<double>(i % grid.steps_per_period) * grid.h;
    for (int j = 0; j < sys.k; ++j) dw(j) = sqrt_h * rng.next();
    try {
      local = step(scheme, sys, local, grid.h, dw);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BlowUp && e.kind() != ErrorKind::NumericDomain) throw;
      blowup_step = i;
      last_finite = local;
      last_finite.t = grid.time_of(i, sys.period);
      return false;
    }
  }
  last_finite = local;
  last_finite.t = grid.time_of(grid.total_steps, sys.period);
  return true;
}

void check_state(const SystemSpec& sys, const PathState& s) {
  if (s.x.size() != sys.n || s.y.size() != sys.n) {
    throw Error(ErrorKind::InvalidInput, "initial state has wrong dimension");
  }
  if (!all_finite(s.x) || !all_finite(s.y)) {
    throw Error(ErrorKind::InvalidInput, "initial state is not finite");
  }
}

}  // namespace

PathResult simulate_path(const SystemSpec& sys, const SdeConfig& cfg, const PathState& initial,
                         std::uint64_t path) {
  check_state(sys, initial);
  const StepGrid grid = resolve_grid(sys, cfg);
  PathResult out;
  PathState start = initial;
  start.t = 0.0;
  out.blew_up = !run_path(sys, cfg.scheme, grid, cfg.seed, path, start, out.blowup_step,
                          out.last_finite,
                          [&](std::size_t, const PathState& s) { out.snapshots.push_back(s); });
  return out;
}

PathState draw_initial(const InitialLaw& law, std::uint64_t seed, std::uint64_t path, int n) {
  if (const auto* p = std::get_if<PathState>(&law)) {
    PathState s = *p;
    if (s.x.size() == 0) s.x = Vecd::Zero(n);
    if (s.y.size() == 0) s.y = Vecd::Zero(n);
    s.t = 0.0;
    return s;
  }
  const auto& pn = std::get<ProductNormal>(law);
  NormalStream rng(seed, path, StreamTag::Initial);
  PathState s{pn.mean_x.size() ? pn.mean_x : Vecd::Zero(n), pn.mean_y.size() ? pn.mean_y : Vecd::Zero(n),
              0.0};
  for (int i = 0; i < n; ++i) s.x(i) += pn.std_x * rng.next();
  for (int i = 0; i < n; ++i) s.y(i) += pn.std_y * rng.next();
  return s;
}

Ensemble ensemble_snapshots(const SystemSpec& sys, const SdeConfig& cfg, const InitialLaw& initial) {
  const StepGrid grid = resolve_grid(sys, cfg);
  const long N = cfg.ensemble_size;
  const int n = sys.n;
  const std::size_t S = grid.snapshot_steps.size();
  std::vector<Eigen::MatrixXd> full(S, Eigen::MatrixXd(N, 2 * n));
  std::vector<char> ok(static_cast<std::size_t>(N), 0);
  check_state(sys, draw_initial(initial, cfg.seed, 0, n));

  parallel_for(N, cfg.threads, [&](long i) {
    const auto path = static_cast<std::uint64_t>(i);
    const PathState start = draw_initial(initial, cfg.seed, path, n);
    long bstep = -1;
    PathState last;
    const bool fine = run_path(sys, cfg.scheme, grid, cfg.seed, path, start, bstep, last,
                               [&](std::size_t k, const PathState& s) {
                                 full[k].row(i).head(n) = s.x.transpose();
                                 full[k].row(i).tail(n) = s.y.transpose();
                               });
    ok[static_cast<std::size_t>(i)] = fine ? 1 : 0;
  });

  Ensemble ens;
  ens.grid = grid;
  ens.size = N;
  std::vector<std::uint64_t> accepted;
  for (long i = 0; i < N; ++i) {
    if (ok[static_cast<std::size_t>(i)]) accepted.push_back(static_cast<std::uint64_t>(i));
  }
  ens.rejected = N - static_cast<long>(accepted.size());
  if (static_cast<double>(ens.rejected) > 0.01 * static_cast<double>(N)) {
    std::ostringstream msg;
    msg << ens.rejected << " of " << N << " paths blew up with scheme " << to_string(cfg.scheme)
        << " and h = " << format_double(grid.h)
        << "; reduce h or use tamed-euler";
    throw Error(ErrorKind::EnsembleQuality, msg.str(),
                {static_cast<double>(ens.rejected) / static_cast<double>(N)});
  }
  const std::uint64_t hash = config_hash(sys, cfg);
  for (std::size_t k = 0; k < S; ++k) {
    EmpiricalLaw law;
    law.t = grid.time_of(grid.snapshot_steps[k], sys.period);
    law.seed = cfg.seed;
    law.config_hash = hash;
    law.paths = accepted;
    if (ens.rejected == 0) {
      law.samples = std::move(full[k]);
    } else {
      law.samples.resize(static_cast<Eigen::Index>(accepted.size()), 2 * n);
      for (std::size_t r = 0; r < accepted.size(); ++r) {
        law.samples.row(static_cast<Eigen::Index>(r)) =
            full[k].row(static_cast<Eigen::Index>(accepted[r]));
      }
    }
    ens.snapshots.push_back(std::move(law));
  }
  return ens;
}

DynkinEstimate dynkin_estimate(const SystemSpec& sys, const UfCertificate& cert,
                               const PathState& z, double h, long m, std::uint64_t seed,
                               int threads) {
  check_state(sys, z);
  if (!(h > 0.0) || m < 2) throw Error(ErrorKind::InvalidInput, "need h > 0 and m >= 2");
  const double base = psi<double>(sys, cert, z.x, z.y, z.t);
  std::vector<double> q(static_cast<std::size_t>(m), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(m), 0);
  const double sqrt_h = std::sqrt(h);
  parallel_for(m, threads, [&](long i) {
    NormalStream rng(seed, static_cast<std::uint64_t>(i), StreamTag::Noise);
    Vecd dw(sys.k);
    for (int j = 0; j < sys.k; ++j) dw(j) = sqrt_h * rng.next();
    try {
      const PathState next = em_step(sys, z, h, dw);
      const double v = (psi<double>(sys, cert, next.x, next.y, next.t) - base) / h;
      if (std::isfinite(v)) {
        q[static_cast<std::size_t>(i)] = v;
        ok[static_cast<std::size_t>(i)] = 1;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BlowUp && e.kind() != ErrorKind::NumericDomain) throw;
    }
  });
  DynkinEstimate out;
  double sum = 0.0;
  long used = 0;
  for (long i = 0; i < m; ++i) {
    if (ok[static_cast<std::size_t>(i)]) {
      sum += q[static_cast<std::size_t>(i)];
      ++used;
    }
  }
  out.excluded = m - used;
  if (static_cast<double>(out.excluded) > 0.01 * static_cast<double>(m)) {
    throw Error(ErrorKind::EnsembleQuality, "more than 1% of one-step samples blew up",
                {static_cast<double>(out.excluded)});
  }
  out.estimate = sum / static_cast<double>(used);
  double ss = 0.0;
  for (long i = 0; i < m; ++i) {
    if (ok[static_cast<std::size_t>(i)]) {
      const double d = q[static_cast<std::size_t>(i)] - out.estimate;
      ss += d * d;
    }
  }
  out.std_error = std::sqrt(ss / static_cast<double>(used - 1) / static_cast<double>(used));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t config_hash(const SystemSpec& sys, const SdeConfig& cfg) {
  std::ostringstream text;
  text << "system=" << sys.name << ';';
  for (const auto& [k, v] : sys.params) text << k << '=' << v << ';';
  text << "h=" << format_double(cfg.h) << ";scheme=" << to_string(cfg.scheme)
       << ";periods=" << (cfg.periods ? std::to_string(*cfg.periods) : "-")
       << ";end=" << (cfg.end_time ? format_double(*cfg.end_time) : "-") << ";seed=" << cfg.seed
       << ";ensemble=" << cfg.ensemble_size << ";burn_in=" << cfg.burn_in_periods << ";snapshots=";
  for (double t : cfg.snapshot_times) text << format_double(t) << ',';
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text.str()) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

void write_csv(const EmpiricalLaw& law, int n, const std::filesystem::path& file) {
  if (law.samples.cols() != 2 * n) throw Error(ErrorKind::Contract, "law width differs from 2n");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + file.string());
  out << "t,path";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",y" << i;
  out << '\n';
  const std::string t = format_double(law.t);
  for (Eigen::Index r = 0; r < law.samples.rows(); ++r) {
    out << t << ',' << (r < static_cast<Eigen::Index>(law.paths.size()) ? law.paths[static_cast<std::size_t>(r)] : static_cast<std::uint64_t>(r));
    for (Eigen::Index c = 0; c < law.samples.cols(); ++c) out << ',' << format_double(law.samples(r, c));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + file.string());
}

EmpiricalLaw read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, file.string() + " is empty");
  int cols = 0;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) ++cols;
  }
  if (cols < 4 || (cols - 2) % 2 != 0 || line.rfind("t,path", 0) != 0) {
    throw Error(ErrorKind::Io, file.string() + " has an unexpected header");
  }
  const int width = cols - 2;
  std::vector<double> values;
  EmpiricalLaw law;
  long rows = 0;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::Io, file.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      if (c == 0) {
        if (rows == 0) law.t = v;
        else if (v != law.t) throw Error(ErrorKind::Io, file.string() + ": mixed time stamps");
      } else if (c == 1) {
        law.paths.push_back(static_cast<std::uint64_t>(v));
      } else {
        values.push_back(v);
      }
      ++c;
    }
    if (c != cols) {
      throw Error(ErrorKind::Io, file.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    ++rows;
  }
  law.samples = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, width);
  return law;
}

}  // namespace stochper
