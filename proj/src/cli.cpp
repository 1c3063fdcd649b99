#include "stochper/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "stochper/report_json.hpp"

namespace stochper {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + file.string());
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// Timestamps are confined to this file so every other output is reproducible.
void log_line(const RunConfig& cfg, const std::string& line) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  std::ofstream out(cfg.out_dir / "run.log", std::ios::app);
  if (out) out << timestamp() << ' ' << line << '\n';
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream ss;
  ss << std::setprecision(prec) << v;
  return ss.str();
}

std::string fmt_point(const Vecd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i), 4);
  return s + ")";
}

void print_error(std::ostream& err, const Error& e) {
  err << "error: " << e.what() << '\n';
  if (!e.witness().empty()) {
    err << "  witness: (";
    for (std::size_t i = 0; i < e.witness().size(); ++i) err << (i ? ", " : "") << format_double(e.witness()[i]);
    err << ")\n";
  }
  if (e.kind() == ErrorKind::EnsembleQuality || e.kind() == ErrorKind::BlowUp) {
    err << "  hint: reduce h or use scheme tamed-euler\n";
  }
}

template <class Body>
int guarded(const RunConfig* cfg, const std::string& command, std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    print_error(err, e);
    if (cfg) log_line(*cfg, command + " failed: " + e.what());
    return exit_code(e.kind());
  }
}

void print_report(std::ostream& out, const std::string& title, const VerificationReport& rep) {
  out << title << '\n';
  out << "  " << std::left << std::setw(20) << "condition" << std::setw(6) << "pass" << std::setw(14)
      << "margin" << "witness (x | y | t)\n";
  for (const auto& e : rep.entries) {
    out << "  " << std::left << std::setw(20) << e.condition << std::setw(6) << (e.pass ? "yes" : "NO")
        << std::setw(14) << fmt(e.margin);
    if (e.witness_x.size()) out << fmt_point(e.witness_x);
    if (e.witness_y.size()) out << " | " << fmt_point(e.witness_y);
    out << " | " << fmt(e.witness_t, 4) << '\n';
  }
}

json system_json(const SystemSpec& sys) {
  json params = json::object();
  for (const auto& [k, v] : sys.params) params[k] = v;
  return {{"builtin", sys.name}, {"n", sys.n}, {"k", sys.k}, {"period", sys.period}, {"params", params}};
}

std::string snapshot_name(std::size_t i) {
  std::ostringstream ss;
  ss << "snapshot_" << std::setw(4) << std::setfill('0') << i << ".csv";
  return ss.str();
}

// Runs the ensemble and writes CSVs plus the provenance sidecar.
Ensemble simulate_and_write(const SystemSpec& sys, const RunConfig& cfg, std::ostream& out) {
  ensure_dir(cfg.out_dir);
  log_line(cfg, "simulate start: " + sys.name + ", " + std::to_string(cfg.sde.ensemble_size) + " paths");
  Ensemble ens = ensemble_snapshots(sys, cfg.sde, cfg.initial);

  if (cfg.write_csv) {
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("snapshot_", 0) == 0 && entry.path().extension() == ".csv") fs::remove(entry.path());
    }
    for (std::size_t i = 0; i < ens.snapshots.size(); ++i) {
      write_csv(ens.snapshots[i], sys.n, cfg.out_dir / snapshot_name(i));
    }
  }
  json times = json::array();
  for (const auto& s : ens.snapshots) times.push_back(s.t);
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(sys, cfg.sde);
  json prov = system_json(sys);
  prov["seed"] = cfg.sde.seed;
  prov["scheme"] = to_string(cfg.sde.scheme);
  prov["h"] = ens.grid.h;
  prov["requested_h"] = ens.grid.requested_h;
  prov["steps_per_period"] = ens.grid.steps_per_period;
  prov["total_steps"] = ens.grid.total_steps;
  prov["ensemble_size"] = ens.size;
  prov["rejected"] = ens.rejected;
  prov["burn_in_periods"] = cfg.sde.burn_in_periods;
  prov["snapshot_times"] = times;
  prov["config_hash"] = hash.str();
  if (cfg.write_json) write_text(cfg.out_dir / "provenance.json", dump(prov));

  out << "simulated " << ens.size << " paths of " << sys.name << " (n = " << sys.n << "), h = "
      << format_double(ens.grid.h) << ", " << to_string(cfg.sde.scheme) << ", rejected " << ens.rejected << '\n';
  out << "  " << std::left << std::setw(12) << "snapshot" << std::setw(16) << "t" << "rows\n";
  for (std::size_t i = 0; i < ens.snapshots.size(); ++i) {
    out << "  " << std::left << std::setw(12) << i << std::setw(16) << fmt(ens.snapshots[i].t, 10)
        << ens.snapshots[i].samples.rows() << '\n';
  }
  log_line(cfg, "simulate done: " + std::to_string(ens.snapshots.size()) + " snapshots, " +
                    std::to_string(ens.rejected) + " rejected");
  return ens;
}

bool near_multiple(double t, double period, double& k) {
  k = std::round(t / period);
  return std::abs(t - k * period) <= 1e-9 * std::max(1.0, std::abs(t));
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CertificateFailure:
    case ErrorKind::DissipativityFailure:
      return 2;
    case ErrorKind::BlowUp:
    case ErrorKind::EnsembleQuality:
      return 3;
    default:
      return 1;
  }
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(&cfg, "verify", err, [&] {
    ensure_dir(cfg.out_dir);
    log_line(cfg, "verify start: " + cfg.builtin);
    const SystemSpec sys = build_system(cfg);
    std::string source;
    const Certificate cert = resolve_certificate(sys, cfg, &source);
    const VerificationReport hyp = verify_hypotheses(sys, cert, cfg.grid);
    const VerificationReport kh = verify_khasminskii(sys, cert, cfg.grid);
    const bool pass = hyp.all_pass() && kh.all_pass();

    if (cfg.write_json) {
      json j = {{"system", system_json(sys)},
                {"certificate", to_json(cert)},
                {"certificate_source", source},
                {"hypotheses", to_json(hyp)},
                {"khasminskii", to_json(kh)},
                {"pass", pass}};
      write_text(cfg.out_dir / "verification.json", dump(j));
    }
    std::ostringstream table;
    table << "system " << sys.name << " (n = " << sys.n << "), certificate " << source << '\n';
    print_report(table, "hypotheses", hyp);
    print_report(table, "khasminskii", kh);
    for (const auto& [k, v] : kh.constants) table << "  " << k << " = " << fmt(v) << '\n';
    table << "verdict: " << (pass ? "all conditions hold on the grid" : "some conditions fail") << '\n';
    write_text(cfg.out_dir / "summary.txt", table.str());
    out << table.str();
    log_line(cfg, std::string("verify done: ") + (pass ? "pass" : "fail"));
    return pass ? 0 : 2;
  });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(&cfg, "simulate", err, [&] {
    const SystemSpec sys = build_system(cfg);
    simulate_and_write(sys, cfg, out);
    return 0;
  });
}

int cmd_periodicity(const RunConfig& cfg, const std::optional<fs::path>& snapshots, std::ostream& out,
                    std::ostream& err) {
  return guarded(&cfg, "periodicity", err, [&] {
    std::vector<EmpiricalLaw> laws;
    double period = 0.0;
    if (snapshots) {
      if (!fs::is_directory(*snapshots)) throw Error(ErrorKind::Io, "no snapshot directory " + snapshots->string());
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(*snapshots)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("snapshot_", 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw Error(ErrorKind::Io, "no snapshot_*.csv files in " + snapshots->string());
      for (const auto& f : files) laws.push_back(read_csv(f));
      for (std::size_t i = 1; i < laws.size(); ++i) {
        if (laws[i].samples.cols() != laws[0].samples.cols()) {
          throw Error(ErrorKind::Io, files[i].string() + " has a different state dimension");
        }
        if (!(laws[i].t > laws[i - 1].t)) throw Error(ErrorKind::Io, files[i].string() + " is out of time order");
      }
      const fs::path prov = *snapshots / "provenance.json";
      if (fs::exists(prov)) {
        std::ifstream in(prov);
        try {
          period = json::parse(in).at("period").get<double>();
        } catch (const json::exception& e) {
          throw Error(ErrorKind::Io, prov.string() + ": " + e.what());
        }
      } else {
        period = build_system(cfg).period;
      }
    } else {
      const SystemSpec sys = build_system(cfg);
      period = sys.period;
      laws = simulate_and_write(sys, cfg, out).snapshots;
    }
    ensure_dir(cfg.out_dir);

    std::vector<EmpiricalLaw> strobe;
    for (const auto& l : laws) {
      double k = 0.0;
      if (near_multiple(l.t, period, k)) strobe.push_back(l);
    }
    PeriodicityOptions opt = cfg.stats;
    opt.period = period;
    PeriodicityReport rep = periodicity_report(strobe, opt);

    if (cfg.profile) {
      // matched within-period times of the last two periods that have any
      auto index_of = [&](double t) { return static_cast<long>(std::floor(t / period + 1e-9)); };
      const long last = index_of(laws.back().t);
      std::vector<EmpiricalLaw> first, second;
      for (const auto& a : laws) {
        if (index_of(a.t) != last - 1) continue;
        for (const auto& b : laws) {
          if (index_of(b.t) == last && std::abs(b.t - a.t - period) <= 1e-9 * std::max(1.0, std::abs(b.t))) {
            first.push_back(a);
            second.push_back(b);
          }
        }
      }
      if (first.empty()) throw Error(ErrorKind::Contract, "profile needs snapshots at matched times of two periods");
      rep.profile = periodic_profile(first, second, period);
    }

    if (cfg.write_json) write_text(cfg.out_dir / "periodicity.json", dump(to_json(rep)));
    std::ostringstream table;
    table << "periodicity (" << to_string(rep.statistic) << ", epsilon " << fmt(opt.epsilon) << ", alpha "
          << fmt(opt.alpha) << ")\n";
    table << "  " << std::left << std::setw(6) << "k" << std::setw(14) << "distance" << std::setw(14) << "raw" << "p\n";
    for (const auto& d : rep.distances) {
      table << "  " << std::left << std::setw(6) << d.k << std::setw(14) << fmt(d.value) << std::setw(14)
            << fmt(d.raw) << fmt(d.p, 4) << '\n';
    }
    table << "  trend p = " << fmt(rep.trend_p, 4) << '\n';
    if (rep.profile) table << "  profile max |z| = " << fmt(rep.profile->max_abs_z, 4) << " over " << rep.profile->rows.size() << " times\n";
    table << "verdict: " << rep.verdict << '\n';
    out << table.str();
    log_line(cfg, "periodicity done: " + rep.verdict);
    return rep.consistent ? 0 : 2;
  });
}

int cmd_list_builtins(std::ostream& out) {
  for (const auto& b : list_builtins()) {
    out << std::left << std::setw(20) << b.name << b.description << '\n';
    out << std::setw(20) << "" << "params: " << b.params << '\n';
  }
  return 0;
}

int cmd_constants(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(&cfg, "constants", err, [&] {
    const SystemSpec sys = build_system(cfg);
    if (!sys.meta.V_poly || !sys.meta.F_poly) {
      throw Error(ErrorKind::InvalidInput, "'" + sys.name + "' is not given by polynomial V and F");
    }
    const Uf1Constants c = uf1_constants(*sys.meta.V_poly, *sys.meta.F_poly);
    const std::string text = dump(to_json(c));
    if (cfg.write_json) {
      ensure_dir(cfg.out_dir);
      write_text(cfg.out_dir / "constants.json", text);
    }
    out << text;
    return 0;
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Periodic-in-law certification and simulation for stochastic Newtonian systems"};
  app.set_version_flag("--version", "stochper 1.0");
  std::string config_path, out_dir, snapshots;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "run configuration (YAML)");
  app.add_option("--seed", seed, "RNG seed, overrides the config");
  app.add_option("--out", out_dir, "output directory, overrides the config");
  app.add_option("--threads", threads, "worker threads (speed only)")->check(CLI::PositiveNumber);
  app.fallthrough();
  app.require_subcommand(1);
  auto* verify = app.add_subcommand("verify", "check the Lyapunov hypotheses on a grid");
  auto* simulate = app.add_subcommand("simulate", "run the ensemble and write snapshot CSVs");
  auto* periodicity = app.add_subcommand("periodicity", "test snapshots for periodicity in law");
  periodicity->add_option("--snapshots", snapshots, "directory of snapshot_*.csv (skips simulation)");
  auto* list = app.add_subcommand("list-builtins", "list builtin systems");
  auto* constants = app.add_subcommand("constants", "polynomial existence constants for the configured V, F");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) return cmd_list_builtins(std::cout);
  if (config_path.empty()) {
    std::cerr << "error: --config is required for '" << app.get_subcommands().front()->get_name() << "'\n";
    return 1;
  }
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    print_error(std::cerr, e);
    return exit_code(e.kind());
  }
  if (seed) {
    cfg.sde.seed = *seed;
    cfg.stats.test.seed = *seed;
  }
  if (threads) cfg.sde.threads = cfg.stats.test.threads = *threads;
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  try {
    if (verify->parsed()) return cmd_verify(cfg, std::cout, std::cerr);
    if (simulate->parsed()) return cmd_simulate(cfg, std::cout, std::cerr);
    if (periodicity->parsed()) {
      return cmd_periodicity(cfg, snapshots.empty() ? std::nullopt : std::optional<fs::path>(snapshots),
                             std::cout, std::cerr);
    }
    if (constants->parsed()) return cmd_constants(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace stochper
