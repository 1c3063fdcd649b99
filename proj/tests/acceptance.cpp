// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "stochper/cli.hpp"
#include "stochper/lyapunov.hpp"
#include "stochper/poly.hpp"
#include "stochper/sde.hpp"
#include "stochper/stats.hpp"

using namespace stochper;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  failures += !o.pass;
  std::printf("criterion %d: %s  %s  (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// The inequality -<grad V, grad F - a x> <= bound(|x|) evaluated directly from
// closed-form gradients on radii 1..10 x 256 sphere points x 64 times.
// Returns the number of violations at tolerance 1e-9.
int sweep_inequality(const std::function<double(double r2, double s)>& lhs,
                     const std::function<double(double r)>& bound, int n) {
  const auto dirs = sphere_points(n, 256);
  int violations = 0;
  for (int R = 1; R <= 10; ++R) {
    for (const Vecd& u : dirs) {
      const double r2 = (R * u).squaredNorm();
      for (int j = 0; j < 64; ++j) {
        const double s = std::sin(2 * kPi * j / 64);
        if (lhs(r2, s) > bound(std::sqrt(r2)) + 1e-9) ++violations;
      }
    }
  }
  return violations;
}

Outcome grid_protocol(const std::string& name, double a, double D,
                      const std::function<double(double, double)>& lhs,
                      const std::function<double(double)>& bound, double time_limit) {
  const auto start = std::chrono::steady_clock::now();
  const SystemSpec sys = builtin(name, {{"n", "2"}});
  const UfCertificate cert = std::get<UfCertificate>(*sys.meta.certificate);
  VerificationGrid g;  // radii 1..10, 256 sphere points, 64 t-samples
  const VerificationReport rep = verify_hypotheses(sys, cert, g);
  const ReportEntry& h3 = rep.at("H3");
  const int direct = sweep_inequality(lhs, bound, 2);
  const double secs = elapsed(start);
  const bool ok = cert.a == a && cert.D == D && h3.pass && h3.margin >= -kMarginTol && direct == 0 &&
                  rep.all_pass() && secs < time_limit;
  std::ostringstream d;
  d << name << ": a=" << cert.a << " D=" << cert.D << " H3 margin " << h3.margin << ", direct violations "
    << direct << ", all hypotheses " << (rep.all_pass() ? "hold" : "fail");
  return {ok, d.str()};
}

Outcome criterion1() {
  // grad V = 2x / (2 + sin t + |x|^2), grad F - 8x = (4|x|^2 - 6) x
  return grid_protocol(
      "example-4.1", 8, 19, [](double r2, double s) { return -2 * r2 * (4 * r2 - 6) / (2 + s + r2); },
      [](double r) { return -8 * r * r + 36; }, 10.0);
}

Outcome criterion2() {
  // 4.2: grad V = x / sqrt(2 + sin t + |x|^2), grad F - 2x = 4|x|^2 x
  const Outcome a = grid_protocol(
      "example-4.2", 2, 1, [](double r2, double s) { return -4 * r2 * r2 / std::sqrt(2 + s + r2); },
      [](double r) { return -2 * r * r * r + 2; }, 10.0);
  // 4.3: grad V = 2(2 + sin t) e^{-|x|^2} x, grad F - x = (e^{|x|^2}(1 + |x|^2)/2 - 1) x
  const Outcome b = grid_protocol(
      "example-4.3", 1, 2,
      [](double r2, double s) { return -(2 + s) * r2 * (1 + r2 - 2 * std::exp(-r2)); },
      [](double r) { return -std::pow(r, 4) + 3; }, 10.0);
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Outcome criterion3() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  const auto ball = [&](int n) {
    Vecd v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    return Vecd(v.normalized() * 5.0 * std::pow(unif(rng), 1.0 / n));
  };
  const auto to_quad = [](const Vecd& v) {
    Vec<Quad> q(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) q(i) = Quad(v(i));
    return q;
  };
  double worst = 0.0;
  int systems = 0;
  std::string worst_name;
  for (const BuiltinInfo& info : list_builtins()) {
    ParamMap params{{"n", "2"}};
    if (info.name == "polynomial") params = {{"V", "((2,0), 1.0) ((0,2), 1.0)"}, {"F", "((4,0), 1.0) ((0,4), 1.0) ((2,2), 2.0)"}};
    const SystemSpec sys = builtin(info.name, params);
    ++systems;
    for (int i = 0; i < 1000; ++i) {
      const Vecd x = ball(sys.n), y = ball(sys.n);
      const double t = sys.period * unif(rng);
      double closed = 0.0, applied = 0.0;
      if (const auto* uf = std::get_if<UfCertificate>(&*sys.meta.certificate)) {
        closed = generator_psi<double>(sys, *uf, x, y, t);
        applied = static_cast<double>(
            generator_apply<Quad>(sys, psi_test_function<Quad>(sys, *uf), to_quad(x), to_quad(y), Quad(t)));
      } else {
        const auto& uf2 = std::get<Uf2Certificate>(*sys.meta.certificate);
        closed = generator_psi_uf2<double>(sys, uf2, x, y, t);
        applied = static_cast<double>(generator_apply<Quad>(sys, psi_uf2_test_function<Quad>(sys, uf2),
                                                            to_quad(x), to_quad(y), Quad(t)));
      }
      const double rel = std::abs(closed - applied) / std::max(1.0, std::abs(closed));
      if (rel > worst) {
        worst = rel;
        worst_name = info.name;
      }
    }
  }
  std::ostringstream d;
  d << systems << " builtins x 1000 points, worst relative gap " << worst;
  if (!worst_name.empty()) d << " (" << worst_name << ")";
  return {worst <= 1e-6, d.str()};
}

Outcome criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const SystemSpec sys = builtin("example-4.1", {{"n", "1"}, {"noise", "saturating"}, {"c", "8"}, {"C", "1"}});
  const UfCertificate cert = std::get<UfCertificate>(*sys.meta.certificate);
  VerificationGrid g;
  g.radii = {4, 6, 8, 10};
  const VerificationReport rep = verify_khasminskii(sys, cert, g);
  const ReportEntry& up = rep.at("khasminskii-psi");
  const ReportEntry& down = rep.at("khasminskii-lpsi");
  const double max_at_10 = down.shell_values.back();
  const double secs = elapsed(start);
  const bool ok = up.pass && down.pass && max_at_10 <= -500 && secs < 30;
  std::ostringstream d;
  d << "Psi trend " << (up.pass ? "pass" : "fail") << ", L Psi trend " << (down.pass ? "pass" : "fail")
    << ", max L Psi at R=10 = " << max_at_10 << " (required <= -500)";
  return {ok, d.str()};
}

Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  const SystemSpec sys = builtin("example-4.1", {{"n", "1"}, {"noise", "constant"}, {"sigma", "1"}});
  const UfCertificate cert = std::get<UfCertificate>(*sys.meta.certificate);
  const PathState z{Vecd::Constant(1, 1.0), Vecd::Zero(1), 0.0};
  const double exact = generator_psi<double>(sys, cert, z.x, z.y, 0.0);
  int inside = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const DynkinEstimate e = dynkin_estimate(sys, cert, z, 1e-3, 100000, 1000 + rep);
    inside += std::abs(e.estimate - exact) <= 3 * e.std_error;
  }
  const double secs = elapsed(start);
  return {inside >= 19 && secs < 60,
          fmt("%.0f of 20 repetitions within 3 SE of L Psi(z) = %.6g", inside, exact)};
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const SystemSpec sys = builtin("open-problem-v4");
  const double T = sys.period;
  SdeConfig cfg;
  cfg.h = T / 8192;
  cfg.scheme = Scheme::TamedEuler;
  cfg.ensemble_size = 8192;
  cfg.burn_in_periods = 30;
  cfg.seed = 2718;
  for (int k = 30; k <= 31; ++k) {
    for (int j = 0; j < 8; ++j) cfg.snapshot_times.push_back(k * T + j * T / 8);
  }
  const Ensemble e = ensemble_snapshots(sys, cfg, ProductNormal{Vecd::Zero(1), Vecd::Zero(1), 1.0, 1.0});
  const double sim_secs = elapsed(start);
  const EmpiricalLaw& a = e.snapshots[0];  // 30 T
  const EmpiricalLaw& b = e.snapshots[8];  // 31 T

  const Standardization st = pooled_standardization({&a.samples, &b.samples});
  PermutationOptions opt;
  opt.n_perm = 199;
  opt.seed = 31;
  const PermutationResult pr = permutation_test(standardize(a.samples, st), standardize(b.samples, st), opt);

  const std::vector<EmpiricalLaw> first(e.snapshots.begin(), e.snapshots.begin() + 8);
  const std::vector<EmpiricalLaw> second(e.snapshots.begin() + 8, e.snapshots.end());
  const ProfileTable prof = periodic_profile(first, second, T);
  const double secs = elapsed(start);
  const bool ok = pr.observed < 0.05 && pr.p > 0.05 && prof.within(3.0) && secs < 600;
  std::ostringstream d;
  d << "energy distance 30T vs 31T = " << pr.observed << ", p = " << pr.p << ", profile max |z| = "
    << prof.max_abs_z << " over " << prof.rows.size() << " times, rejected paths " << e.rejected
    << ", simulation " << fmt("%.0f", sim_secs) << " s";
  return {ok, d.str()};
}

Outcome criterion7() {
  bool ok = true;
  std::ostringstream d;
  for (int n : {1, 2}) {
    const Uf1Constants c = uf1_constants(MultiPoly::norm_power(n, 1), MultiPoly::norm_power(n, 2));
    ok &= std::abs(c.nu - 1) <= 1e-9 && c.m == 2 && c.a == 1 && std::abs(c.c_max - 2) <= 1e-9 &&
          std::abs(c.c_max_formula - 2) <= 1e-9;
    d << "n=" << n << ": nu=" << c.nu << " m=" << c.m << " c_max=" << c.c_max << "; ";
  }
  const Uf1Constants q = uf1_constants(MultiPoly::parse("((2), 1.0)"), MultiPoly::parse("((2), 1.0)"));
  ok &= std::abs(q.lambda - 1) <= 1e-9 && std::abs(q.c_max - 2) <= 1e-9 && std::abs(q.c_max_formula - 2) <= 1e-9;
  d << "V=F=x^2: lambda=" << q.lambda << " c_max=" << q.c_max;
  return {ok, d.str()};
}

Outcome criterion8() {
  std::mt19937_64 rng(88);
  std::normal_distribution<double> g;
  PermutationOptions opt;
  opt.n_perm = 199;
  int small = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::MatrixXd pooled(80, 2);
    for (Eigen::Index i = 0; i < pooled.size(); ++i) pooled.data()[i] = g(rng);
    opt.seed = 500 + static_cast<std::uint64_t>(rep);
    small += permutation_test(pooled.topRows(40), pooled.bottomRows(40), opt).p <= 0.05;
  }
  Eigen::MatrixXd A(60, 3);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  const double same = energy_distance(A, A.colwise().reverse());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(25, 2), Q = Eigen::MatrixXd::Zero(35, 2);
  Q.col(1).setConstant(1.5);
  const double masses = energy_distance(P, Q);
  const bool ok = small <= 20 && std::abs(same) <= 1e-12 && masses == 3.0;
  std::ostringstream d;
  d << small << " of 200 null p-values <= 0.05; identical multiset " << same << "; point masses 1.5 apart "
    << masses;
  return {ok, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion9() {
  const fs::path root = fs::temp_directory_path() / "stochper_acceptance_determinism";
  fs::remove_all(root);
  RunConfig cfg = parse_config(R"yaml(
system: {builtin: open-problem-v4}
sde:
  h: 0.02454369260617026
  scheme: tamed-euler
  periods: 3
  ensemble_size: 1000
  seed: 9
  initial: {normal: {std_x: 1.0, std_y: 1.0}}
)yaml");
  std::vector<std::vector<std::string>> runs;
  for (int threads : {1, 8, 1, 8}) {
    cfg.sde.threads = threads;
    cfg.out_dir = root / ("run" + std::to_string(runs.size()));
    std::ostringstream out, err;
    if (cmd_simulate(cfg, out, err) != 0) return {false, "simulate failed: " + err.str()};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cfg.out_dir)) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::string> text;
    for (const auto& f : files) text.push_back(slurp(f));
    runs.push_back(std::move(text));
  }
  bool same = !runs[0].empty();
  for (const auto& r : runs) same &= r == runs[0];
  fs::remove_all(root);
  return {same, std::to_string(runs[0].size()) + " CSVs per run, threads 1/8/1/8 " +
                    (same ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments select criteria by number; default runs all
  std::vector<bool> selected(10, argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id >= 1 && id <= 9) selected[static_cast<std::size_t>(id)] = true;
  }
  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9};
  int run = 0;
  for (int id = 1; id <= 9; ++id) {
    if (!selected[static_cast<std::size_t>(id)]) continue;
    report(id, criteria[id - 1]);
    ++run;
  }
  std::printf("%d of %d criteria failed\n", failures, run);
  return failures == 0 ? 0 : 1;
}
