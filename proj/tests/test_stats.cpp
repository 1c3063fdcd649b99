#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stochper/model.hpp"
#include "stochper/sde.hpp"
#include "stochper/stats.hpp"

using namespace stochper;
using Eigen::MatrixXd;

namespace {

constexpr double kPi = 3.14159265358979323846;

MatrixXd normals(std::mt19937_64& rng, int rows, int cols, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> g(mean, sd);
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = g(rng);
  }
  return M;
}

// Direct triple loop of the V-statistic.
double energy_oracle(const MatrixXd& A, const MatrixXd& B) {
  const auto mean_dist = [](const MatrixXd& X, const MatrixXd& Y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < Y.rows(); ++j) s += (X.row(i) - Y.row(j)).norm();
    }
    return s / static_cast<double>(X.rows() * Y.rows());
  };
  return 2 * mean_dist(A, B) - mean_dist(A, A) - mean_dist(B, B);
}

// Integral of |F_A - F_B| with each empirical CDF evaluated by counting.
double w1_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> knots(a);
  knots.insert(knots.end(), b.begin(), b.end());
  std::sort(knots.begin(), knots.end());
  const auto cdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += std::abs(cdf(a, knots[i]) - cdf(b, knots[i])) * (knots[i + 1] - knots[i]);
  }
  return total;
}

EmpiricalLaw law(double t, MatrixXd samples) {
  EmpiricalLaw L;
  L.t = t;
  L.samples = std::move(samples);
  return L;
}

PeriodicityOptions fast_options() {
  PeriodicityOptions o;
  o.test.n_perm = 199;
  o.test.seed = 3;
  return o;
}

}  // namespace

TEST(EnergyDistance, IdenticalMultisetIsZero) {
  std::mt19937_64 rng(1);
  const MatrixXd A = normals(rng, 50, 3);
  const MatrixXd B = A.colwise().reverse();  // same rows, other order
  EXPECT_NEAR(energy_distance(A, A), 0.0, 1e-12);
  EXPECT_NEAR(energy_distance(A, B), 0.0, 1e-12);
}

TEST(EnergyDistance, PointMassesAtUnitDistance) {
  const MatrixXd A = MatrixXd::Zero(30, 2);
  MatrixXd B = MatrixXd::Zero(40, 2);
  B.col(0).setOnes();
  EXPECT_EQ(energy_distance(A, B), 2.0);
}

TEST(EnergyDistance, MatchesDirectSum) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    const MatrixXd A = normals(rng, 37 + rep, 2), B = normals(rng, 23, 2, 0.5, 2.0);
    EXPECT_NEAR(energy_distance(A, B), energy_oracle(A, B), 1e-12);
  }
}

TEST(EnergyDistance, NullNormalsAreSmall) {
  std::mt19937_64 rng(3);
  const MatrixXd A = normals(rng, 4096, 2), B = normals(rng, 4096, 2);
  const double v = energy_distance(A, B);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 0.05);
}

TEST(EnergyDistance, DimensionMismatchIsContract) {
  try {
    energy_distance(MatrixXd::Zero(4, 2), MatrixXd::Zero(4, 3));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Contract);
  }
}

TEST(EnergyDistance, SubsampleWithinThreeStandardErrors) {
  std::mt19937_64 rng(4);
  const MatrixXd A = normals(rng, 300, 2), B = normals(rng, 300, 2, 0.3);
  const double exact = energy_distance(A, B);
  // variance of one pair draw per term, pairs drawn uniformly with replacement
  const auto pair_var = [](const MatrixXd& X, const MatrixXd& Y) {
    double s = 0, s2 = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < Y.rows(); ++j) {
        const double d = (X.row(i) - Y.row(j)).norm();
        s += d;
        s2 += d * d;
      }
    }
    const double n = static_cast<double>(X.rows() * Y.rows());
    return s2 / n - (s / n) * (s / n);
  };
  const long pairs = 5000;
  const double se = std::sqrt((4 * pair_var(A, B) + pair_var(A, A) + pair_var(B, B)) / pairs);
  int outside = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EnergyResult r = energy_distance_detail(A, B, seed, pairs);
    EXPECT_TRUE(r.subsampled);
    EXPECT_EQ(r.pairs, pairs);
    outside += std::abs(r.value - exact) > 3 * se;
  }
  EXPECT_LE(outside, 1);
  EXPECT_FALSE(energy_distance_detail(A, B).subsampled);
}

TEST(Wasserstein1, UnequalSizesAgainstCdfIntegral) {
  EXPECT_NEAR(wasserstein1_1d({0, 1}, {0, 0.5, 1}), 1.0 / 6, 1e-15);
  EXPECT_EQ(wasserstein1_1d({0}, {1}), 1.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> a(17 + rep), b(29);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = 0.4 + 1.5 * g(rng);
    EXPECT_NEAR(wasserstein1_1d(a, b), w1_oracle(a, b), 1e-12);
  }
  EXPECT_THROW(wasserstein1_1d({}, {1.0}), Error);
}

TEST(SlicedW1, IdenticalIsZeroAndDiracsAreOne) {
  std::mt19937_64 rng(6);
  const MatrixXd A = normals(rng, 40, 3);
  EXPECT_NEAR(sliced_w1(A, A, 32, 1), 0.0, 1e-12);
  EXPECT_NEAR(sliced_w1(MatrixXd::Zero(5, 1), MatrixXd::Ones(7, 1), 16, 2), 1.0, 1e-15);
}

TEST(SlicedW1, ShiftedSampleGivesMeanAbsCosine) {
  std::mt19937_64 rng(7);
  const MatrixXd A = normals(rng, 500, 2);
  MatrixXd B = A;
  B.col(0).array() += 1.0;
  EXPECT_NEAR(sliced_w1(A, B, 4000, 9), 2.0 / kPi, 0.02);
}

TEST(SlicedW1, TooFewProjections) {
  try {
    sliced_w1(MatrixXd::Zero(3, 2), MatrixXd::Ones(3, 2), 15, 0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Distances, SymmetricAndNonnegative) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd A = normals(rng, 30 + rep, 2), B = normals(rng, 25, 2, 0.2 * rep);
    const double e1 = energy_distance(A, B), e2 = energy_distance(B, A);
    EXPECT_NEAR(e1, e2, 1e-12);
    EXPECT_GE(e1, -1e-12);
    const double s1 = sliced_w1(A, B, 32, rep), s2 = sliced_w1(B, A, 32, rep);
    EXPECT_NEAR(s1, s2, 1e-12);
    EXPECT_GE(s1, 0.0);
  }
}

TEST(PermutationTest, IdenticalSamplesGivePOne) {
  std::mt19937_64 rng(9);
  const MatrixXd A = normals(rng, 40, 2);
  PermutationOptions o;
  o.n_perm = 199;
  for (Statistic s : {Statistic::Energy, Statistic::SlicedW1}) {
    o.statistic = s;
    const PermutationResult r = permutation_test(A, A, o);
    EXPECT_EQ(r.p, 1.0);
    EXPECT_NEAR(r.observed, 0.0, 1e-12);
    EXPECT_FALSE(r.degenerate);
  }
}

TEST(PermutationTest, DegeneratePooledSample) {
  PermutationOptions o;
  const PermutationResult r = permutation_test(MatrixXd::Ones(10, 2), MatrixXd::Ones(12, 2), o);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.p, 1.0);
}

TEST(PermutationTest, SeparatedClusters) {
  std::mt19937_64 rng(10);
  const MatrixXd A = normals(rng, 100, 2, 0.0, 0.1);
  MatrixXd B = normals(rng, 100, 2, 0.0, 0.1);
  B.col(0).array() += 10.0;
  PermutationOptions o;
  o.n_perm = 199;
  for (Statistic s : {Statistic::Energy, Statistic::SlicedW1}) {
    o.statistic = s;
    EXPECT_LE(permutation_test(A, B, o).p, 0.01);
  }
}

TEST(PermutationTest, SeedStability) {
  std::mt19937_64 rng(11);
  const MatrixXd A = normals(rng, 60, 2), B = normals(rng, 60, 2, 0.25);
  PermutationOptions o;
  o.n_perm = 999;
  o.seed = 1;
  const double p1 = permutation_test(A, B, o).p;
  o.seed = 2;
  const double p2 = permutation_test(A, B, o).p;
  EXPECT_LE(std::abs(p1 - p2), 2.0 / std::sqrt(999.0));
}

TEST(PermutationTest, ThreadCountDoesNotChangeP) {
  std::mt19937_64 rng(12);
  const MatrixXd A = normals(rng, 50, 2), B = normals(rng, 50, 2, 0.3);
  PermutationOptions o;
  o.n_perm = 299;
  const PermutationResult r1 = permutation_test(A, B, o);
  o.threads = 4;
  const PermutationResult r4 = permutation_test(A, B, o);
  EXPECT_EQ(r1.p, r4.p);
  EXPECT_EQ(r1.observed, r4.observed);
}

TEST(PermutationTest, PValueFormulaAndBounds) {
  std::mt19937_64 rng(13);
  const MatrixXd A = normals(rng, 20, 1), B = normals(rng, 20, 1);
  PermutationOptions o;
  o.n_perm = 100;
  const PermutationResult r = permutation_test(A, B, o);
  const double hits = r.p * 101.0 - 1.0;
  EXPECT_NEAR(hits, std::round(hits), 1e-9);
  EXPECT_GE(r.p, 1.0 / 101);
  EXPECT_LE(r.p, 1.0);
  o.n_perm = 99;
  EXPECT_THROW(permutation_test(A, B, o), Error);
}

TEST(PermutationTest, SuperUniformUnderNull) {
  std::mt19937_64 rng(14);
  PermutationOptions o;
  o.n_perm = 199;
  int rejections = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const MatrixXd pooled = normals(rng, 60, 2);
    o.seed = static_cast<std::uint64_t>(rep);
    rejections += permutation_test(pooled.topRows(30), pooled.bottomRows(30), o).p <= 0.05;
  }
  EXPECT_LE(rejections, 20);
}

TEST(KendallTrend, ExactSmallSamples) {
  EXPECT_NEAR(kendall_increase_p({1, 2, 3}), 1.0 / 6, 1e-15);
  EXPECT_NEAR(kendall_increase_p({3, 2, 1}), 1.0, 1e-15);
  EXPECT_NEAR(kendall_increase_p({1, 2, 3, 4, 5}), 1.0 / 120, 1e-15);
  EXPECT_EQ(kendall_increase_p({1.0}), 1.0);
  // S = 1 for three values has probability 1/2 of S >= 1
  EXPECT_NEAR(kendall_increase_p({1, 3, 2}), 0.5, 1e-15);
}

TEST(KendallTrend, ExactAgreesWithEnumeration) {
  // brute force over all permutations of 6 ranks
  std::vector<int> perm = {0, 1, 2, 3, 4, 5};
  const std::vector<double> obs = {0.3, 0.1, 0.5, 0.4, 0.9, 0.7};
  const auto S = [](const auto& v) {
    long s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) s += (v[j] > v[i]) - (v[j] < v[i]);
    }
    return s;
  };
  const long s_obs = S(obs);
  int ge = 0, total = 0;
  do {
    ge += S(perm) >= s_obs;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_NEAR(kendall_increase_p(obs), static_cast<double>(ge) / total, 1e-12);
}

TEST(KendallTrend, LongSequences) {
  std::vector<double> up(80), down(80);
  for (int i = 0; i < 80; ++i) {
    up[i] = i;
    down[i] = -i;
  }
  EXPECT_LT(kendall_increase_p(up), 1e-10);
  EXPECT_GT(kendall_increase_p(down), 0.999);
}

TEST(Standardization, PooledMomentsAndZeroSpread) {
  MatrixXd A(2, 2), B(2, 2);
  A << 0, 5, 2, 5;
  B << 4, 5, 6, 5;
  const Standardization s = pooled_standardization({&A, &B});
  EXPECT_DOUBLE_EQ(s.mean(0), 3.0);
  EXPECT_DOUBLE_EQ(s.mean(1), 5.0);
  EXPECT_DOUBLE_EQ(s.std(0), std::sqrt(20.0 / 3));
  EXPECT_EQ(s.std(1), 1.0);
  const MatrixXd Z = standardize(A, s);
  EXPECT_DOUBLE_EQ(Z(0, 0), -3.0 / std::sqrt(20.0 / 3));
  EXPECT_EQ(Z(0, 1), 0.0);
}

TEST(PeriodicityReport, StationarySequenceIsConsistent) {
  std::mt19937_64 rng(15);
  std::vector<EmpiricalLaw> snaps;
  for (int k = 0; k < 8; ++k) snaps.push_back(law(2 * kPi * k, normals(rng, 400, 2)));
  PeriodicityOptions o = fast_options();
  o.period = 2 * kPi;
  const PeriodicityReport r = periodicity_report(snaps, o);
  ASSERT_EQ(r.distances.size(), 7u);
  EXPECT_EQ(r.distances[3].k, 3);
  EXPECT_TRUE(r.consistent);
  EXPECT_EQ(r.verdict, "consistent-with-periodic");
  for (const auto& d : r.distances) {
    EXPECT_GE(d.value, -1e-12);
    EXPECT_GE(d.p, 0.0);
    EXPECT_LE(d.p, 1.0);
  }
}

TEST(PeriodicityReport, DriftingMeanFails) {
  std::mt19937_64 rng(16);
  std::vector<EmpiricalLaw> snaps;
  for (int k = 0; k < 6; ++k) snaps.push_back(law(k, normals(rng, 200, 2, 1.0 * k, 0.1)));
  const PeriodicityReport r = periodicity_report(snaps, fast_options());
  EXPECT_FALSE(r.consistent);
  EXPECT_EQ(r.verdict, "not-periodic");
  EXPECT_LE(r.distances.back().p, 0.01);
  // equal steps in mean give equal raw distances up to sampling noise
  for (const auto& d : r.distances) EXPECT_NEAR(d.raw, r.distances.front().raw, 0.1);
}

TEST(PeriodicityReport, GrowingGapsShowTrend) {
  std::mt19937_64 rng(17);
  std::vector<EmpiricalLaw> snaps;
  double mean = 0.0;
  // 19 distances: the final third has 7 values, enough for the trend test
  for (int k = 0; k < 20; ++k) {
    mean += 0.1 * k;
    snaps.push_back(law(k, normals(rng, 200, 1, mean, 0.2)));
  }
  const PeriodicityReport r = periodicity_report(snaps, fast_options());
  for (std::size_t i = 1; i < r.distances.size(); ++i) {
    EXPECT_GT(r.distances[i].raw, r.distances[i - 1].raw);
  }
  EXPECT_LE(r.trend_p, 0.05);
  EXPECT_FALSE(r.consistent);
}

TEST(PeriodicityReport, StandardizationIsScaleFree) {
  std::mt19937_64 rng(18);
  std::vector<EmpiricalLaw> a, b;
  for (int k = 0; k < 4; ++k) {
    const MatrixXd X = normals(rng, 100, 2, 0.1 * k);
    a.push_back(law(k, X));
    b.push_back(law(k, 1000.0 * X));
  }
  const PeriodicityReport ra = periodicity_report(a, fast_options());
  const PeriodicityReport rb = periodicity_report(b, fast_options());
  for (std::size_t i = 0; i < ra.distances.size(); ++i) {
    EXPECT_NEAR(ra.distances[i].value, rb.distances[i].value, 1e-9);
    EXPECT_NEAR(rb.distances[i].raw, 1000.0 * ra.distances[i].raw, 1e-6 * rb.distances[i].raw);
  }
}

TEST(PeriodicityReport, FewerThanThreeSnapshots) {
  std::vector<EmpiricalLaw> snaps = {law(0, MatrixXd::Zero(3, 1)), law(1, MatrixXd::Ones(3, 1))};
  try {
    periodicity_report(snaps, fast_options());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Contract);
  }
}

TEST(PeriodicProfile, StationaryWithinThreeStandardErrors) {
  std::mt19937_64 rng(19);
  const double T = 2 * kPi;
  std::vector<EmpiricalLaw> first, second;
  for (int j = 0; j < 8; ++j) {
    first.push_back(law(30 * T + j * T / 8, normals(rng, 2000, 2)));
    second.push_back(law(31 * T + j * T / 8, normals(rng, 2000, 2)));
  }
  const ProfileTable p = periodic_profile(first, second, T);
  ASSERT_EQ(p.rows.size(), 8u);
  EXPECT_NEAR(p.rows[2].s, 2 * T / 8, 1e-9);
  EXPECT_TRUE(p.within(4.0));  // 32 entries, each two-sided
  for (const auto& row : p.rows) {
    EXPECT_NEAR(row.cov_first(0, 0), 1.0, 0.1);
    EXPECT_NEAR(row.std_error(0), std::sqrt(2.0 / 2000), 0.005);
  }
}

TEST(PeriodicProfile, DriftFlagged) {
  std::mt19937_64 rng(20);
  std::vector<EmpiricalLaw> first, second;
  for (int j = 0; j < 4; ++j) {
    first.push_back(law(j * 0.25, normals(rng, 500, 1)));
    second.push_back(law(1 + j * 0.25, normals(rng, 500, 1, 0.5)));
  }
  const ProfileTable p = periodic_profile(first, second, 1.0);
  EXPECT_FALSE(p.within(3.0));
  for (const auto& row : p.rows) EXPECT_GT(row.max_abs_z, 3.0);
}

TEST(PeriodicProfile, MismatchedGrids) {
  const std::vector<EmpiricalLaw> a = {law(0.0, MatrixXd::Zero(3, 1)), law(0.5, MatrixXd::Zero(3, 1))};
  const std::vector<EmpiricalLaw> b = {law(1.0, MatrixXd::Zero(3, 1)), law(1.6, MatrixXd::Zero(3, 1))};
  const std::vector<EmpiricalLaw> c = {law(1.0, MatrixXd::Zero(3, 1))};
  for (const auto* other : {&b, &c}) {
    try {
      periodic_profile(a, *other, 1.0);
      FAIL() << "expected an error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Contract);
    }
  }
}

TEST(PeriodicProfile, NoiselessForcedVanDerPolConverges) {
  const SystemSpec sys = builtin("van-der-pol", {{"noise", "zero"}, {"forcing", "5"}});
  const double T = sys.period;
  SdeConfig cfg;
  cfg.h = T / 512;
  cfg.scheme = Scheme::EulerMaruyama;
  cfg.ensemble_size = 32;
  cfg.seed = 21;
  for (int j = 0; j < 8; ++j) cfg.snapshot_times.push_back(60 * T + j * T / 8);
  for (int j = 0; j < 8; ++j) cfg.snapshot_times.push_back(61 * T + j * T / 8);
  ProductNormal init{Vecd::Zero(1), Vecd::Zero(1), 1.0, 1.0};
  const Ensemble e = ensemble_snapshots(sys, cfg, init);
  ASSERT_EQ(e.snapshots.size(), 16u);
  const std::vector<EmpiricalLaw> first(e.snapshots.begin(), e.snapshots.begin() + 8);
  const std::vector<EmpiricalLaw> second(e.snapshots.begin() + 8, e.snapshots.end());
  const ProfileTable p = periodic_profile(first, second, T);
  for (const auto& row : p.rows) {
    EXPECT_LT(row.diff.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(row.cov_first.cwiseAbs().maxCoeff(), 1e-8);
  }
}
