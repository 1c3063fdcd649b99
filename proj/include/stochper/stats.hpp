#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochper/sde.hpp"

namespace stochper {

enum class Statistic { Energy, SlicedW1 };

std::string to_string(Statistic s);
/// Accepts "energy" and "sliced-w1".
Statistic parse_statistic(const std::string& name);

struct EnergyResult {
  double value = 0.0;
  bool subsampled = false;
  long pairs = 0;  // pairs per term when subsampled
};

/// Default pair budget above which energy_distance subsamples.
inline constexpr long kEnergyPairBudget = 10'000'000;

/// V-statistic energy distance
///   2/(nA nB) sum |a_i - b_j| - 1/nA^2 sum |a_i - a_i'| - 1/nB^2 sum |b_j - b_j'|.
/// When nA nB exceeds `max_pairs`, each of the three sums is replaced by a
/// mean over `max_pairs` index pairs drawn with the given seed.
EnergyResult energy_distance_detail(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    std::uint64_t seed = 0, long max_pairs = kEnergyPairBudget);

double energy_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::uint64_t seed = 0,
                       long max_pairs = kEnergyPairBudget);

/// 1-D Wasserstein-1 distance, the integral of |F_A - F_B|.
double wasserstein1_1d(std::vector<double> a, std::vector<double> b);

/// Mean 1-D W1 over seeded random unit directions.
double sliced_w1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int n_projections,
                 std::uint64_t seed);

struct PermutationResult {
  double p = 1.0;
  double observed = 0.0;
  bool degenerate = false;
  int n_perm = 0;
};

struct PermutationOptions {
  Statistic statistic = Statistic::Energy;
  int n_perm = 199;
  std::uint64_t seed = 0;
  int n_projections = 64;  // sliced W1 only
  long max_pairs = kEnergyPairBudget;  // energy only
  int threads = 1;
};

/// p = (1 + #{permuted >= observed}) / (n_perm + 1); permutation j is a
/// Fisher-Yates shuffle drawn from substream (seed, j).
PermutationResult permutation_test(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const PermutationOptions& opt);

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // zero spreads are replaced by 1
};

/// Per-coordinate mean and standard deviation of all rows pooled.
Standardization pooled_standardization(const std::vector<const Eigen::MatrixXd*>& samples);
Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, const Standardization& s);

/// One-sided p-value of Kendall's S against an increasing trend in the
/// sequence order (exact for up to 50 values, normal approximation beyond).
double kendall_increase_p(const std::vector<double>& v);

struct ProfileRow {
  double s = 0.0;  // within-period time
  Eigen::VectorXd mean_first, mean_second, diff, std_error;
  Eigen::MatrixXd cov_first, cov_second;
  double max_abs_z = 0.0;
};

struct ProfileTable {
  std::vector<ProfileRow> rows;
  double max_abs_z = 0.0;
  bool within(double z) const { return max_abs_z <= z; }
};

/// Means and covariances at matched within-period times of two consecutive
/// periods; second[j].t must equal first[j].t + period. Throws Contract on
/// mismatched grids.
ProfileTable periodic_profile(const std::vector<EmpiricalLaw>& first,
                              const std::vector<EmpiricalLaw>& second, double period);

struct PeriodicityOptions {
  PermutationOptions test;
  double epsilon = 0.05;
  double alpha = 0.05;
  bool standardize = true;
  /// When set, item k is t / period rounded; otherwise the snapshot index.
  std::optional<double> period;
};

struct PeriodicityReport {
  struct Item {
    int k = 0;
    double t = 0.0;
    double value = 0.0;  // on standardized samples when standardization is on
    double raw = 0.0;
    double p = 1.0;
  };
  std::vector<Item> distances;
  bool consistent = false;
  std::string verdict;
  double trend_p = 1.0;
  double threshold = 0.0;
  Statistic statistic = Statistic::Energy;
  Standardization standardization;
  std::optional<ProfileTable> profile;
};

/// Consecutive-snapshot distances with permutation p-values. The verdict is
/// consistent-with-periodic iff the last distance is below epsilon, its
/// p-value exceeds alpha, and the final third of the distance sequence shows
/// no significant increasing trend. Throws Contract for fewer than three
/// snapshots.
PeriodicityReport periodicity_report(const std::vector<EmpiricalLaw>& snapshots,
                                     const PeriodicityOptions& opt);

}  // namespace stochper
