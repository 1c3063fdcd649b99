#include "stochper/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stochper/error.hpp"
#include "stochper/parallel.hpp"
#include "stochper/rng.hpp"

namespace stochper {

std::string to_string(Statistic s) { return s == Statistic::Energy ? "energy" : "sliced-w1"; }

Statistic parse_statistic(const std::string& name) {
  if (name == "energy") return Statistic::Energy;
  if (name == "sliced-w1") return Statistic::SlicedW1;
  throw Error(ErrorKind::InvalidInput,
              "unknown statistic '" + name + "' (expected energy or sliced-w1)");
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::Index min_rows) {
  if (A.cols() != B.cols()) {
    throw Error(ErrorKind::Contract, "samples have different dimensions (" +
                                         std::to_string(A.cols()) + " vs " +
                                         std::to_string(B.cols()) + ")");
  }
  if (A.rows() < min_rows || B.rows() < min_rows) {
    throw Error(ErrorKind::Contract,
                "each sample needs at least " + std::to_string(min_rows) + " rows");
  }
}

/// Pooled rows, A first, in row-major order for contiguous row access.
RowMatrix pool(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  RowMatrix Z(A.rows() + B.rows(), A.cols());
  Z.topRows(A.rows()) = A;
  Z.bottomRows(B.rows()) = B;
  return Z;
}

inline double dist(const RowMatrix& Z, Eigen::Index i, Eigen::Index j) {
  const double* a = Z.data() + i * Z.cols();
  const double* b = Z.data() + j * Z.cols();
  double s = 0.0;
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Energy distance of a labelling of the pooled sample: slots [0, nA) are A,
/// [nA, N) are B, and slot s holds row perm[s]. Either exhaustive over all
/// pairs or over a fixed subsample of slot pairs.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const RowMatrix& Z, Eigen::Index nA, std::uint64_t seed, long max_pairs)
      : Z_(Z), nA_(nA), nB_(Z.rows() - nA) {
    subsampled_ = static_cast<double>(nA_) * static_cast<double>(nB_) > static_cast<double>(max_pairs);
    if (subsampled_) {
      pairs_ = max_pairs;
      NormalStream rng(seed, 0, StreamTag::Pairs);
      const auto draw = [&](Eigen::Index lo, Eigen::Index count) {
        return static_cast<std::uint32_t>(lo + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(count))));
      };
      ab_.reserve(2 * static_cast<std::size_t>(max_pairs));
      aa_.reserve(2 * static_cast<std::size_t>(max_pairs));
      bb_.reserve(2 * static_cast<std::size_t>(max_pairs));
      for (long p = 0; p < max_pairs; ++p) {
        ab_.push_back(draw(0, nA_));
        ab_.push_back(draw(nA_, nB_));
      }
      for (long p = 0; p < max_pairs; ++p) {
        aa_.push_back(draw(0, nA_));
        aa_.push_back(draw(0, nA_));
      }
      for (long p = 0; p < max_pairs; ++p) {
        bb_.push_back(draw(nA_, nB_));
        bb_.push_back(draw(nA_, nB_));
      }
    } else if (Z.rows() <= 2048) {
      const Eigen::Index N = Z.rows();
      D_.resize(N, N);
      for (Eigen::Index i = 0; i < N; ++i) {
        D_(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < N; ++j) D_(i, j) = D_(j, i) = dist(Z, i, j);
      }
    }
  }

  bool subsampled() const { return subsampled_; }
  long pairs() const { return pairs_; }

  double operator()(const std::vector<std::uint32_t>& perm) const {
    if (subsampled_) {
      const auto mean_over = [&](const std::vector<std::uint32_t>& pr) {
        double s = 0.0;
        for (std::size_t p = 0; p < pr.size(); p += 2) s += d(perm[pr[p]], perm[pr[p + 1]]);
        return s / static_cast<double>(pr.size() / 2);
      };
      return 2.0 * mean_over(ab_) - mean_over(aa_) - mean_over(bb_);
    }
    const Eigen::Index N = nA_ + nB_;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const auto pi = perm[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < N; ++j) {
        const double v = d(pi, perm[static_cast<std::size_t>(j)]);
        if (j < nA_) saa += v;
        else if (i >= nA_) sbb += v;
        else sab += v;
      }
    }
    const double a = static_cast<double>(nA_), b = static_cast<double>(nB_);
    return 2.0 * sab / (a * b) - 2.0 * saa / (a * a) - 2.0 * sbb / (b * b);
  }

 private:
  double d(std::uint32_t i, std::uint32_t j) const {
    return D_.size() ? D_(i, j) : dist(Z_, i, j);
  }

  const RowMatrix& Z_;
  Eigen::Index nA_, nB_;
  bool subsampled_ = false;
  long pairs_ = 0;
  std::vector<std::uint32_t> ab_, aa_, bb_;
  Eigen::MatrixXd D_;
};

std::vector<std::uint32_t> identity_perm(Eigen::Index N) {
  std::vector<std::uint32_t> p(static_cast<std::size_t>(N));
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

std::vector<std::uint32_t> shuffled(Eigen::Index N, std::uint64_t seed, std::uint64_t j) {
  auto p = identity_perm(N);
  NormalStream rng(seed, j, StreamTag::Resample);
  for (std::size_t i = p.size(); i > 1; --i) {
    std::swap(p[i - 1], p[static_cast<std::size_t>(rng.index(i))]);
  }
  return p;
}

Eigen::MatrixXd directions(Eigen::Index dim, int count, std::uint64_t seed) {
  Eigen::MatrixXd U(dim, count);
  for (int j = 0; j < count; ++j) {
    NormalStream rng(seed, static_cast<std::uint64_t>(j), StreamTag::Projection);
    Eigen::VectorXd v(dim);
    do {
      for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.next();
    } while (v.norm() == 0.0);
    U.col(j) = v.normalized();
  }
  return U;
}

/// W1 between two sorted samples.
double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double x = std::min(a.front(), b.front());
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
  }
  return total;
}

/// Sliced W1 of a labelling: projections P (N x count) of the pooled rows.
double sliced_from_projections(const Eigen::MatrixXd& P, Eigen::Index nA,
                               const std::vector<std::uint32_t>& perm) {
  const Eigen::Index N = P.rows();
  std::vector<double> a(static_cast<std::size_t>(nA)), b(static_cast<std::size_t>(N - nA));
  double total = 0.0;
  for (Eigen::Index c = 0; c < P.cols(); ++c) {
    for (Eigen::Index s = 0; s < N; ++s) {
      const double v = P(perm[static_cast<std::size_t>(s)], c);
      if (s < nA) a[static_cast<std::size_t>(s)] = v;
      else b[static_cast<std::size_t>(s - nA)] = v;
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    total += w1_sorted(a, b);
  }
  return total / static_cast<double>(P.cols());
}

}  // namespace

EnergyResult energy_distance_detail(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    std::uint64_t seed, long max_pairs) {
  check_pair(A, B, 1);
  if (max_pairs < 1) throw Error(ErrorKind::InvalidInput, "max_pairs must be positive");
  const RowMatrix Z = pool(A, B);
  const EnergyEvaluator eval(Z, A.rows(), seed, max_pairs);
  EnergyResult r;
  r.value = eval(identity_perm(Z.rows()));
  r.subsampled = eval.subsampled();
  r.pairs = eval.pairs();
  return r;
}

double energy_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::uint64_t seed,
                       long max_pairs) {
  return energy_distance_detail(A, B, seed, max_pairs).value;
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyInput, "W1 needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return w1_sorted(a, b);
}

double sliced_w1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int n_projections,
                 std::uint64_t seed) {
  check_pair(A, B, 1);
  if (n_projections < 16) throw Error(ErrorKind::InvalidInput, "n_projections must be >= 16");
  const Eigen::MatrixXd U = directions(A.cols(), n_projections, seed);
  Eigen::MatrixXd Z(A.rows() + B.rows(), A.cols());
  Z << A, B;
  const Eigen::MatrixXd P = Z * U;
  return sliced_from_projections(P, A.rows(), identity_perm(Z.rows()));
}

PermutationResult permutation_test(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const PermutationOptions& opt) {
  check_pair(A, B, 1);
  if (opt.n_perm < 100) throw Error(ErrorKind::InvalidInput, "n_perm must be >= 100");
  PermutationResult res;
  res.n_perm = opt.n_perm;
  const RowMatrix Z = pool(A, B);
  const Eigen::Index N = Z.rows();
  bool all_same = true;
  for (Eigen::Index i = 1; i < N && all_same; ++i) all_same = (Z.row(i) == Z.row(0));
  if (all_same) {
    res.degenerate = true;
    res.p = 1.0;
    return res;
  }

  std::function<double(const std::vector<std::uint32_t>&)> stat;
  std::optional<EnergyEvaluator> energy;
  Eigen::MatrixXd P;
  if (opt.statistic == Statistic::Energy) {
    energy.emplace(Z, A.rows(), opt.seed, opt.max_pairs);
    stat = [&](const std::vector<std::uint32_t>& p) { return (*energy)(p); };
  } else {
    if (opt.n_projections < 16) throw Error(ErrorKind::InvalidInput, "n_projections must be >= 16");
    P = Eigen::MatrixXd(Z) * directions(Z.cols(), opt.n_projections, opt.seed);
    stat = [&](const std::vector<std::uint32_t>& p) {
      return sliced_from_projections(P, A.rows(), p);
    };
  }
  res.observed = stat(identity_perm(N));
  std::vector<double> perm_values(static_cast<std::size_t>(opt.n_perm));
  parallel_for(opt.n_perm, opt.threads, [&](long j) {
    perm_values[static_cast<std::size_t>(j)] =
        stat(shuffled(N, opt.seed, static_cast<std::uint64_t>(j)));
  });
  const double tol = 1e-12 * (1.0 + std::abs(res.observed));
  const auto hits = std::count_if(perm_values.begin(), perm_values.end(),
                                  [&](double v) { return v >= res.observed - tol; });
  res.p = (1.0 + static_cast<double>(hits)) / (opt.n_perm + 1.0);
  return res;
}

Standardization pooled_standardization(const std::vector<const Eigen::MatrixXd*>& samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no samples to standardize");
  const Eigen::Index d = samples.front()->cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  double count = 0.0;
  for (const auto* s : samples) {
    if (s->cols() != d) throw Error(ErrorKind::Contract, "samples have different dimensions");
    sum += s->colwise().sum().transpose();
    count += static_cast<double>(s->rows());
  }
  if (count < 2.0) throw Error(ErrorKind::EmptyInput, "need at least two rows to standardize");
  Standardization st;
  st.mean = sum / count;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
  for (const auto* s : samples) {
    ss += (s->rowwise() - st.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  st.std = (ss / (count - 1.0)).cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(st.std(i) > 0.0)) st.std(i) = 1.0;
  }
  return st;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, const Standardization& s) {
  return ((X.rowwise() - s.mean.transpose()).array().rowwise() / s.std.transpose().array()).matrix();
}

double kendall_increase_p(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2) return 1.0;
  long S = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) S += (v[j] > v[i]) - (v[j] < v[i]);
  }
  const long M = static_cast<long>(n) * (n - 1) / 2;
  if (n <= 50) {
    // inversion-count distribution of a random permutation; S = M - 2 inv
    std::vector<double> dist{1.0};
    for (int k = 2; k <= n; ++k) {
      std::vector<double> next(dist.size() + static_cast<std::size_t>(k - 1), 0.0);
      for (std::size_t i = 0; i < dist.size(); ++i) {
        for (int add = 0; add < k; ++add) next[i + static_cast<std::size_t>(add)] += dist[i] / k;
      }
      dist = std::move(next);
    }
    const long max_inv = (M - S) / 2;  // S >= s  <=>  inv <= (M - s) / 2
    double p = 0.0;
    for (long i = 0; i <= max_inv && i < static_cast<long>(dist.size()); ++i) p += dist[static_cast<std::size_t>(i)];
    return std::min(1.0, p);
  }
  const double var = n * (n - 1.0) * (2.0 * n + 5.0) / 18.0;
  const double z = (static_cast<double>(S) - 1.0) / std::sqrt(var);  // continuity correction
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

ProfileTable periodic_profile(const std::vector<EmpiricalLaw>& first,
                              const std::vector<EmpiricalLaw>& second, double period) {
  if (first.empty() || first.size() != second.size()) {
    throw Error(ErrorKind::Contract, "profile needs matched, nonempty time grids");
  }
  ProfileTable table;
  for (std::size_t j = 0; j < first.size(); ++j) {
    const auto& A = first[j];
    const auto& B = second[j];
    if (std::abs(B.t - A.t - period) > 1e-9 * std::max(1.0, std::abs(B.t))) {
      throw Error(ErrorKind::Contract, "profile times are not one period apart",
                  {A.t, B.t, period});
    }
    if (A.samples.cols() != B.samples.cols() || A.samples.rows() < 2 || B.samples.rows() < 2) {
      throw Error(ErrorKind::Contract, "profile samples have mismatched shapes");
    }
    ProfileRow row;
    row.s = A.t - std::floor(A.t / period + 1e-12) * period;
    const auto stats = [](const Eigen::MatrixXd& X, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
      mean = X.colwise().mean().transpose();
      const Eigen::MatrixXd c = X.rowwise() - mean.transpose();
      cov = (c.transpose() * c) / static_cast<double>(X.rows() - 1);
    };
    stats(A.samples, row.mean_first, row.cov_first);
    stats(B.samples, row.mean_second, row.cov_second);
    row.diff = row.mean_second - row.mean_first;
    row.std_error = (row.cov_first.diagonal() / static_cast<double>(A.samples.rows()) +
                     row.cov_second.diagonal() / static_cast<double>(B.samples.rows()))
                        .cwiseSqrt();
    for (Eigen::Index i = 0; i < row.diff.size(); ++i) {
      const double z = row.std_error(i) > 0.0 ? std::abs(row.diff(i)) / row.std_error(i)
                                              : (row.diff(i) == 0.0 ? 0.0 : INFINITY);
      row.max_abs_z = std::max(row.max_abs_z, z);
    }
    table.max_abs_z = std::max(table.max_abs_z, row.max_abs_z);
    table.rows.push_back(std::move(row));
  }
  return table;
}

PeriodicityReport periodicity_report(const std::vector<EmpiricalLaw>& snapshots,
                                     const PeriodicityOptions& opt) {
  if (snapshots.size() < 3) {
    throw Error(ErrorKind::Contract, "periodicity needs at least three snapshots, got " +
                                         std::to_string(snapshots.size()));
  }
  PeriodicityReport rep;
  rep.threshold = opt.epsilon;
  rep.statistic = opt.test.statistic;
  std::vector<const Eigen::MatrixXd*> all;
  for (const auto& s : snapshots) all.push_back(&s.samples);
  rep.standardization = pooled_standardization(all);
  if (!opt.standardize) {
    rep.standardization.mean.setZero();
    rep.standardization.std.setOnes();
  }
  std::vector<Eigen::MatrixXd> z;
  for (const auto& s : snapshots) z.push_back(standardize(s.samples, rep.standardization));

  const auto raw_stat = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    return opt.test.statistic == Statistic::Energy
               ? energy_distance(A, B, opt.test.seed, opt.test.max_pairs)
               : sliced_w1(A, B, opt.test.n_projections, opt.test.seed);
  };
  for (std::size_t i = 0; i + 1 < snapshots.size(); ++i) {
    PeriodicityReport::Item item;
    item.k = opt.period ? static_cast<int>(std::lround(snapshots[i].t / *opt.period))
                        : static_cast<int>(i);
    item.t = snapshots[i].t;
    const PermutationResult pr = permutation_test(z[i], z[i + 1], opt.test);
    item.value = pr.observed;
    item.p = pr.p;
    item.raw = opt.standardize ? raw_stat(snapshots[i].samples, snapshots[i + 1].samples) : pr.observed;
    rep.distances.push_back(item);
  }

  const std::size_t D = rep.distances.size();
  const std::size_t tail = std::min(D, std::max<std::size_t>(3, (D + 2) / 3));
  std::vector<double> last;
  for (std::size_t i = D - tail; i < D; ++i) last.push_back(rep.distances[i].value);
  rep.trend_p = kendall_increase_p(last);
  const auto& final_item = rep.distances.back();
  rep.consistent = final_item.value < opt.epsilon && final_item.p > opt.alpha && rep.trend_p > opt.alpha;
  rep.verdict = rep.consistent ? "consistent-with-periodic" : "not-periodic";
  return rep;
}

}  // namespace stochper
