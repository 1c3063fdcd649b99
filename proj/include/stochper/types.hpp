#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace stochper {

/// Largest supported configuration dimension n (and Wiener dimension k).
/// Vectors and matrices are dynamically sized but stored inline up to this
/// capacity, so the hot simulation loop never touches the heap.
inline constexpr int kMaxDim = 8;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Phase-space vector (x, y) of length 2n.
template <class S>
using PhaseVec = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

/// 113-bit mantissa float used for cross-checks that suffer catastrophic
/// cancellation in double (e.g. exponential friction functions).
using Quad = boost::multiprecision::cpp_bin_float_quad;

using Vecd = Vec<double>;
using Matd = Mat<double>;

template <class S>
inline bool is_finite(const S& v) {
  using std::isfinite;
  using boost::multiprecision::isfinite;
  return isfinite(v);
}

template <class Derived>
inline bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!is_finite(m(i, j))) return false;
    }
  }
  return true;
}

template <class To, class From>
inline To to_scalar(const From& v) {
  return static_cast<To>(v);
}

}  // namespace stochper
