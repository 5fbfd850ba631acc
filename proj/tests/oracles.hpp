#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerics.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Sort-based median, textbook definition.
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat gauss_jordan_inverse(Mat a) {
  const auto n = a.rows();
  Mat inv = Mat::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

// Chi-squared quantile by bisection on Boost's regularized gamma.
inline double chi2_quantile(int dof, double prob) {
  double lo = 0.0, hi = 1.0;
  while (boost::math::gamma_p(0.5 * dof, 0.5 * hi) < prob) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (boost::math::gamma_p(0.5 * dof, 0.5 * mid) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Brute-force medoid: first row with the smallest summed L1 distance.
inline Vec medoid(const Mat& x) {
  Eigen::Index best = 0;
  double best_sum = INFINITY;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.rows(); ++j) s += (x.row(i) - x.row(j)).cwiseAbs().sum();
    if (i == 0 || s < best_sum - 1e-12 * best_sum) {
      best_sum = s;
      best = i;
    }
  }
  return x.row(best).transpose();
}

// Argmin of f over an evenly spaced grid of `points` values in [0, 1].
template <class F>
double grid_argmin(F f, int points = 10000) {
  double best = 0.0, best_v = INFINITY;
  for (int k = 0; k < points; ++k) {
    const double e = static_cast<double>(k) / (points - 1);
    const double v = f(e);
    if (v < best_v) {
      best_v = v;
      best = e;
    }
  }
  return best;
}

inline Mat random_normal(std::mt19937_64& g, int n, int p) {
  std::normal_distribution<double> z;
  Mat m(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = z(g);
  return m;
}

}  // namespace oracle
