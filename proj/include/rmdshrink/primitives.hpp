#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rmdshrink/common.hpp"
#include "rmdshrink/special.hpp"

namespace rmd {

/// Rescales MAD^2 (and comedian entries) to variances under normality.
inline constexpr double kComedianAdjustment = 2.198;

/// Univariate median. Even-length samples average the two central order statistics.
inline double median(std::span<const double> values) {
  detail::require(!values.empty(), "median: empty sample");
  std::vector<double> buf(values.begin(), values.end());
  const auto n = buf.size();
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(buf.begin(), mid, buf.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(buf.begin(), mid);
  return 0.5 * (lower + upper);
}

inline double median(const Vector& v) { return median(std::span<const double>(v.data(), v.size())); }

/// Median absolute deviation from the median (unscaled).
inline double mad(std::span<const double> values) {
  const double m = median(values);
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [m](double x) { return std::fabs(x - m); });
  return median(dev);
}

inline double mad(const Vector& v) { return mad(std::span<const double>(v.data(), v.size())); }

/// Comedian matrix around an arbitrary center:
/// entry (j,t) = median_i (x_ij - c_j)(x_it - c_t).
inline Matrix comedian(const DataMatrix& data, const Vector& center) {
  detail::require_nonempty(data, "comedian");
  detail::require(center.size() == data.cols(), "comedian: center length does not match data columns");
  const auto n = data.rows();
  const auto p = data.cols();
  const Matrix centered = data.rowwise() - center.transpose();
  Matrix out(p, p);
  std::vector<double> prod(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index t = j; t < p; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) prod[static_cast<std::size_t>(i)] = centered(i, j) * centered(i, t);
      out(j, t) = median(prod);
      out(t, j) = out(j, t);
    }
  }
  return out;
}

/// Comedian scaled so that its diagonal estimates variances for Gaussian columns.
inline Matrix adjusted_comedian(const DataMatrix& data, const Vector& center) {
  return kComedianAdjustment * comedian(data, center);
}

/// trace(adjusted_comedian(data, center)) without forming the off-diagonal entries.
inline double adjusted_comedian_trace(const DataMatrix& data, const Vector& center) {
  detail::require_nonempty(data, "adjusted_comedian_trace");
  detail::require(center.size() == data.cols(), "adjusted_comedian_trace: center length does not match data columns");
  double tr = 0.0;
  std::vector<double> sq(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double d = data(i, j) - center(j);
      sq[static_cast<std::size_t>(i)] = d * d;
    }
    tr += median(sq);
  }
  return kComedianAdjustment * tr;
}

/// Symmetric positive-definite matrix with its lower Cholesky factor.
///
/// Only the lower triangle of the input is read; the stored matrix is its
/// symmetric mirror. Construction fails when a pivot falls to
/// 1e-12 * (largest diagonal entry) or below.
class PDMatrix {
public:
  explicit PDMatrix(const Matrix& m) {
    detail::require(m.rows() == m.cols() && m.rows() >= 1, "PDMatrix: matrix must be square and non-empty");
    const auto p = m.rows();
    entries_ = m.triangularView<Eigen::Lower>();
    entries_.triangularView<Eigen::StrictlyUpper>() = entries_.transpose();
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        detail::require(std::isfinite(entries_(i, j)), "PDMatrix: non-finite entry");

    const double max_diag = entries_.diagonal().maxCoeff();
    detail::require(max_diag > 0.0, "PDMatrix: matrix is not positive definite (no positive diagonal)");
    const double pivot_floor = 1e-12 * max_diag;

    factor_ = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      double pivot = entries_(j, j);
      for (Eigen::Index k = 0; k < j; ++k) pivot -= factor_(j, k) * factor_(j, k);
      if (!(pivot > pivot_floor))
        throw Error("PDMatrix: matrix is not positive definite (pivot " + std::to_string(pivot) +
                    " at index " + std::to_string(j) + ")");
      const double ljj = std::sqrt(pivot);
      factor_(j, j) = ljj;
      for (Eigen::Index i = j + 1; i < p; ++i) {
        double s = entries_(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= factor_(i, k) * factor_(j, k);
        factor_(i, j) = s / ljj;
      }
    }
  }

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  const Matrix& factor() const { return factor_; }

  /// Solves factor * z = y by forward substitution.
  Vector solve_lower(const Vector& y) const {
    detail::require(y.size() == dim(), "PDMatrix: vector length does not match dimension");
    const auto p = dim();
    Vector z(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      double s = y(i);
      for (Eigen::Index k = 0; k < i; ++k) s -= factor_(i, k) * z(k);
      z(i) = s / factor_(i, i);
    }
    return z;
  }

private:
  Matrix entries_;
  Matrix factor_;
};

/// y' M^{-1} y, evaluated as the squared norm of L^{-1} y.
inline double quad_form(const PDMatrix& m, const Vector& y) { return m.solve_lower(y).squaredNorm(); }

}  // namespace rmd
