#pragma once

#include <algorithm>
#include <numbers>
#include <optional>
#include <string_view>

#include "rmdshrink/common.hpp"
#include "rmdshrink/primitives.hpp"

namespace rmd {

enum class LocationMethod { CCM, MM, ShCCM, ShMM };

inline std::string_view to_string(LocationMethod m) {
  switch (m) {
    case LocationMethod::CCM: return "CCM";
    case LocationMethod::MM: return "MM";
    case LocationMethod::ShCCM: return "ShCCM";
    case LocationMethod::ShMM: return "ShMM";
  }
  return "?";
}

inline bool is_shrinkage(LocationMethod m) { return m == LocationMethod::ShCCM || m == LocationMethod::ShMM; }

/// How the multivariate L1 median is computed.
enum class L1MedianMode {
  Medoid,     ///< sample point minimizing the mean L1 distance (default)
  Weiszfeld,  ///< continuous Euclidean geometric median
};

struct LocationEstimate {
  Vector center;
  LocationMethod method = LocationMethod::CCM;
  // Present only for the shrinkage methods.
  std::optional<double> eta;
  std::optional<double> nu_mu;
  std::optional<double> numerator;    // estimated E||raw - mu||^2
  std::optional<double> denominator;  // ||raw - nu_mu e||^2
};

/// Component-wise median.
inline LocationEstimate ccm_median(const DataMatrix& data) {
  detail::require_nonempty(data, "ccm_median");
  Vector center(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) center(j) = median(Vector(data.col(j)));
  return {center, LocationMethod::CCM, {}, {}, {}, {}};
}

namespace detail {

inline Vector l1_medoid(const DataMatrix& data) {
  const auto n = data.rows();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = data;
  Matrix dist(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    dist(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double d = (rows.row(a) - rows.row(b)).cwiseAbs().sum();
      dist(a, b) = d;
      dist(b, a) = d;
    }
  }
  // Column sums in a fixed index order, so identical rows score identically.
  Eigen::Index best = 0;
  double best_cost = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cost += dist(i, m);
    if (m == 0 || cost < best_cost) {
      best = m;
      best_cost = cost;
    }
  }
  return data.row(best).transpose();
}

inline Vector weiszfeld(const DataMatrix& data, int max_iter = 1000, double tol = 1e-10) {
  Vector y = ccm_median(data).center;
  const auto n = data.rows();
  for (int iter = 0; iter < max_iter; ++iter) {
    Vector num = Vector::Zero(data.cols());
    double den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = (data.row(i).transpose() - y).norm();
      if (r <= 1e-12) continue;
      num += data.row(i).transpose() / r;
      den += 1.0 / r;
    }
    if (den == 0.0) break;
    Vector next = num / den;
    const double step = (next - y).norm();
    y = std::move(next);
    if (step <= tol * (1.0 + y.norm())) break;
  }
  return y;
}

}  // namespace detail

/// Multivariate L1 median. The default mode returns the sample point with the
/// smallest mean L1 distance to all observations (lowest row index on ties).
inline LocationEstimate l1_median(const DataMatrix& data, L1MedianMode mode = L1MedianMode::Medoid) {
  detail::require_nonempty(data, "l1_median");
  Vector center = mode == L1MedianMode::Medoid ? detail::l1_medoid(data) : detail::weiszfeld(data);
  return {std::move(center), LocationMethod::MM, {}, {}, {}, {}};
}

/// Per-observation sandwich terms for the L1 median's asymptotic covariance.
struct SandwichTerms {
  Matrix a;  // (1/n) sum (1/r)(I - y y'/r^2)
  Matrix b;  // (1/n) sum y y'/r^2
  Eigen::Index contributing = 0;
};

inline SandwichTerms sandwich_terms(const DataMatrix& data, const Vector& center) {
  detail::require_nonempty(data, "sandwich_trace");
  detail::require(center.size() == data.cols(), "sandwich_trace: center length does not match data columns");
  const auto n = data.rows();
  const auto p = data.cols();
  SandwichTerms t{Matrix::Zero(p, p), Matrix::Zero(p, p), 0};
  const Matrix identity = Matrix::Identity(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector y = data.row(i).transpose() - center;
    const double r = y.norm();
    if (r <= 1e-12) continue;
    const Matrix outer = (y * y.transpose()) / (r * r);
    t.a += (identity - outer) / r;
    t.b += outer;
    ++t.contributing;
  }
  t.a /= static_cast<double>(n);
  t.b /= static_cast<double>(n);
  return t;
}

/// trace((1/n) A^{-1} B A^{-1}): plug-in estimate of E||mu_MM - mu||^2.
inline double sandwich_trace(const DataMatrix& data, const Vector& center) {
  const SandwichTerms t = sandwich_terms(data, center);
  if (t.contributing == 0) throw Error("sandwich_trace: degenerate direction distribution (all observations at center)");
  Eigen::FullPivLU<Matrix> lu(t.a);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw Error("sandwich_trace: degenerate direction distribution");
  const Matrix a_inv = lu.inverse();
  const double tr = (a_inv * t.b * a_inv).trace() / static_cast<double>(data.rows());
  return std::max(tr, 0.0);
}

/// Shrinkage intensity N / D clamped to [0, 1]; 1 when the denominator vanishes
/// (the estimator already equals its target).
inline double shrinkage_intensity(double numerator, double denominator) {
  if (denominator <= 1e-12) return 1.0;
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

namespace detail {

template <class Numerator>
LocationEstimate shrink_location(const Vector& raw, LocationMethod method, Numerator&& numerator) {
  const double p = static_cast<double>(raw.size());
  const double nu = raw.sum() / p;
  const Vector target = Vector::Constant(raw.size(), nu);
  const double den = (raw - target).squaredNorm();
  // The numerator is irrelevant when raw already equals its target.
  const double num = den <= 1e-12 ? 0.0 : numerator();
  const double eta = shrinkage_intensity(num, den);
  Vector center = (1.0 - eta) * raw + eta * target;
  return {std::move(center), method, eta, nu, num, den};
}

}  // namespace detail

/// Component-wise median shrunk toward nu * e; the median's variance is taken
/// as (pi / 2n) * trace of the adjusted comedian.
inline LocationEstimate shrink_ccm(const DataMatrix& data, const LocationEstimate& ccm) {
  detail::require(data.rows() >= 2, "shrink_ccm: need at least 2 observations");
  detail::require(ccm.method == LocationMethod::CCM, "shrink_ccm: base estimate must be the component-wise median");
  const Vector& raw = ccm.center;
  return detail::shrink_location(raw, LocationMethod::ShCCM, [&] {
    const double n = static_cast<double>(data.rows());
    return std::numbers::pi / (2.0 * n) * adjusted_comedian_trace(data, raw);
  });
}

/// L1 median shrunk toward nu * e; the median's variance is the sandwich trace.
inline LocationEstimate shrink_mm(const DataMatrix& data, const LocationEstimate& mm) {
  detail::require(data.rows() >= data.cols(), "shrink_mm: need n >= p");
  detail::require(mm.method == LocationMethod::MM, "shrink_mm: base estimate must be the L1 median");
  const Vector& raw = mm.center;
  return detail::shrink_location(raw, LocationMethod::ShMM, [&] { return sandwich_trace(data, raw); });
}

inline LocationEstimate shrink_ccm(const DataMatrix& data) { return shrink_ccm(data, ccm_median(data)); }

inline LocationEstimate shrink_mm(const DataMatrix& data, L1MedianMode mode = L1MedianMode::Medoid) {
  return shrink_mm(data, l1_median(data, mode));
}

}  // namespace rmd
