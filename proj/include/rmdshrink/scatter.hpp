#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "rmdshrink/common.hpp"
#include "rmdshrink/location.hpp"
#include "rmdshrink/primitives.hpp"

namespace rmd {

/// Scaled Frobenius norm ||A||^2 = trace(A A') / p used throughout the scatter shrinkage.
inline double scaled_sq_norm(const Matrix& a) { return a.squaredNorm() / static_cast<double>(a.rows()); }

struct ScatterOptions {
  /// When the plug-in intensity leaves the matrix indefinite, raise eta to the
  /// smallest value that factorizes (plus `definite_margin`) instead of failing.
  bool raise_to_definite = true;
  double definite_margin = 0.05;
};

struct ScatterEstimate {
  PDMatrix matrix;
  double eta = 0.0;
  double nu_sigma = 0.0;
  double numerator = 0.0;    // min(b2, d2)
  double denominator = 0.0;  // d2 = ||S - nu I||^2
  double eta_plugin = 0.0;   // numerator / denominator before the definiteness floor
  bool eta_raised = false;   // eta was raised above eta_plugin to reach positive definiteness
  LocationMethod base_center_method = LocationMethod::CCM;
  Matrix comedian;           // the adjusted comedian S that was shrunk
};

/// Shrinks the adjusted comedian around `center` toward nu * I.
///
/// nu = trace(S) / p. The intensity numerator is the Ledoit-Wolf plug-in
/// b2 = (1/n^2) sum_i ||y_i y_i' - S||^2 (y_i = x_i - center), truncated at
/// d2 = ||S - nu I||^2, so eta = min(b2, d2) / d2.
inline ScatterEstimate shrink_scatter_from(const DataMatrix& data, const Vector& center, const Matrix& s,
                                           LocationMethod method, const ScatterOptions& opts = {}) {
  const auto n = data.rows();
  const auto p = data.cols();
  const double tr = s.trace();
  if (!(tr > 0.0)) throw Error("scatter degenerate: no dispersion");
  const double nu = tr / static_cast<double>(p);
  const Matrix identity = Matrix::Identity(p, p);

  const double d2 = scaled_sq_norm(s - nu * identity);
  double b2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector y = data.row(i).transpose() - center;
    b2 += scaled_sq_norm(y * y.transpose() - s);
  }
  b2 /= static_cast<double>(n) * static_cast<double>(n);
  const double num = std::min(b2, d2);
  const double eta = shrinkage_intensity(num, d2);

  auto combine = [&](double e) -> Matrix { return (1.0 - e) * s + e * nu * identity; };
  auto try_factor = [&](double e) -> std::optional<PDMatrix> {
    try {
      return PDMatrix(combine(e));
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  if (auto m = try_factor(eta)) return {std::move(*m), eta, nu, num, d2, eta, false, method, s};
  if (!opts.raise_to_definite)
    throw Error("shrunk scatter is not positive definite (eta = " + std::to_string(eta) + ")");

  // Definiteness of (1 - e) S + e nu I is monotone in e and holds at e = 1,
  // so bisect for the smallest factorizable intensity.
  double lo = eta, hi = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (try_factor(mid) ? hi : lo) = mid;
  }
  const double raised = std::min(1.0, hi + opts.definite_margin);
  auto m = try_factor(raised);
  if (!m) throw Error("shrunk scatter is not positive definite even at eta = 1");
  return {std::move(*m), raised, nu, num, d2, eta, true, method, s};
}

inline ScatterEstimate shrink_scatter(const DataMatrix& data, const Vector& center, LocationMethod method,
                                      const ScatterOptions& opts = {}) {
  detail::require(data.rows() >= 2, "shrink_scatter: need at least 2 observations");
  detail::require(center.size() == data.cols(), "shrink_scatter: center length does not match data columns");
  return shrink_scatter_from(data, center, adjusted_comedian(data, center), method, opts);
}

}  // namespace rmd
