#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rmdshrink/common.hpp"
#include "rmdshrink/location.hpp"

namespace rmd {

/// Spatial (L1) depth: 1 - || (1/n) sum_{x_i != point} (x_i - point) / ||x_i - point|| ||.
inline double l1_depth(const DataMatrix& data, const Vector& point) {
  detail::require_nonempty(data, "l1_depth");
  detail::require(point.size() == data.cols(), "l1_depth: point dimension does not match data");
  Vector sum = Vector::Zero(data.cols());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Vector y = data.row(i).transpose() - point;
    const double r = y.norm();
    if (r <= 0.0) continue;
    sum += y / r;
  }
  const double depth = 1.0 - (sum / static_cast<double>(data.rows())).norm();
  return std::clamp(depth, 0.0, 1.0);
}

/// Depth-based "multivariate boxplot": the box is the coordinate-wise range of
/// the deepest half of the rows.
struct BoxplotSummary {
  std::vector<Eigen::Index> depth_order;  // deepest first
  Vector depths;                          // per row, original order
  Vector q1, q3;
  Vector fence_lo, fence_hi;
  Vector median_point;
  std::size_t central_count = 0;  // rows in the deepest half
  std::size_t flagged_inside = 0;   // flagged rows within the fences in every coordinate
  std::size_t flagged_outside = 0;  // flagged rows beyond a fence in some coordinate
  std::size_t flagged_total = 0;
  std::size_t flagged_central = 0;  // flagged rows among the deepest half
};

inline BoxplotSummary boxplot_summary(const DataMatrix& data, const std::vector<bool>& flags,
                                      L1MedianMode l1_mode = L1MedianMode::Medoid) {
  detail::require(data.rows() >= 2, "boxplot_summary: need at least 2 rows");
  detail::require(flags.size() == static_cast<std::size_t>(data.rows()), "boxplot_summary: flags length mismatch");
  const auto n = data.rows();
  BoxplotSummary b;
  b.depths.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) b.depths(i) = l1_depth(data, data.row(i).transpose());

  b.depth_order.resize(static_cast<std::size_t>(n));
  std::iota(b.depth_order.begin(), b.depth_order.end(), Eigen::Index{0});
  std::stable_sort(b.depth_order.begin(), b.depth_order.end(),
                   [&](Eigen::Index a, Eigen::Index c) { return b.depths(a) > b.depths(c); });

  b.central_count = static_cast<std::size_t>((n + 1) / 2);
  std::vector<bool> central(static_cast<std::size_t>(n), false);
  b.q1 = data.row(b.depth_order.front()).transpose();
  b.q3 = b.q1;
  for (std::size_t k = 0; k < b.central_count; ++k) {
    const Eigen::Index i = b.depth_order[k];
    central[static_cast<std::size_t>(i)] = true;
    b.q1 = b.q1.cwiseMin(data.row(i).transpose());
    b.q3 = b.q3.cwiseMax(data.row(i).transpose());
  }
  const Vector range = b.q3 - b.q1;
  b.fence_lo = b.q1 - 1.5 * range;
  b.fence_hi = b.q3 + 1.5 * range;
  b.median_point = l1_median(data, l1_mode).center;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!flags[static_cast<std::size_t>(i)]) continue;
    ++b.flagged_total;
    const auto row = data.row(i).transpose();
    const bool inside = (row.array() >= b.fence_lo.array()).all() && (row.array() <= b.fence_hi.array()).all();
    ++(inside ? b.flagged_inside : b.flagged_outside);
    if (central[static_cast<std::size_t>(i)]) ++b.flagged_central;
  }
  return b;
}

}  // namespace rmd
