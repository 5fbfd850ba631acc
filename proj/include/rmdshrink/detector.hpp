#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmdshrink/common.hpp"
#include "rmdshrink/location.hpp"
#include "rmdshrink/primitives.hpp"
#include "rmdshrink/scatter.hpp"
#include "rmdshrink/special.hpp"

namespace rmd {

/// The six (location, scatter) combinations.
///
///   v1: CCM   with Sh(S_CCM)      v4: MM   with Sh(S_MM)
///   v2: ShCCM with Sh(S_CCM)      v5: ShMM with Sh(S_MM)
///   v3: ShCCM with Sh(S_ShCCM)    v6: ShMM with Sh(S_ShMM)
enum class Variant { v1 = 1, v2, v3, v4, v5, v6 };

inline constexpr std::array<Variant, 6> kAllVariants{Variant::v1, Variant::v2, Variant::v3,
                                                     Variant::v4, Variant::v5, Variant::v6};

inline std::string to_string(Variant v) { return "v" + std::to_string(static_cast<int>(v)); }

inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s.size() == 2 && (s[0] == 'v' || s[0] == 'V') && s[1] >= '1' && s[1] <= '6')
    return static_cast<Variant>(s[1] - '0');
  return std::nullopt;
}

/// Location estimator used for the distance center.
inline LocationMethod location_method(Variant v) {
  switch (v) {
    case Variant::v1: return LocationMethod::CCM;
    case Variant::v2:
    case Variant::v3: return LocationMethod::ShCCM;
    case Variant::v4: return LocationMethod::MM;
    case Variant::v5:
    case Variant::v6: return LocationMethod::ShMM;
  }
  return LocationMethod::CCM;
}

/// Location estimator the comedian is centered on before shrinkage.
inline LocationMethod comedian_center_method(Variant v) {
  switch (v) {
    case Variant::v1:
    case Variant::v2: return LocationMethod::CCM;
    case Variant::v3: return LocationMethod::ShCCM;
    case Variant::v4:
    case Variant::v5: return LocationMethod::MM;
    case Variant::v6: return LocationMethod::ShMM;
  }
  return LocationMethod::CCM;
}

struct DetectOptions {
  double quantile = 0.975;
  L1MedianMode l1_mode = L1MedianMode::Medoid;
  ScatterOptions scatter;
};

/// Returns the (location, scatter) pair that defines the variant's distance.
inline std::pair<LocationEstimate, ScatterEstimate> scatter_for_variant(const DataMatrix& data, Variant variant,
                                                                       L1MedianMode l1_mode = L1MedianMode::Medoid,
                                                                       const ScatterOptions& scatter_opts = {}) {
  detail::require_nonempty(data, "scatter_for_variant");
  detail::require_finite(data, "scatter_for_variant");
  const LocationMethod loc_m = location_method(variant);
  const LocationMethod com_m = comedian_center_method(variant);
  const bool ccm_family = loc_m == LocationMethod::CCM || loc_m == LocationMethod::ShCCM;

  // Raw and shrunk estimates of one family; the shrunk one only when needed.
  const LocationEstimate raw = ccm_family ? ccm_median(data) : l1_median(data, l1_mode);
  std::optional<LocationEstimate> shrunk;
  if (is_shrinkage(loc_m) || is_shrinkage(com_m))
    shrunk = ccm_family ? shrink_ccm(data, raw) : shrink_mm(data, raw);

  const LocationEstimate& loc = is_shrinkage(loc_m) ? *shrunk : raw;
  const LocationEstimate& com_center = is_shrinkage(com_m) ? *shrunk : raw;
  ScatterEstimate scat = shrink_scatter(data, com_center.center, com_m, scatter_opts);
  return {loc, std::move(scat)};
}

/// Squared robust Mahalanobis distance of every row.
inline Vector rmd_squared(const DataMatrix& data, const LocationEstimate& loc, const ScatterEstimate& scat) {
  detail::require(loc.center.size() == data.cols(), "rmd_squared: location dimension does not match data");
  detail::require(scat.matrix.dim() == data.cols(), "rmd_squared: scatter dimension does not match data");
  Vector d2(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    d2(i) = quad_form(scat.matrix, data.row(i).transpose() - loc.center);
  return d2;
}

struct DetectionReport {
  Variant variant = Variant::v6;
  double quantile = 0.975;
  double threshold = 0.0;
  Vector d2;
  std::vector<bool> flags;
  std::optional<double> eta_location;
  double eta_scatter = 0.0;
  LocationEstimate location;
  std::vector<std::string> warnings;

  std::size_t outlier_count() const {
    std::size_t k = 0;
    for (bool f : flags) k += f ? 1 : 0;
    return k;
  }
};

/// Flags rows whose squared distance exceeds the chi-squared(p) quantile.
inline DetectionReport detect(const DataMatrix& data, Variant variant, const DetectOptions& opts = {}) {
  detail::require(opts.quantile > 0.0 && opts.quantile < 1.0, "detect: quantile outside (0,1)");
  auto [loc, scat] = scatter_for_variant(data, variant, opts.l1_mode, opts.scatter);

  DetectionReport r;
  r.variant = variant;
  r.quantile = opts.quantile;
  r.threshold = chi2_quantile(static_cast<int>(data.cols()), opts.quantile);
  r.d2 = rmd_squared(data, loc, scat);
  r.flags.resize(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) r.flags[static_cast<std::size_t>(i)] = r.d2(i) > r.threshold;
  r.eta_location = loc.eta;
  r.eta_scatter = scat.eta;
  r.location = std::move(loc);
  if (data.rows() <= data.cols())
    r.warnings.push_back("n <= p: the scatter estimate is poorly determined");
  return r;
}

}  // namespace rmd
