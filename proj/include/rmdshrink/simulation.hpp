#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rmdshrink/common.hpp"
#include "rmdshrink/detector.hpp"

namespace rmd {

/// Seeded generator whose output depends only on the seed: mt19937_64 is fully
/// specified by the standard, and the variate transforms below are our own.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, both variates used).
  double normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

  /// Rate-1 exponential.
  double exponential() { return -std::log1p(-uniform()); }

  double chi_squared(int dof) {
    double s = 0.0;
    for (int k = 0; k < dof; ++k) {
      const double z = normal();
      s += z * z;
    }
    return s;
  }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class Family {
  NormalMixture,
  T3Mixture,
  ExpMixture,
  CorrelatedNormal,
  AffineTransformed,
  BreakdownSymmetric,
  BreakdownAsymmetric,
};

inline constexpr std::array<std::pair<Family, std::string_view>, 7> kFamilyNames{{
    {Family::NormalMixture, "normal"},
    {Family::T3Mixture, "t3"},
    {Family::ExpMixture, "exponential"},
    {Family::CorrelatedNormal, "correlated"},
    {Family::AffineTransformed, "affine"},
    {Family::BreakdownSymmetric, "breakdown_symmetric"},
    {Family::BreakdownAsymmetric, "breakdown_asymmetric"},
}};

inline std::string_view to_string(Family f) {
  for (const auto& [fam, name] : kFamilyNames)
    if (fam == f) return name;
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  for (const auto& [fam, name] : kFamilyNames)
    if (name == s) return fam;
  return std::nullopt;
}

struct ScenarioSpec {
  std::string id;
  Family family = Family::NormalMixture;
  int p = 5;
  int n = 100;
  double alpha = 0.0;
  double delta = 10.0;
  double lambda = 1.0;
  int reps = 100;
  std::uint64_t seed = 0;
  Variant variant = Variant::v6;
};

inline bool operator==(const ScenarioSpec& a, const ScenarioSpec& b) {
  return a.id == b.id && a.family == b.family && a.p == b.p && a.n == b.n && a.alpha == b.alpha &&
         a.delta == b.delta && a.lambda == b.lambda && a.reps == b.reps && a.seed == b.seed &&
         a.variant == b.variant;
}

inline void validate(const ScenarioSpec& s) {
  detail::require(s.p >= 1, "scenario: p must be >= 1");
  detail::require(s.n >= 2, "scenario: n must be >= 2");
  detail::require(s.alpha >= 0.0 && s.alpha <= 0.5, "scenario: alpha must be in [0, 0.5]");
  detail::require(s.delta >= 0.0, "scenario: delta must be >= 0");
  detail::require(s.lambda > 0.0, "scenario: lambda must be > 0");
  detail::require(s.reps >= 1, "scenario: reps must be >= 1");
  if (s.family == Family::CorrelatedNormal) detail::require(s.p == 6, "scenario: correlated family requires p == 6");
}

/// floor(alpha * n), robust to alpha values that are not exact in binary.
inline int contaminated_count(double alpha, int n) {
  return static_cast<int>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

struct Sample {
  DataMatrix data;
  std::vector<bool> truth;  // true for contaminated rows (the first floor(alpha n) rows)
};

namespace detail {

inline Sample empty_sample(const ScenarioSpec& s) {
  Sample out{DataMatrix(s.n, s.p), std::vector<bool>(static_cast<std::size_t>(s.n), false)};
  const int k = contaminated_count(s.alpha, s.n);
  std::fill_n(out.truth.begin(), k, true);
  return out;
}

inline void fill_normal(Rng& rng, DataMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
}

}  // namespace detail

/// (1 - alpha) N(0, I) + alpha N(delta e, lambda I).
inline Sample gen_normal_mixture(const ScenarioSpec& s, std::uint64_t seed) {
  validate(s);
  Rng rng(seed);
  Sample out = detail::empty_sample(s);
  const double scale = std::sqrt(s.lambda);
  for (Eigen::Index i = 0; i < s.n; ++i) {
    const bool bad = out.truth[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < s.p; ++j) {
      const double z = rng.normal();
      out.data(i, j) = bad ? s.delta + scale * z : z;
    }
  }
  return out;
}

/// (1 - alpha) T3(0, I) + alpha T3(delta e, lambda I), with lambda I the scale matrix:
/// rows are m + sqrt(lambda) z sqrt(3 / w), z ~ N(0, I), w ~ chi2(3).
inline Sample gen_t3_mixture(const ScenarioSpec& s, std::uint64_t seed) {
  validate(s);
  Rng rng(seed);
  Sample out = detail::empty_sample(s);
  const double scale = std::sqrt(s.lambda);
  for (Eigen::Index i = 0; i < s.n; ++i) {
    const bool bad = out.truth[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < s.p; ++j) out.data(i, j) = rng.normal();
    const double w = rng.chi_squared(3);
    const double mix = std::sqrt(3.0 / w);
    for (Eigen::Index j = 0; j < s.p; ++j)
      out.data(i, j) = bad ? s.delta + scale * mix * out.data(i, j) : mix * out.data(i, j);
  }
  return out;
}

/// Independent rate-1 exponential coordinates; contaminated rows shifted by delta e.
inline Sample gen_exp_mixture(const ScenarioSpec& s, std::uint64_t seed) {
  validate(s);
  Rng rng(seed);
  Sample out = detail::empty_sample(s);
  for (Eigen::Index i = 0; i < s.n; ++i) {
    const double shift = out.truth[static_cast<std::size_t>(i)] ? s.delta : 0.0;
    for (Eigen::Index j = 0; j < s.p; ++j) out.data(i, j) = shift + rng.exponential();
  }
  return out;
}

/// Block-diagonal 6 x 6 correlation matrix with a wide range of correlations.
inline Matrix correlated_target() {
  Matrix P = Matrix::Zero(6, 6);
  P.topLeftCorner(3, 3) << 1.0, 0.95, 0.3, 0.95, 1.0, 0.1, 0.3, 0.1, 1.0;
  P.bottomRightCorner(3, 3) << 1.0, -0.499, -0.499, -0.499, 1.0, -0.499, -0.499, -0.499, 1.0;
  return P;
}

/// (1 - alpha) N(0, P) + alpha N(delta e, P) with P from correlated_target().
inline Sample gen_correlated(const ScenarioSpec& s, std::uint64_t seed) {
  validate(s);
  detail::require(s.p == 6, "gen_correlated: p must be 6");
  const PDMatrix P(correlated_target());
  const Matrix& L = P.factor();
  Rng rng(seed);
  Sample out = detail::empty_sample(s);
  Vector z(6);
  for (Eigen::Index i = 0; i < s.n; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) z(j) = rng.normal();
    const double shift = out.truth[static_cast<std::size_t>(i)] ? s.delta : 0.0;
    out.data.row(i) = (L * z).transpose().array() + shift;
  }
  return out;
}

/// Haar-distributed random orthogonal matrix: QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q.
inline Matrix random_orthogonal(Rng& rng, int p) {
  Matrix g(p, p);
  detail::fill_normal(rng, g);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

struct AffineSample {
  Sample sample;
  Matrix transform;  // A = T D; rows of the data are x' A'
  Matrix orthogonal;
  Vector scales;
};

/// Normal mixture mapped through A = T diag(u), T random orthogonal, u_j ~ U(0, 1).
inline AffineSample gen_affine_transformed_detail(const ScenarioSpec& s, std::uint64_t seed) {
  validate(s);
  Sample base = gen_normal_mixture(s, seed);
  // A separate stream for the transform keeps the base data identical to the
  // plain normal mixture with the same seed.
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  const Matrix T = random_orthogonal(rng, s.p);
  Vector u(s.p);
  for (int j = 0; j < s.p; ++j) {
    do {
      u(j) = rng.uniform();
    } while (u(j) < 1e-6);
  }
  const Matrix A = T * u.asDiagonal();
  base.data = base.data * A.transpose();
  return {std::move(base), A, T, u};
}

inline Sample gen_affine_transformed(const ScenarioSpec& s, std::uint64_t seed) {
  return gen_affine_transformed_detail(s, seed).sample;
}

/// N(0, I) sample whose first floor(alpha n) rows are replaced: row i (1-based)
/// becomes 100 i x_i (symmetric) or (100 i) e (asymmetric).
inline Sample gen_breakdown(const ScenarioSpec& s, std::uint64_t seed) {
  validate(s);
  detail::require(s.family == Family::BreakdownSymmetric || s.family == Family::BreakdownAsymmetric,
                  "gen_breakdown: family must be a breakdown family");
  Rng rng(seed);
  Sample out = detail::empty_sample(s);
  detail::fill_normal(rng, out.data);
  const int k = contaminated_count(s.alpha, s.n);
  for (int i = 0; i < k; ++i) {
    const double factor = 100.0 * (i + 1);
    if (s.family == Family::BreakdownSymmetric) out.data.row(i) *= factor;
    else out.data.row(i).setConstant(factor);
  }
  return out;
}

inline Sample generate(const ScenarioSpec& s, std::uint64_t seed) {
  switch (s.family) {
    case Family::NormalMixture: return gen_normal_mixture(s, seed);
    case Family::T3Mixture: return gen_t3_mixture(s, seed);
    case Family::ExpMixture: return gen_exp_mixture(s, seed);
    case Family::CorrelatedNormal: return gen_correlated(s, seed);
    case Family::AffineTransformed: return gen_affine_transformed(s, seed);
    case Family::BreakdownSymmetric:
    case Family::BreakdownAsymmetric: return gen_breakdown(s, seed);
  }
  throw Error("generate: unknown family");
}

struct Metrics {
  double c = 0.0;  // correct detection rate (recall)
  double f = 0.0;  // false detection rate
  double fscore = 0.0;
};

/// Detection rates against ground truth. c is 1 when there are no true
/// outliers; precision is 1 when nothing is flagged.
inline Metrics metrics(const std::vector<bool>& flags, const std::vector<bool>& truth) {
  detail::require(flags.size() == truth.size(), "metrics: flags and truth lengths differ");
  std::size_t tp = 0, fp = 0, pos = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    pos += truth[i] ? 1 : 0;
    if (flags[i]) (truth[i] ? tp : fp) += 1;
  }
  const std::size_t neg = truth.size() - pos;
  Metrics m;
  m.c = pos == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(pos);
  m.f = neg == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(neg);
  const double precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = m.c;
  m.fscore = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  return m;
}

struct MetricsReport {
  std::string id;
  ScenarioSpec spec;
  double c_mean = 0.0;
  double f_mean = 0.0;
  double fscore_mean = 0.0;
  std::vector<double> c;
  std::vector<double> f;
  std::vector<double> fscore;
  double wall_seconds = 0.0;
};

inline bool operator==(const MetricsReport& a, const MetricsReport& b) {
  return a.id == b.id && a.spec == b.spec && a.c_mean == b.c_mean && a.f_mean == b.f_mean &&
         a.fscore_mean == b.fscore_mean && a.c == b.c && a.f == b.f && a.fscore == b.fscore &&
         a.wall_seconds == b.wall_seconds;
}

struct RunOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  DetectOptions detect;
};

/// Replicate seed: the scenario seed plus the replicate index.
inline std::uint64_t replicate_seed(const ScenarioSpec& s, int rep) {
  return s.seed + static_cast<std::uint64_t>(rep);
}

/// Runs `reps` independent replicates and averages their metrics. Replicates
/// may run on several threads; results are stored by replicate index, so the
/// report does not depend on scheduling.
inline MetricsReport run_scenario(const ScenarioSpec& spec, const RunOptions& opts = {}) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  const auto reps = static_cast<std::size_t>(spec.reps);
  std::vector<Metrics> per(reps);
  std::vector<std::exception_ptr> errors(reps);

  auto run_one = [&](std::size_t r) {
    try {
      const auto seed = replicate_seed(spec, static_cast<int>(r));
      const Sample sample = generate(spec, seed);
      const DetectionReport rep = detect(sample.data, spec.variant, opts.detect);
      per[r] = metrics(rep.flags, sample.truth);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  if (threads <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) run_one(r);
      });
  }

  for (std::size_t r = 0; r < reps; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      throw Error("scenario '" + spec.id + "' replicate " + std::to_string(r) + " (seed " +
                  std::to_string(replicate_seed(spec, static_cast<int>(r))) + "): " + e.what());
    }
  }

  MetricsReport out;
  out.id = spec.id;
  out.spec = spec;
  for (const Metrics& m : per) {
    out.c.push_back(m.c);
    out.f.push_back(m.f);
    out.fscore.push_back(m.fscore);
  }
  const double k = static_cast<double>(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    out.c_mean += out.c[r];
    out.f_mean += out.f[r];
    out.fscore_mean += out.fscore[r];
  }
  out.c_mean /= k;
  out.f_mean /= k;
  out.fscore_mean /= k;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

struct BenchResult {
  std::string id;
  Variant variant = Variant::v6;
  int p = 0;
  int n = 0;
  std::vector<double> seconds;  // one per measurement
  double median_seconds = 0.0;
};

/// Times `detect` on freshly generated data (replicate seeds 0..k-1); k >= 3.
inline BenchResult bench_variant(const ScenarioSpec& spec, Variant variant, int measurements = 5,
                                 const DetectOptions& opts = {}) {
  validate(spec);
  detail::require(measurements >= 3, "bench_variant: need at least 3 measurements");
  BenchResult out{spec.id, variant, spec.p, spec.n, {}, 0.0};
  for (int k = 0; k < measurements; ++k) {
    const Sample sample = generate(spec, replicate_seed(spec, k));
    const auto t0 = std::chrono::steady_clock::now();
    const DetectionReport rep = detect(sample.data, variant, opts);
    const auto t1 = std::chrono::steady_clock::now();
    detail::require(rep.d2.size() == spec.n, "bench_variant: detection produced wrong length");
    out.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  out.median_seconds = median(std::span<const double>(out.seconds));
  return out;
}

}  // namespace rmd
