#pragma once

// Exact enumeration of small systems and numerical checks of the structural
// results: interpolation between a system and its two subsystems, pointwise
// sub-additivity, convexity of sqrt(1 + x^2), quenched free energies and the
// t-interpolated fluctuation law.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relhop/dynamics.hpp"
#include "relhop/model.hpp"
#include "relhop/stats.hpp"

namespace relhop {

inline constexpr std::size_t kMaxEnumeratedSites = 24;
inline constexpr std::size_t kMaxInterpolatedSites = 20;

/// ln sum_sigma exp(-beta H(sigma | xi)) over all 2^N configurations, visited
/// in Gray-code order with a streaming log-sum-exp. Throws InputError for
/// N > kMaxEnumeratedSites.
double exact_log_partition(const ModelKind& kind, PatternView patterns, double beta);
double exact_log_partition(const ModelKind& kind, const PatternSet& patterns, double beta);

/// Mean over `samples` pattern draws of ln Z / N, with its standard error.
Estimate quenched_free_energy(const ModelKind& kind, std::size_t n, std::size_t p, double beta,
                              std::size_t samples, std::uint64_t seed, unsigned workers = 0);

/// Sites [0, N1) form the first subsystem, [N1, N) the second.
class SplitSpec {
 public:
  /// Throws InputError unless 1 <= N1 <= N - 1.
  SplitSpec(std::size_t n, std::size_t n1);

  std::size_t n() const noexcept { return n_; }
  std::size_t n1() const noexcept { return n1_; }
  std::size_t n2() const noexcept { return n_ - n1_; }
  double rho1() const noexcept { return static_cast<double>(n1_) / static_cast<double>(n_); }
  double rho2() const noexcept { return static_cast<double>(n_ - n1_) / static_cast<double>(n_); }

 private:
  std::size_t n_;
  std::size_t n1_;
};

/// Per-realisation interpolating free energy
///   (1/N) ln sum_sigma exp(beta [t N f(m_N) + (1-t)(N1 f(m_N1) + N2 f(m_N2))]),
/// f(m) = sqrt(1 + ||m||^2), subsystem overlaps taken on the restricted
/// patterns. beta = 1 is the literal statement; other values are an
/// extrapolation. Throws InputError for N > kMaxInterpolatedSites or t outside [0, 1].
double interpolating_alpha(const PatternSet& patterns, const SplitSpec& split, double t, double beta = 1.0);

/// Exact d/dt of interpolating_alpha: beta < f(m_N) - rho1 f(m_N1) - rho2 f(m_N2) >_t.
double interpolating_alpha_derivative(const PatternSet& patterns, const SplitSpec& split, double t,
                                      double beta = 1.0);

struct InterpolationReport {
  std::vector<double> t_grid;
  std::vector<double> alpha_t;               // sample mean of alpha(t)
  std::vector<double> derivative_estimates;  // sample mean of the finite differences
  double max_derivative = 0.0;               // worst finite difference over all samples
  double slack = 0.0;                        // 1e-8 * N
  bool monotone = false;                     // max_derivative <= slack
  std::size_t samples = 0;
  std::size_t worst_sample = 0;
  std::uint64_t worst_seed = 0;
};

/// Evaluates alpha(t) on the grid for each pattern sample; finite differences
/// are central inside the grid and one-sided at its ends.
InterpolationReport check_t_monotonicity(std::size_t n, std::size_t n1, std::size_t p,
                                         std::span<const double> t_grid, std::size_t samples,
                                         std::uint64_t seed, double beta = 1.0, unsigned workers = 0);

struct SubadditivityReport {
  std::vector<double> margins;  // [sample][split N1 - 1]: ln Z_N - ln Z_N1 - ln Z_N2
  double max_margin = 0.0;
  bool all_nonpositive = false;  // max_margin <= 1e-10
  std::size_t samples = 0;
  std::size_t worst_sample = 0;
  std::uint64_t worst_seed = 0;
  std::size_t worst_split = 0;  // N1 of the worst margin
};

inline constexpr double kSubadditivitySlack = 1e-10;

/// N alpha_N <= N1 alpha_N1 + N2 alpha_N2 for every split and every pattern
/// sample, subsystems sharing the sample's patterns restricted to their sites.
SubadditivityReport check_subadditivity(const ModelKind& kind, std::size_t n, std::size_t p, double beta,
                                        std::size_t samples, std::uint64_t seed, unsigned workers = 0);

/// f(rho m1 + (1 - rho) m2) - rho f(m1) - (1 - rho) f(m2) for f = sqrt(1 + ||.||^2).
double convexity_gap(std::span<const double> m1, std::span<const double> m2, double rho);

struct ConvexityReport {
  double max_violation = 0.0;
  std::vector<double> worst_m1;
  std::vector<double> worst_m2;
  double worst_rho = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr double kConvexitySlack = 1e-12;

/// Maximum of convexity_gap over m1, m2 with components on an evenly spaced
/// grid of `resolution` points in [-1, 1] and rho = k / (resolution + 1),
/// k = 1..resolution. P is limited to 1..3.
ConvexityReport check_sqrt_convexity(std::size_t resolution, std::size_t p, unsigned workers = 0);

struct FluctuationRow {
  double t = 0.0;
  double value = 0.0;  // N <m_1^2>_t
  double standard_error = 0.0;
  double theory = 0.0;  // 1 / (1 - beta t)
  bool exact = false;   // enumeration (true) or Monte Carlo (false)
};

/// N <m_1^2>_t under the ergodic-phase interpolated weight
/// exp(t beta N sqrt(1 + ||m||^2)). Exact enumeration for N <= 20 on one
/// pattern draw; otherwise Monte Carlo of the relativistic model at beta * t
/// with `runs` replicas. Throws DomainError for beta >= 1.
std::vector<FluctuationRow> check_fluctuation_interpolation(std::size_t n, std::size_t p, double beta,
                                                            std::span<const double> t_grid,
                                                            std::size_t runs, const DynamicsConfig& mc,
                                                            unsigned workers = 0);

}  // namespace relhop
