#pragma once

// Single-spin-flip Monte Carlo at inverse noise level beta and the ensemble
// drivers built on it (overlap-vs-noise curves, retrieval frequency,
// rescaled overlap fluctuations).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relhop/model.hpp"
#include "relhop/random.hpp"

namespace relhop {

/// beta = +infinity selects the zero-noise quench: accept iff dH < 0.
inline constexpr double kZeroNoise = std::numeric_limits<double>::infinity();

enum class UpdateRule { Glauber, Metropolis };

UpdateRule parse_update_rule(std::string_view text);
std::string to_string(UpdateRule rule);

// Initial conditions. Pattern indices are zero-based here; the CLI spells
// them one-based ("pattern:1" is the first pattern).
struct RandomInit {};
struct PatternInit {
  std::size_t pattern = 0;
};
struct CorruptedInit {
  std::size_t pattern = 0;
  double flip_fraction = 0.0;
};
using InitialCondition = std::variant<RandomInit, PatternInit, CorruptedInit>;

/// "random", "pattern:K" or "corrupted:K:F" with K one-based.
InitialCondition parse_initial_condition(std::string_view text);
std::string to_string(const InitialCondition& init);

struct DynamicsConfig {
  double beta = 1.0;
  UpdateRule rule = UpdateRule::Glauber;
  std::size_t equilibration_sweeps = 1000;
  std::size_t measurement_sweeps = 1000;
  std::uint64_t seed = 0;
  InitialCondition init = PatternInit{};

  /// Throws InputError on beta < 0 or NaN, zero measurement sweeps, or a
  /// corruption fraction outside [0, 0.5].
  void validate() const;
};

struct TrajectoryStats {
  OverlapVector mean_overlaps;
  std::vector<double> overlap_variance;  // population variance over measurement sweeps
  double mean_retrieved_overlap = 0.0;   // time average of max_mu |m_mu|
  double acceptance_rate = 0.0;          // over measurement sweeps
  SpinState final_state;
};

/// What an overlap curve records per run.
///   FirstPattern:     the signed time average <m_1>.
///   RetrievedPattern: the time average of max_mu |m_mu|, i.e. the overlap
///                     with whichever pattern the network currently retrieves.
/// At finite N and P > 1 the retrieved pattern can change during a run near
/// the transition, which drags <m_1> towards zero without the network
/// leaving the retrieval phase.
enum class CurveObservable { FirstPattern, RetrievedPattern };

CurveObservable parse_curve_observable(std::string_view text);
std::string to_string(CurveObservable observable);

/// N * <m_1^2> with its jackknife error over replicas.
struct RescaledFluctuation {
  double value = 0.0;
  double standard_error = 0.0;
};

struct CurvePoint {
  double beta = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t runs = 0;
};

struct RetrievalPoint {
  double beta = 0.0;
  double frequency = 0.0;
  double standard_error = 0.0;
  std::size_t runs = 0;
  double threshold = 0.0;
};

/// P patterns of N i.i.d. fair +-1 entries. Throws InputError if P > N.
PatternSet sample_patterns(std::size_t p, std::size_t n, std::uint64_t seed);

SpinState initial_state(const PatternSet& patterns, const InitialCondition& init, Rng& rng);

/// Glauber: 1 / (1 + exp(beta dH)); Metropolis: min(1, exp(-beta dH)).
double acceptance_probability(UpdateRule rule, double beta, double delta_h);

/// N random-scan single-site update attempts. Returns the number of accepted flips.
std::size_t sweep(SpinState& state, const PatternSet& patterns, const ModelKind& kind, double beta,
                  UpdateRule rule, Rng& rng);

/// Initialise, run `equilibration_sweeps`, then record the overlaps after each
/// of `measurement_sweeps` sweeps. Deterministic in (kind, patterns, config).
TrajectoryStats run_trajectory(const ModelKind& kind, const PatternSet& patterns,
                               const DynamicsConfig& config);

/// Pure-state criterion: the largest |m_mu| is at least `threshold` and every
/// other |m_nu| is at most 1 - threshold.
bool is_pure_state(const OverlapVector& m, double threshold);

/// Quenched average of the time-averaged observable over `runs` pattern draws
/// for each beta. Run r uses the same patterns at every beta; seeds derive
/// from `config.seed`. `config.beta` is ignored.
std::vector<CurvePoint> measure_overlap_curve(const ModelKind& kind, std::size_t n, std::size_t p,
                                              std::span<const double> betas, std::size_t runs,
                                              const DynamicsConfig& config, unsigned workers = 0,
                                              CurveObservable observable = CurveObservable::FirstPattern);

/// Fraction of runs whose final state is a pure state. Threshold in (0.5, 1].
std::vector<RetrievalPoint> retrieval_frequency(const ModelKind& kind, std::size_t n, std::size_t p,
                                                std::span<const double> betas, std::size_t runs,
                                                double threshold, const DynamicsConfig& config,
                                                unsigned workers = 0);

/// Pooled estimate of N <m_1^2> in the ergodic phase. Throws DomainError for
/// beta >= 1 and InputError for runs < 2.
RescaledFluctuation overlap_fluctuations(const ModelKind& kind, std::size_t n, std::size_t p,
                                         double beta, std::size_t runs, const DynamicsConfig& config,
                                         unsigned workers = 0);

}  // namespace relhop
