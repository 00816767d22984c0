#include "relhop/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "relhop/error.hpp"
#include "relhop/parallel.hpp"
#include "relhop/stats.hpp"

namespace relhop {

namespace {

// Stream tags for derive_seed.
enum : std::uint64_t { kPatternStream = 1, kDynamicsStream = 2 };

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::size_t parse_pattern_index(std::string_view s) {
  const auto k = parse_number<std::size_t>(s);
  if (!k || *k == 0) throw InputError("initial condition: pattern index must be a positive integer");
  return *k - 1;
}

void check_grid(std::span<const double> betas) {
  if (betas.empty()) throw InputError("beta grid is empty");
  for (double b : betas)
    if (!(b >= 0.0)) throw InputError("beta grid: values must be >= 0");
}

}  // namespace

UpdateRule parse_update_rule(std::string_view text) {
  if (text == "glauber") return UpdateRule::Glauber;
  if (text == "metropolis") return UpdateRule::Metropolis;
  throw InputError("unknown update rule '" + std::string(text) + "' (expected glauber or metropolis)");
}

std::string to_string(UpdateRule rule) {
  return rule == UpdateRule::Glauber ? "glauber" : "metropolis";
}

CurveObservable parse_curve_observable(std::string_view text) {
  if (text == "m1") return CurveObservable::FirstPattern;
  if (text == "retrieved") return CurveObservable::RetrievedPattern;
  throw InputError("unknown observable '" + std::string(text) + "' (expected m1 or retrieved)");
}

std::string to_string(CurveObservable observable) {
  return observable == CurveObservable::FirstPattern ? "m1" : "retrieved";
}

InitialCondition parse_initial_condition(std::string_view text) {
  if (text == "random") return RandomInit{};
  if (text.starts_with("pattern:")) return PatternInit{parse_pattern_index(text.substr(8))};
  if (text.starts_with("corrupted:")) {
    const auto rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos)
      throw InputError("initial condition: expected corrupted:K:FRACTION");
    const auto fraction = parse_number<double>(rest.substr(colon + 1));
    if (!fraction) throw InputError("initial condition: bad corruption fraction");
    return CorruptedInit{parse_pattern_index(rest.substr(0, colon)), *fraction};
  }
  throw InputError("unknown initial condition '" + std::string(text) +
                   "' (expected random, pattern:K or corrupted:K:F)");
}

std::string to_string(const InitialCondition& init) {
  if (std::holds_alternative<RandomInit>(init)) return "random";
  if (const auto* p = std::get_if<PatternInit>(&init)) return "pattern:" + std::to_string(p->pattern + 1);
  const auto& c = std::get<CorruptedInit>(init);
  char fraction[32];
  const auto [end, ec] = std::to_chars(fraction, fraction + sizeof fraction, c.flip_fraction);
  return "corrupted:" + std::to_string(c.pattern + 1) + ":" + std::string(fraction, ec == std::errc() ? end : fraction);
}

void DynamicsConfig::validate() const {
  if (std::isnan(beta) || beta < 0.0) throw InputError("beta must be >= 0 (or inf for zero noise)");
  if (measurement_sweeps < 1) throw InputError("measurement sweeps must be >= 1");
  if (const auto* c = std::get_if<CorruptedInit>(&init)) {
    if (!(c->flip_fraction >= 0.0 && c->flip_fraction <= 0.5))
      throw InputError("corruption fraction must lie in [0, 0.5]");
  }
}

PatternSet sample_patterns(std::size_t p, std::size_t n, std::uint64_t seed) {
  if (p < 1 || n < 1) throw InputError("sample_patterns: need P >= 1 and N >= 1");
  if (p > n) throw InputError("sample_patterns: P > N rejected (low-storage regime)");
  Rng rng(seed);
  std::vector<Spin> rows(p * n);
  for (auto& v : rows) v = static_cast<Spin>(rng.sign());
  return PatternSet(p, n, rows);
}

SpinState initial_state(const PatternSet& patterns, const InitialCondition& init, Rng& rng) {
  const std::size_t n = patterns.site_count();
  if (std::holds_alternative<RandomInit>(init)) {
    std::vector<Spin> spins(n);
    for (auto& s : spins) s = static_cast<Spin>(rng.sign());
    return SpinState(std::move(spins), patterns);
  }
  if (const auto* p = std::get_if<PatternInit>(&init)) return SpinState::aligned(patterns, p->pattern);

  const auto& c = std::get<CorruptedInit>(init);
  if (!(c.flip_fraction >= 0.0 && c.flip_fraction <= 0.5))
    throw InputError("corruption fraction must lie in [0, 0.5]");
  auto state = SpinState::aligned(patterns, c.pattern);
  const auto flips = static_cast<std::size_t>(std::floor(c.flip_fraction * static_cast<double>(n) + 0.5));
  // Partial Fisher-Yates: the first `flips` entries are a uniform random subset.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = 0; k < flips; ++k) {
    const std::size_t j = k + rng.below(n - k);
    std::swap(order[k], order[j]);
    state.flip(order[k], patterns);
  }
  return state;
}

double acceptance_probability(UpdateRule rule, double beta, double delta_h) {
  if (std::isinf(beta)) return delta_h < 0.0 ? 1.0 : 0.0;
  if (rule == UpdateRule::Glauber) return 1.0 / (1.0 + std::exp(beta * delta_h));
  return delta_h <= 0.0 ? 1.0 : std::exp(-beta * delta_h);
}

std::size_t sweep(SpinState& state, const PatternSet& patterns, const ModelKind& kind, double beta,
                  UpdateRule rule, Rng& rng) {
  const std::size_t n = state.size();
  if (n != patterns.site_count() || state.overlap_sums().size() != patterns.pattern_count())
    throw InputError("sweep: state and pattern dimensions differ");
  const double nd = static_cast<double>(n);
  const double inv_n2 = 1.0 / (nd * nd);
  std::size_t accepted = 0;
  for (std::size_t attempt = 0; attempt < n; ++attempt) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    const double x_old = static_cast<double>(state.overlap_sum_sq()) * inv_n2;
    const double x_new = static_cast<double>(state.overlap_sum_sq_after_flip(i, patterns)) * inv_n2;
    const double dh = nd * energy_density_change(kind, x_old, x_new);
    const double p = acceptance_probability(rule, beta, dh);
    const bool accept = p >= 1.0 ? true : (p <= 0.0 ? false : rng.uniform() < p);
    if (accept) {
      state.flip(i, patterns);
      ++accepted;
    }
  }
  return accepted;
}

TrajectoryStats run_trajectory(const ModelKind& kind, const PatternSet& patterns,
                               const DynamicsConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SpinState state = initial_state(patterns, config.init, rng);

  for (std::size_t s = 0; s < config.equilibration_sweeps; ++s)
    sweep(state, patterns, kind, config.beta, config.rule, rng);

  const std::size_t p = patterns.pattern_count();
  std::vector<RunningMoments> moments(p);
  RunningMoments retrieved;
  std::size_t accepted = 0;
  for (std::size_t s = 0; s < config.measurement_sweeps; ++s) {
    accepted += sweep(state, patterns, kind, config.beta, config.rule, rng);
    double best = 0.0;
    for (std::size_t mu = 0; mu < p; ++mu) {
      const double m = state.overlap(mu);
      moments[mu].add(m);
      best = std::max(best, std::abs(m));
    }
    retrieved.add(best);
  }

  std::vector<double> means(p);
  std::vector<double> variances(p);
  for (std::size_t mu = 0; mu < p; ++mu) {
    // Clamp guards the [-1, 1] invariant against rounding in the running mean.
    means[mu] = std::clamp(moments[mu].mean(), -1.0, 1.0);
    variances[mu] = moments[mu].variance();
  }
  const double attempts = static_cast<double>(config.measurement_sweeps) * static_cast<double>(state.size());
  return TrajectoryStats{OverlapVector(std::move(means)), std::move(variances),
                         std::clamp(retrieved.mean(), 0.0, 1.0), static_cast<double>(accepted) / attempts,
                         std::move(state)};
}

bool is_pure_state(const OverlapVector& m, double threshold) {
  if (m.size() == 0) return false;
  std::size_t best = 0;
  for (std::size_t mu = 1; mu < m.size(); ++mu)
    if (std::abs(m[mu]) > std::abs(m[best])) best = mu;
  // Overlaps are multiples of 2/N, so values equal to a threshold are common;
  // the slack keeps 1 - 0.9 from rounding below 0.1.
  constexpr double kSlack = 1e-12;
  if (std::abs(m[best]) < threshold - kSlack) return false;
  for (std::size_t mu = 0; mu < m.size(); ++mu)
    if (mu != best && std::abs(m[mu]) > 1.0 - threshold + kSlack) return false;
  return true;
}

std::vector<CurvePoint> measure_overlap_curve(const ModelKind& kind, std::size_t n, std::size_t p,
                                              std::span<const double> betas, std::size_t runs,
                                              const DynamicsConfig& config, unsigned workers,
                                              CurveObservable observable) {
  check_grid(betas);
  if (runs < 1) throw InputError("runs must be >= 1");
  config.validate();

  std::vector<PatternSet> draws;
  draws.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r)
    draws.push_back(sample_patterns(p, n, derive_seed(config.seed, {kPatternStream, r})));

  std::vector<double> m1(betas.size() * runs);
  parallel_for(m1.size(), workers, [&](std::size_t cell) {
    const std::size_t b = cell / runs;
    const std::size_t r = cell % runs;
    DynamicsConfig c = config;
    c.beta = betas[b];
    c.seed = derive_seed(config.seed, {kDynamicsStream, b, r});
    const auto stats = run_trajectory(kind, draws[r], c);
    m1[cell] = observable == CurveObservable::FirstPattern ? stats.mean_overlaps[0] : stats.mean_retrieved_overlap;
  });

  std::vector<CurvePoint> out;
  out.reserve(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const auto est = mean_with_error(std::span<const double>(m1).subspan(b * runs, runs));
    out.push_back({betas[b], est.value, est.standard_error, runs});
  }
  return out;
}

std::vector<RetrievalPoint> retrieval_frequency(const ModelKind& kind, std::size_t n, std::size_t p,
                                                std::span<const double> betas, std::size_t runs,
                                                double threshold, const DynamicsConfig& config,
                                                unsigned workers) {
  check_grid(betas);
  if (runs < 1) throw InputError("runs must be >= 1");
  if (!(threshold > 0.5 && threshold <= 1.0)) throw InputError("threshold must lie in (0.5, 1]");
  config.validate();

  std::vector<PatternSet> draws;
  draws.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r)
    draws.push_back(sample_patterns(p, n, derive_seed(config.seed, {kPatternStream, r})));

  std::vector<char> hit(betas.size() * runs, 0);
  parallel_for(hit.size(), workers, [&](std::size_t cell) {
    const std::size_t b = cell / runs;
    const std::size_t r = cell % runs;
    DynamicsConfig c = config;
    c.beta = betas[b];
    c.seed = derive_seed(config.seed, {kDynamicsStream, b, r});
    const auto stats = run_trajectory(kind, draws[r], c);
    hit[cell] = is_pure_state(stats.final_state.overlaps(), threshold) ? 1 : 0;
  });

  std::vector<RetrievalPoint> out;
  out.reserve(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < runs; ++r) count += static_cast<std::size_t>(hit[b * runs + r]);
    const double f = static_cast<double>(count) / static_cast<double>(runs);
    out.push_back({betas[b], f, std::sqrt(f * (1.0 - f) / static_cast<double>(runs)), runs, threshold});
  }
  return out;
}

RescaledFluctuation overlap_fluctuations(const ModelKind& kind, std::size_t n, std::size_t p,
                                         double beta, std::size_t runs, const DynamicsConfig& config,
                                         unsigned workers) {
  if (!(beta < 1.0)) throw DomainError("overlap fluctuations: beta >= 1 is outside the ergodic region");
  if (runs < 2) throw InputError("overlap fluctuations: need at least 2 runs for a jackknife error");
  DynamicsConfig base = config;
  base.beta = beta;
  base.validate();

  std::vector<double> per_run(runs);
  const double nd = static_cast<double>(n);
  parallel_for(runs, workers, [&](std::size_t r) {
    const auto patterns = sample_patterns(p, n, derive_seed(config.seed, {kPatternStream, r}));
    DynamicsConfig c = base;
    c.seed = derive_seed(config.seed, {kDynamicsStream, r});
    const auto stats = run_trajectory(kind, patterns, c);
    const double m = stats.mean_overlaps[0];
    per_run[r] = nd * (stats.overlap_variance[0] + m * m);
  });
  const auto est = jackknife_mean(per_run);
  return {est.value, est.standard_error};
}

}  // namespace relhop
