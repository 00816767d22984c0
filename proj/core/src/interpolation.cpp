#include "relhop/interpolation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "relhop/error.hpp"
#include "relhop/parallel.hpp"
#include "relhop/random.hpp"

namespace relhop {

namespace {

/// Streaming log-sum-exp of weights w with an optional weighted observable.
class LogSumExp {
 public:
  void add(double w, double f = 0.0) {
    if (w > max_) {
      const double scale = std::exp(max_ - w);  // 0 on the first call
      sum_ = sum_ * scale + 1.0;
      sum_f_ = sum_f_ * scale + f;
      max_ = w;
    } else {
      const double e = std::exp(w - max_);
      sum_ += e;
      sum_f_ += e * f;
    }
  }
  double log_sum() const { return max_ + std::log(sum_); }
  double mean() const { return sum_f_ / sum_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double sum_f_ = 0.0;
};

/// Visits all 2^N configurations in Gray-code order starting from sigma = +1,
/// calling visit(s1, s2) with the integer overlap sums of sites [0, N1) and
/// [N1, N). Each step flips one spin and costs O(P).
template <class Visit>
void for_each_configuration(PatternView xi, std::size_t n1, Visit&& visit) {
  const std::size_t n = xi.site_count();
  const std::size_t p = xi.pattern_count();
  std::vector<std::int64_t> s1(p, 0);
  std::vector<std::int64_t> s2(p, 0);
  std::vector<Spin> sigma(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = i < n1 ? s1 : s2;
    const auto site = xi.site(i);
    for (std::size_t mu = 0; mu < p; ++mu) s[mu] += site[mu];
  }
  visit(std::span<const std::int64_t>(s1), std::span<const std::int64_t>(s2));
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto i = static_cast<std::size_t>(std::countr_zero(k));
    auto& s = i < n1 ? s1 : s2;
    const auto site = xi.site(i);
    const std::int64_t old = sigma[i];
    for (std::size_t mu = 0; mu < p; ++mu) s[mu] -= 2 * site[mu] * old;
    sigma[i] = static_cast<Spin>(-old);
    visit(std::span<const std::int64_t>(s1), std::span<const std::int64_t>(s2));
  }
}

std::int64_t sum_sq(std::span<const std::int64_t> s) {
  std::int64_t out = 0;
  for (auto v : s) out += v * v;
  return out;
}

std::int64_t combined_sum_sq(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  std::int64_t out = 0;
  for (std::size_t mu = 0; mu < a.size(); ++mu) out += (a[mu] + b[mu]) * (a[mu] + b[mu]);
  return out;
}

// size * sqrt(1 + ||S / size||^2)
double scaled_root(std::int64_t s2, std::size_t size) {
  const auto n = static_cast<double>(size);
  return n * std::sqrt(1.0 + static_cast<double>(s2) / (n * n));
}

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolation parameter t must lie in [0, 1]");
}

struct InterpolationSums {
  double log_sum = 0.0;
  double mean_derivative = 0.0;
};

InterpolationSums interpolate(const PatternSet& patterns, const SplitSpec& split, double t, double beta) {
  if (patterns.site_count() != split.n()) throw InputError("interpolation: split does not match N");
  if (split.n() > kMaxInterpolatedSites)
    throw InputError("interpolation: N = " + std::to_string(split.n()) + " exceeds the enumeration limit of " +
                     std::to_string(kMaxInterpolatedSites));
  check_t(t);
  if (!(beta >= 0.0) || std::isinf(beta)) throw InputError("beta must be finite and >= 0");
  const auto n = static_cast<double>(split.n());
  LogSumExp acc;
  for_each_configuration(patterns.view(), split.n1(),
                         [&](std::span<const std::int64_t> s1, std::span<const std::int64_t> s2) {
                           const double whole = scaled_root(combined_sum_sq(s1, s2), split.n());
                           const double parts =
                               scaled_root(sum_sq(s1), split.n1()) + scaled_root(sum_sq(s2), split.n2());
                           const double phi = beta * (t * whole + (1.0 - t) * parts);
                           // whole/N - rho1 f(m1) - rho2 f(m2) = (whole - parts) / N
                           acc.add(phi, beta * (whole - parts) / n);
                         });
  return {acc.log_sum(), acc.mean()};
}

void check_t_grid(std::span<const double> grid) {
  if (grid.size() < 3) throw InputError("t grid needs at least 3 points");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    check_t(grid[k]);
    if (k > 0 && !(grid[k] > grid[k - 1])) throw InputError("t grid must be strictly ascending");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double exact_log_partition(const ModelKind& kind, PatternView patterns, double beta) {
  const std::size_t n = patterns.site_count();
  if (n > kMaxEnumeratedSites)
    throw InputError("exact_log_partition: N = " + std::to_string(n) + " exceeds the enumeration limit of " +
                     std::to_string(kMaxEnumeratedSites));
  if (!(beta >= 0.0) || std::isinf(beta)) throw InputError("beta must be finite and >= 0");
  const double nd = static_cast<double>(n);
  const double inv_n2 = 1.0 / (nd * nd);
  LogSumExp acc;
  for_each_configuration(patterns, n, [&](std::span<const std::int64_t> s, std::span<const std::int64_t>) {
    acc.add(-beta * nd * energy_density(kind, static_cast<double>(sum_sq(s)) * inv_n2));
  });
  return acc.log_sum();
}

double exact_log_partition(const ModelKind& kind, const PatternSet& patterns, double beta) {
  return exact_log_partition(kind, patterns.view(), beta);
}

Estimate quenched_free_energy(const ModelKind& kind, std::size_t n, std::size_t p, double beta,
                              std::size_t samples, std::uint64_t seed, unsigned workers) {
  if (samples < 1) throw InputError("quenched free energy: need at least one sample");
  if (n > kMaxEnumeratedSites) throw InputError("quenched free energy: N exceeds the enumeration limit");
  std::vector<double> alpha(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    const auto patterns = sample_patterns(p, n, derive_seed(seed, {s}));
    alpha[s] = exact_log_partition(kind, patterns, beta) / static_cast<double>(n);
  });
  return mean_with_error(alpha);
}

SplitSpec::SplitSpec(std::size_t n, std::size_t n1) : n_(n), n1_(n1) {
  if (n < 2 || n1 < 1 || n1 >= n)
    throw InputError("split: need 1 <= N1 <= N - 1 (N = " + std::to_string(n) + ", N1 = " + std::to_string(n1) + ")");
}

double interpolating_alpha(const PatternSet& patterns, const SplitSpec& split, double t, double beta) {
  return interpolate(patterns, split, t, beta).log_sum / static_cast<double>(split.n());
}

double interpolating_alpha_derivative(const PatternSet& patterns, const SplitSpec& split, double t,
                                      double beta) {
  return interpolate(patterns, split, t, beta).mean_derivative;
}

InterpolationReport check_t_monotonicity(std::size_t n, std::size_t n1, std::size_t p,
                                         std::span<const double> t_grid, std::size_t samples,
                                         std::uint64_t seed, double beta, unsigned workers) {
  const SplitSpec split(n, n1);
  check_t_grid(t_grid);
  if (samples < 1) throw InputError("monotonicity check: need at least one sample");

  const std::size_t k = t_grid.size();
  std::vector<double> alpha(samples * k);
  std::vector<double> deriv(samples * k);
  parallel_for(samples, workers, [&](std::size_t s) {
    const auto patterns = sample_patterns(p, n, derive_seed(seed, {s}));
    double* a = alpha.data() + s * k;
    double* d = deriv.data() + s * k;
    for (std::size_t j = 0; j < k; ++j) a[j] = interpolating_alpha(patterns, split, t_grid[j], beta);
    d[0] = (a[1] - a[0]) / (t_grid[1] - t_grid[0]);
    for (std::size_t j = 1; j + 1 < k; ++j) d[j] = (a[j + 1] - a[j - 1]) / (t_grid[j + 1] - t_grid[j - 1]);
    d[k - 1] = (a[k - 1] - a[k - 2]) / (t_grid[k - 1] - t_grid[k - 2]);
  });

  InterpolationReport report;
  report.t_grid.assign(t_grid.begin(), t_grid.end());
  report.alpha_t.assign(k, 0.0);
  report.derivative_estimates.assign(k, 0.0);
  report.samples = samples;
  report.slack = 1e-8 * static_cast<double>(n);
  report.max_derivative = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < k; ++j) {
      report.alpha_t[j] += alpha[s * k + j] / static_cast<double>(samples);
      report.derivative_estimates[j] += deriv[s * k + j] / static_cast<double>(samples);
      if (deriv[s * k + j] > report.max_derivative) {
        report.max_derivative = deriv[s * k + j];
        report.worst_sample = s;
      }
    }
  }
  report.worst_seed = derive_seed(seed, {report.worst_sample});
  report.monotone = report.max_derivative <= report.slack;
  return report;
}

SubadditivityReport check_subadditivity(const ModelKind& kind, std::size_t n, std::size_t p, double beta,
                                        std::size_t samples, std::uint64_t seed, unsigned workers) {
  if (n < 2) throw InputError("sub-additivity check: need N >= 2");
  if (n > kMaxInterpolatedSites) throw InputError("sub-additivity check: N exceeds the enumeration limit of 20");
  if (samples < 1) throw InputError("sub-additivity check: need at least one sample");

  const std::size_t splits = n - 1;
  std::vector<double> margins(samples * splits);
  parallel_for(samples, workers, [&](std::size_t s) {
    const auto patterns = sample_patterns(p, n, derive_seed(seed, {s}));
    const auto view = patterns.view();
    const double whole = exact_log_partition(kind, view, beta);
    for (std::size_t n1 = 1; n1 < n; ++n1) {
      const double first = exact_log_partition(kind, view.sites(0, n1), beta);
      const double second = exact_log_partition(kind, view.sites(n1, n - n1), beta);
      margins[s * splits + (n1 - 1)] = whole - (first + second);
    }
  });

  SubadditivityReport report;
  report.samples = samples;
  report.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < margins.size(); ++idx) {
    if (margins[idx] > report.max_margin) {
      report.max_margin = margins[idx];
      report.worst_sample = idx / splits;
      report.worst_split = idx % splits + 1;
    }
  }
  report.worst_seed = derive_seed(seed, {report.worst_sample});
  report.all_nonpositive = report.max_margin <= kSubadditivitySlack;
  report.margins = std::move(margins);
  return report;
}

double convexity_gap(std::span<const double> m1, std::span<const double> m2, double rho) {
  if (m1.size() != m2.size()) throw InputError("convexity gap: overlap vectors differ in length");
  double mixed = 0.0;
  double a = 0.0;
  double b = 0.0;
  for (std::size_t mu = 0; mu < m1.size(); ++mu) {
    const double v = rho * m1[mu] + (1.0 - rho) * m2[mu];
    mixed += v * v;
    a += m1[mu] * m1[mu];
    b += m2[mu] * m2[mu];
  }
  return std::sqrt(1.0 + mixed) - rho * std::sqrt(1.0 + a) - (1.0 - rho) * std::sqrt(1.0 + b);
}

ConvexityReport check_sqrt_convexity(std::size_t resolution, std::size_t p, unsigned workers) {
  if (resolution < 2) throw InputError("convexity check: resolution must be >= 2");
  if (p < 1 || p > 3) throw InputError("convexity check: P must be 1, 2 or 3");

  std::vector<double> axis(resolution);
  for (std::size_t k = 0; k < resolution; ++k)
    axis[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(resolution - 1);
  std::vector<double> rhos(resolution);
  for (std::size_t k = 0; k < resolution; ++k)
    rhos[k] = static_cast<double>(k + 1) / static_cast<double>(resolution + 1);

  std::size_t points = 1;
  for (std::size_t mu = 0; mu < p; ++mu) points *= resolution;
  // Point j of the grid: component mu is axis[(j / resolution^mu) % resolution].
  std::vector<double> grid(points * p);
  std::vector<double> root(points);
  for (std::size_t j = 0; j < points; ++j) {
    std::size_t rest = j;
    double sq = 0.0;
    for (std::size_t mu = 0; mu < p; ++mu) {
      grid[j * p + mu] = axis[rest % resolution];
      rest /= resolution;
      sq += grid[j * p + mu] * grid[j * p + mu];
    }
    root[j] = std::sqrt(1.0 + sq);
  }

  struct Worst {
    double gap = -std::numeric_limits<double>::infinity();
    std::size_t a = 0, b = 0, r = 0;
  };
  std::vector<Worst> per_row(points);
  parallel_for(points, workers, [&](std::size_t a) {
    Worst w;
    const double* ma = grid.data() + a * p;
    for (std::size_t b = 0; b < points; ++b) {
      const double* mb = grid.data() + b * p;
      for (std::size_t r = 0; r < resolution; ++r) {
        const double rho = rhos[r];
        double mixed = 0.0;
        for (std::size_t mu = 0; mu < p; ++mu) {
          const double v = rho * ma[mu] + (1.0 - rho) * mb[mu];
          mixed += v * v;
        }
        const double gap = std::sqrt(1.0 + mixed) - rho * root[a] - (1.0 - rho) * root[b];
        if (gap > w.gap) w = {gap, a, b, r};
      }
    }
    per_row[a] = w;
  });

  Worst best;
  for (const auto& w : per_row)
    if (w.gap > best.gap) best = w;
  ConvexityReport report;
  report.max_violation = best.gap;
  report.worst_m1.assign(grid.begin() + static_cast<std::ptrdiff_t>(best.a * p),
                         grid.begin() + static_cast<std::ptrdiff_t>((best.a + 1) * p));
  report.worst_m2.assign(grid.begin() + static_cast<std::ptrdiff_t>(best.b * p),
                         grid.begin() + static_cast<std::ptrdiff_t>((best.b + 1) * p));
  report.worst_rho = rhos[best.r];
  report.evaluations = points * points * resolution;
  return report;
}

std::vector<FluctuationRow> check_fluctuation_interpolation(std::size_t n, std::size_t p, double beta,
                                                            std::span<const double> t_grid,
                                                            std::size_t runs, const DynamicsConfig& mc,
                                                            unsigned workers) {
  if (!(beta < 1.0)) throw DomainError("fluctuation interpolation: beta >= 1 is outside the ergodic region");
  if (beta < 0.0) throw InputError("beta must be >= 0");
  if (t_grid.empty()) throw InputError("t grid is empty");
  for (double t : t_grid) check_t(t);

  std::vector<FluctuationRow> rows;
  rows.reserve(t_grid.size());
  if (n <= kMaxInterpolatedSites) {
    const auto patterns = sample_patterns(p, n, derive_seed(mc.seed, {0}));
    const double nd = static_cast<double>(n);
    for (double t : t_grid) {
      LogSumExp acc;
      for_each_configuration(patterns.view(), n, [&](std::span<const std::int64_t> s, std::span<const std::int64_t>) {
        const double m1 = static_cast<double>(s[0]) / nd;
        acc.add(t * beta * scaled_root(sum_sq(s), n), nd * m1 * m1);
      });
      rows.push_back({t, acc.mean(), 0.0, 1.0 / (1.0 - beta * t), true});
    }
    return rows;
  }
  for (double t : t_grid) {
    const auto est = overlap_fluctuations(ModelKind::relativistic(), n, p, beta * t, runs, mc, workers);
    rows.push_back({t, est.value, est.standard_error, 1.0 / (1.0 - beta * t), false});
  }
  return rows;
}

}  // namespace relhop
