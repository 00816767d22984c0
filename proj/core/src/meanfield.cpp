#include "relhop/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "relhop/error.hpp"

namespace relhop {

namespace {

void check_pattern_count(std::size_t p) {
  if (p == 0) throw InputError("xi average: need P >= 1");
  if (p > kMaxEnumeratedPatterns)
    throw InputError("xi average: P = " + std::to_string(p) + " exceeds the enumeration limit of " +
                     std::to_string(kMaxEnumeratedPatterns));
}

// Fills xi (length P) from the bits of mask.
void sign_vector(std::size_t mask, std::span<double> xi) {
  for (std::size_t mu = 0; mu < xi.size(); ++mu) xi[mu] = ((mask >> mu) & 1U) != 0 ? -1.0 : 1.0;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm_sq(std::span<const double> m) { return dot(m, m); }

// Odd-symmetric by construction: tanh(-x) == -tanh(x) bit for bit.
double odd_tanh(double x) { return std::copysign(std::tanh(std::abs(x)), x); }

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// < xi^mu tanh(gain * xi . m) >_xi for every mu, enumerating (xi, -xi) pairs.
std::vector<double> tanh_map(std::span<const double> m, double gain) {
  const std::size_t p = m.size();
  check_pattern_count(p);
  const std::size_t half = std::size_t{1} << (p - 1);
  std::vector<double> out(p, 0.0);
  std::vector<double> xi(p);
  for (std::size_t mask = 0; mask < half; ++mask) {
    sign_vector(mask, xi);
    const double t = odd_tanh(gain * dot(xi, m));
    // The partner -xi contributes (-xi^mu) tanh(-...) = xi^mu t.
    for (std::size_t mu = 0; mu < p; ++mu) out[mu] += xi[mu] * t;
  }
  for (auto& v : out) v /= static_cast<double>(half);
  return out;
}

double mean_log_cosh(std::span<const double> m, double gain) {
  const std::size_t p = m.size();
  check_pattern_count(p);
  const std::size_t half = std::size_t{1} << (p - 1);
  std::vector<double> xi(p);
  double total = 0.0;
  for (std::size_t mask = 0; mask < half; ++mask) {
    sign_vector(mask, xi);
    total += log_cosh(gain * dot(xi, m));
  }
  return total / static_cast<double>(half);
}

double free_energy_classical_raw(std::span<const double> m, double beta) {
  return std::numbers::ln2 + mean_log_cosh(m, beta) - 0.5 * beta * norm_sq(m);
}

double free_energy_relativistic_raw(std::span<const double> m, double beta) {
  const double root = std::sqrt(1.0 + norm_sq(m));
  return std::numbers::ln2 + mean_log_cosh(m, beta / root) + beta / root;
}

OverlapVector clamp_to_cube(std::vector<double> v) {
  for (auto& x : v) x = std::clamp(x, -1.0, 1.0);
  return OverlapVector(std::move(v));
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || std::isinf(beta)) throw InputError("beta must be finite and >= 0");
}

}  // namespace

double xi_expectation(const std::function<double(std::span<const double>)>& f, std::size_t p) {
  check_pattern_count(p);
  const std::size_t half = std::size_t{1} << (p - 1);
  std::vector<double> xi(p);
  std::vector<double> minus(p);
  double total = 0.0;
  for (std::size_t mask = 0; mask < half; ++mask) {
    sign_vector(mask, xi);
    for (std::size_t mu = 0; mu < p; ++mu) minus[mu] = -xi[mu];
    total += f(xi) + f(minus);
  }
  return total / static_cast<double>(2 * half);
}

OverlapVector rhs_classical(const OverlapVector& m, double beta) {
  check_beta(beta);
  return clamp_to_cube(tanh_map(m.values(), beta));
}

OverlapVector rhs_relativistic(const OverlapVector& m, double beta) {
  check_beta(beta);
  return clamp_to_cube(tanh_map(m.values(), beta / std::sqrt(1.0 + m.norm_sq())));
}

std::vector<double> effective_field(const OverlapVector& m) {
  const double root = std::sqrt(1.0 + m.norm_sq());
  std::vector<double> psi(m.size());
  for (std::size_t mu = 0; mu < m.size(); ++mu) psi[mu] = m[mu] / root;
  return psi;
}

// ---------------------------------------------------------------------------

SelfConsistencyProblem::SelfConsistencyProblem(ModelKind kind, std::size_t p, double beta)
    : kind_(kind), p_(p), beta_(beta) {
  if (kind_.family() == ModelKind::Family::Truncated)
    throw InputError("self-consistency: no closed equation for the truncated model");
  check_pattern_count(p_);
  check_beta(beta_);
}

OverlapVector SelfConsistencyProblem::rhs(const OverlapVector& m) const {
  if (m.size() != p_) throw InputError("self-consistency: M has wrong dimension");
  return kind_.family() == ModelKind::Family::Classical ? rhs_classical(m, beta_)
                                                        : rhs_relativistic(m, beta_);
}

void SolverOptions::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw InputError("damping must lie in (0, 1]");
  if (!(tolerance > 0.0)) throw InputError("tolerance must be positive");
}

FixedPointResult solve_fixed_point(const SelfConsistencyProblem& problem, const OverlapVector& m0,
                                   const SolverOptions& options) {
  options.validate();
  if (m0.size() != problem.pattern_count()) throw InputError("solver: M0 has wrong dimension");

  const std::size_t p = m0.size();
  OverlapVector m = m0;
  double residual = 0.0;
  double previous = 0.0;
  for (std::size_t it = 0;; ++it) {
    const OverlapVector r = problem.rhs(m);
    residual = 0.0;
    for (std::size_t mu = 0; mu < p; ++mu) residual = std::max(residual, std::abs(m[mu] - r[mu]));
    // Distance to the fixed point ~ damping * residual / (1 - rate), with the
    // rate read off successive residuals. A small residual alone is not enough
    // when the map is barely contracting.
    if (residual == 0.0) return {m, residual, it, true};
    if (it > 0 && residual <= options.tolerance) {
      const double rate = std::clamp(residual / previous, 0.0, 0.999);
      if (options.damping * residual <= options.tolerance * (1.0 - rate)) return {m, residual, it, true};
    }
    previous = residual;
    if (it == options.max_iterations) return {m, residual, it, false};
    std::vector<double> next(p);
    for (std::size_t mu = 0; mu < p; ++mu)
      next[mu] = (1.0 - options.damping) * m[mu] + options.damping * r[mu];
    m = clamp_to_cube(std::move(next));
  }
}

// ---------------------------------------------------------------------------

double free_energy_classical(const OverlapVector& m, double beta) {
  check_beta(beta);
  return free_energy_classical_raw(m.values(), beta);
}

double free_energy_relativistic(const OverlapVector& m, double beta) {
  check_beta(beta);
  return free_energy_relativistic_raw(m.values(), beta);
}

double free_energy(const ModelKind& kind, const OverlapVector& m, double beta) {
  switch (kind.family()) {
    case ModelKind::Family::Classical: return free_energy_classical(m, beta);
    case ModelKind::Family::Relativistic: return free_energy_relativistic(m, beta);
    case ModelKind::Family::Truncated: break;
  }
  throw InputError("free energy: no closed expression for the truncated model");
}

std::vector<double> free_energy_gradient(const ModelKind& kind, const OverlapVector& m, double beta,
                                         double step) {
  check_beta(beta);
  if (kind.family() == ModelKind::Family::Truncated)
    throw InputError("free energy: no closed expression for the truncated model");
  auto f = [&](std::span<const double> v) {
    return kind.family() == ModelKind::Family::Classical ? free_energy_classical_raw(v, beta)
                                                         : free_energy_relativistic_raw(v, beta);
  };
  std::vector<double> grad(m.size());
  std::vector<double> v(m.begin(), m.end());
  for (std::size_t mu = 0; mu < m.size(); ++mu) {
    const double base = v[mu];
    v[mu] = base + step;
    const double up = f(v);
    v[mu] = base - step;
    const double down = f(v);
    v[mu] = base;
    grad[mu] = (up - down) / (2.0 * step);
  }
  return grad;
}

CriticalScan critical_scan(const ModelKind& kind, std::span<const double> betas, std::size_t p,
                           const SolverOptions& options) {
  if (betas.size() < 2) throw InputError("critical scan: need at least two beta values");
  for (std::size_t k = 1; k < betas.size(); ++k)
    if (!(betas[k] > betas[k - 1])) throw InputError("critical scan: beta grid must be ascending");

  std::vector<double> start(p, 0.0);
  start[0] = 0.9;
  const OverlapVector m0(start);

  CriticalScan scan;
  scan.rows.reserve(betas.size());
  for (double beta : betas) {
    const auto result = solve_fixed_point(SelfConsistencyProblem(kind, p, beta), m0, options);
    const double norm = result.m.norm();
    scan.rows.push_back({beta, norm, result.iterations, result.converged, norm > 10.0 * options.tolerance});
  }
  const auto first = std::find_if(scan.rows.begin(), scan.rows.end(), [](const ScanRow& r) { return r.ordered; });
  if (first != scan.rows.end() && first != scan.rows.begin())
    scan.beta_c = 0.5 * (first->beta + std::prev(first)->beta);
  return scan;
}

double fluctuation_theory(double beta) {
  if (!(beta < 1.0)) throw DomainError("fluctuation law: divergent fluctuations at or above criticality (beta >= 1)");
  if (beta < 0.0) throw InputError("beta must be >= 0");
  return 1.0 / (1.0 - beta);
}

}  // namespace relhop
