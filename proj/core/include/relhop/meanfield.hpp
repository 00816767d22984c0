#pragma once

// Thermodynamic-limit (mean-field) description: self-consistency maps,
// damped fixed-point solver, free energies, critical scan and the
// ergodic-phase fluctuation law.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "relhop/model.hpp"

namespace relhop {

/// Largest P for which averages over the 2^P sign vectors are enumerated.
inline constexpr std::size_t kMaxEnumeratedPatterns = 20;

/// Exact average of f over all 2^P equiprobable xi in {-1,+1}^P. Terms are
/// summed in (xi, -xi) pairs, so odd integrands cancel exactly.
/// Throws InputError for P = 0 or P > kMaxEnumeratedPatterns.
double xi_expectation(const std::function<double(std::span<const double>)>& f, std::size_t p);

/// Component mu: < xi^mu tanh(beta xi . M) >_xi.
OverlapVector rhs_classical(const OverlapVector& m, double beta);

/// Component mu: < xi^mu tanh(beta xi . M / sqrt(1 + ||M||^2)) >_xi.
OverlapVector rhs_relativistic(const OverlapVector& m, double beta);

/// psi_mu = M_mu / sqrt(1 + ||M||^2); the field felt by each neuron in the
/// relativistic mean-field description. ||psi|| < 1.
std::vector<double> effective_field(const OverlapVector& m);

class SelfConsistencyProblem {
 public:
  /// Throws InputError for truncated kinds, P = 0, or beta < 0.
  SelfConsistencyProblem(ModelKind kind, std::size_t p, double beta);

  const ModelKind& kind() const noexcept { return kind_; }
  std::size_t pattern_count() const noexcept { return p_; }
  double beta() const noexcept { return beta_; }

  OverlapVector rhs(const OverlapVector& m) const;

 private:
  ModelKind kind_;
  std::size_t p_;
  double beta_;
};

struct SolverOptions {
  double damping = 0.5;
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;

  void validate() const;
};

struct FixedPointResult {
  OverlapVector m;
  double residual = 0.0;  // sup-norm of m - rhs(m)
  std::size_t iterations = 0;
  bool converged = false;
};

/// Damped iteration M <- (1 - d) M + d rhs(M). Stops once the sup-norm
/// residual is at most the tolerance and so is the estimated distance to the
/// fixed point, d * residual / (1 - rate), where rate is the observed ratio
/// of successive residuals. Non-convergence is reported, not thrown.
FixedPointResult solve_fixed_point(const SelfConsistencyProblem& problem, const OverlapVector& m0,
                                   const SolverOptions& options = {});

/// ln 2 + < ln cosh(beta xi . M) >_xi - (beta/2) ||M||^2, in the (1/N) E ln Z
/// convention.
double free_energy_classical(const OverlapVector& m, double beta);

/// ln 2 + < ln cosh(beta xi . M / sqrt(1+||M||^2)) >_xi + beta / sqrt(1+||M||^2).
double free_energy_relativistic(const OverlapVector& m, double beta);

/// Dispatch on kind; throws InputError for truncated kinds.
double free_energy(const ModelKind& kind, const OverlapVector& m, double beta);

/// Central-difference gradient of free_energy with respect to M.
std::vector<double> free_energy_gradient(const ModelKind& kind, const OverlapVector& m, double beta,
                                         double step = 1e-6);

struct ScanRow {
  double beta = 0.0;
  double norm = 0.0;  // ||M*||
  std::size_t iterations = 0;
  bool converged = false;
  bool ordered = false;  // ||M*|| > 10 * tolerance
};

struct CriticalScan {
  std::vector<ScanRow> rows;
  std::optional<double> beta_c;  // empty when no zero -> nonzero bracket exists
};

/// Solve from the pure-state start M0 = (0.9, 0, ..., 0) at each beta of an
/// ascending grid; beta_c is the midpoint of the first zero -> nonzero step.
CriticalScan critical_scan(const ModelKind& kind, std::span<const double> betas, std::size_t p,
                           const SolverOptions& options = {});

/// Ergodic-phase rescaled overlap fluctuation 1 / (1 - beta). Throws
/// DomainError for beta >= 1, where the fluctuations diverge.
double fluctuation_theory(double beta);

}  // namespace relhop
