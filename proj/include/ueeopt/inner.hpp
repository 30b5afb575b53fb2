#ifndef UEEOPT_INNER_HPP
#define UEEOPT_INNER_HPP

#include "ueeopt/lambert.hpp"
#include "ueeopt/model.hpp"
#include "ueeopt/roots.hpp"
#include "ueeopt/types.hpp"

#include <cassert>
#include <cmath>
#include <vector>

namespace ueeopt {

/// The fixed multipliers (beta, nu) under which the parametric subproblem
/// is solved. Both are strictly positive: nu is 1/(p + p_cir) of some
/// allocation and beta a positive utility-per-power ratio.
struct DualParams {
  ArrayX beta;
  ArrayX nu;

  DualParams() = default;
  DualParams(ArrayX beta_in, ArrayX nu_in) : beta(std::move(beta_in)), nu(std::move(nu_in)) {
    validate();
  }

  void validate() const {
    if (beta.size() != nu.size()) throw DomainError("DualParams: beta/nu size mismatch");
    for (Index i = 0; i < beta.size(); ++i) {
      if (!(beta[i] > 0) || !std::isfinite(beta[i]))
        throw DomainError("DualParams: beta must be strictly positive (bad utility domain at "
                          "initialization?)");
      if (!(nu[i] > 0) || !std::isfinite(nu[i]))
        throw DomainError("DualParams: nu must be strictly positive");
    }
  }
};

/// Closed-form solution of the subproblem at fixed (beta, nu): bandwidths,
/// powers, the bandwidth price lambda and the per-user quantities behind
/// them. binding_min_rate marks users whose rate sits on the r_min floor.
struct InnerSolution {
  Allocation allocation;
  Real lambda_sharp = 0;
  ArrayX gamma; // bit/s, the price-implied target rate (clamped at r_e)
  ArrayX psi;   // dimensionless SNR g p / (sigma2 B)
  std::vector<bool> binding_min_rate;
};

/// Optimal per-user SNR as a function of the bandwidth price lambda:
///   psi = exp(1 + W((1/e) (g lambda / (nu beta sigma2) - 1))) - 1.
/// Equivalently the root of (1+psi) ln(1+psi) - psi = g lambda / (nu beta sigma2).
inline Real psi(Real lambda, const UserParams& u, Real beta_n, Real nu_n) {
  if (std::isnan(lambda) || lambda < 0) throw DomainError("psi: lambda must be >= 0");
  if (!(beta_n > 0) || !(nu_n > 0) || !std::isfinite(beta_n) || !std::isfinite(nu_n))
    throw DomainError("psi: beta and nu must be positive and finite");
  const Real t = u.g * lambda / (nu_n * beta_n * u.sigma2);
  if (!std::isfinite(t)) throw DomainError("psi: non-finite price ratio");
  // scale by the same 1/e constant as the W domain check so t = 0 maps
  // exactly onto the branch point
  const Real w = lambert_w0((t - 1.0) * kInvE);
  const Real value = std::expm1(1.0 + w);
#ifndef NDEBUG
  if (value > 1e-8 && value < 1e12) {
    const Real resid = (1.0 + value) * std::log1p(value) - value - t;
    assert(std::abs(resid) <= 1e-8 * std::max(1.0, t));
  }
#endif
  return value;
}

namespace detail {

struct UserPoint {
  Real psi;
  Real gamma;
  Real bandwidth;
};

// psi, gamma and the bandwidth demand share one W evaluation
inline UserPoint user_point(Real lambda, const UserParams& u, Real beta_n, Real nu_n) {
  UserPoint pt;
  pt.psi = ueeopt::psi(lambda, u, beta_n, nu_n);
  const Real v = beta_n * u.sigma2 * (1.0 + pt.psi) * kLn2 / (u.c * u.g);
  pt.gamma = u.r_e + utility_deriv_inverse(u.utility, v).value_or(0.0);
  pt.bandwidth = std::max(pt.gamma, u.r_min) * kLn2 / std::log1p(pt.psi);
  return pt;
}

} // namespace detail

/// Rate implied by the utility derivative at the current price, clamped at
/// r_e when the derivative equation has no nonnegative solution.
inline Real gamma_rate(Real lambda, const UserParams& u, Real beta_n, Real nu_n) {
  const Real ps = psi(lambda, u, beta_n, nu_n);
  const Real v = beta_n * u.sigma2 * (1.0 + ps) * detail::kLn2 / (u.c * u.g);
  const auto xi = utility_deriv_inverse(u.utility, v);
  return u.r_e + xi.value_or(0.0);
}

/// Bandwidth demand max{gamma, r_min} / log2(1 + psi) at price lambda > 0.
/// Diverges as lambda -> 0+ and vanishes as lambda -> inf.
inline Real bandwidth_at(Real lambda, const UserParams& u, Real beta_n, Real nu_n) {
  if (!(lambda > 0)) throw DomainError("bandwidth_at: lambda must be > 0");
  return detail::user_point(lambda, u, beta_n, nu_n).bandwidth;
}

/// Aggregate bandwidth demand at price lambda.
inline Real total_bandwidth_at(Real lambda, const ProblemInstance& inst, const DualParams& dual) {
  if (!(lambda > 0)) throw DomainError("total_bandwidth_at: lambda must be > 0");
  Real sum = 0;
  for (Index i = 0; i < inst.n(); ++i)
    sum += detail::user_point(lambda, inst.users[i], dual.beta[i], dual.nu[i]).bandwidth;
  return sum;
}

/// Globally optimal solution of the fixed-(beta, nu) subproblem.
///
/// lambda# is located by bracket-doubling bisection on the aggregate demand
/// (strictly decreasing for strictly concave utilities), stopping one-sided
/// with demand <= b_total within rel_tol. The residual slack is then
/// redistributed proportionally so the bandwidths sum to b_total exactly,
/// with powers recomputed to keep each psi fixed.
inline InnerSolution solve_p3(const ProblemInstance& inst, const DualParams& dual,
                              const RootConfig& cfg) {
  inst.validate();
  dual.validate();
  const Index n = inst.n();
  if (dual.beta.size() != n) throw DomainError("solve_p3: dual dimensions do not match instance");

  // start the doubling near the unit price ratio: geometric mean of
  // nu beta sigma2 / g across users
  Real log_scale = 0;
  for (Index i = 0; i < n; ++i)
    log_scale += std::log(dual.nu[i] * dual.beta[i] * inst.users[i].sigma2 / inst.users[i].g);
  RootConfig lam_cfg = cfg;
  lam_cfg.initial_guess = std::exp(log_scale / static_cast<Real>(n));

  const Real lambda = find_root_decreasing(
      [&](Real lam) { return total_bandwidth_at(lam, inst, dual); }, inst.b_total, lam_cfg);

  InnerSolution sol;
  sol.lambda_sharp = lambda;
  sol.gamma.resize(n);
  sol.psi.resize(n);
  sol.binding_min_rate.resize(static_cast<std::size_t>(n));
  sol.allocation.p.resize(n);
  sol.allocation.b.resize(n);

  Real demand = 0;
  for (Index i = 0; i < n; ++i) {
    const UserParams& u = inst.users[i];
    const auto pt = detail::user_point(lambda, u, dual.beta[i], dual.nu[i]);
    sol.psi[i] = pt.psi;
    sol.gamma[i] = pt.gamma;
    sol.binding_min_rate[static_cast<std::size_t>(i)] = pt.gamma < u.r_min;
    sol.allocation.b[i] = pt.bandwidth;
    demand += pt.bandwidth;
  }
  // one-sided stop leaves demand <= b_total; scale up so the budget binds
  const Real scale = inst.b_total / demand;
  for (Index i = 0; i < n; ++i) {
    sol.allocation.b[i] *= scale;
    sol.allocation.p[i] =
        inst.users[i].sigma2 * sol.allocation.b[i] * sol.psi[i] / inst.users[i].g;
  }
  return sol;
}

} // namespace ueeopt

#endif
