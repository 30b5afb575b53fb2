#ifndef UEEOPT_BASELINES_HPP
#define UEEOPT_BASELINES_HPP

#include "ueeopt/lambert.hpp"
#include "ueeopt/model.hpp"
#include "ueeopt/outer.hpp"
#include "ueeopt/roots.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace ueeopt {

struct BaselineConfig {
  Real fixed_power = 1e-3; // W, the bandwidth-only baseline's per-user power
  Real ao_rel_tol = 1e-4;  // alternating optimization stop threshold
  int ao_max_rounds = 200;
  RootConfig root_cfg{};

  void validate() const {
    if (!(fixed_power > 0)) throw DomainError("BaselineConfig: fixed_power must be > 0");
    if (!(ao_rel_tol > 0)) throw DomainError("BaselineConfig: ao_rel_tol must be > 0");
    if (ao_max_rounds < 1) throw DomainError("BaselineConfig: ao_max_rounds must be >= 1");
  }
};

/// The power reaching the rate floor at bandwidth b:
/// p_min = (2^{r_min/b} - 1) sigma2 b / g.
inline Real p_min_for(Real b, const UserParams& u) {
  if (!(b > 0)) throw DomainError("p_min_for: b must be > 0");
  return (std::exp2(u.r_min / b) - 1.0) * u.sigma2 * b / u.g;
}

namespace detail {

// d r / d p at fixed bandwidth, times (p + p_cir)
inline Real rate_power_slope_term(Real p, Real b, const UserParams& u) {
  return u.g * b / ((u.sigma2 * b + u.g * p) * kLn2) * (p + u.p_cir);
}

inline Real golden_power_opt(const UserParams& u, Real b, Real p_min) {
  auto objective = [&](Real p) {
    try {
      return uee(p, b, u);
    } catch (const DomainError&) {
      return -std::numeric_limits<Real>::infinity(); // utility undefined at the floor
    }
  };
  const Real step = std::max(p_min, u.p_cir) * 0.5 + 1e-18;
  const Real hi = bracket_unimodal_max(objective, p_min, step);
  const Real p = golden_section_max(objective, p_min, hi, 1e-13, 300);
  return std::max(p, p_min);
}

// Type 1, b >= 1: stationary p solves
//   ln(b + a r_s(p)) = W(a g B (p + p_cir) / ((sigma2 B + g p) ln 2)).
// Negative left of the stationary point, positive right of it.
inline Real type1_stationary(const UserParams& u, Real b, Real p_min) {
  const UtilitySpec& s = u.utility;
  auto h = [&](Real p) {
    const Real rs = std::max(secrecy_rate(p, b, u), 0.0);
    return std::log(s.b + s.a * rs) - lambert_w0(s.a * rate_power_slope_term(p, b, u));
  };
  if (h(p_min) >= 0) return p_min;
  return find_upcrossing(h, p_min, 2.0 * std::max(p_min, u.p_cir), 1e-13);
}

// Type 2 (any c): stationary p solves e^{a r_s - c} - 1 = a r'(p) (p + p_cir),
// the chi-form fixed-point equation evaluated in p for accuracy.
inline Real type2_stationary(const UserParams& u, Real b, Real p_min) {
  const UtilitySpec& s = u.utility;
  auto q = [&](Real p) {
    const Real rs = std::max(secrecy_rate(p, b, u), 0.0);
    return std::expm1(s.a * rs - s.c) - s.a * rate_power_slope_term(p, b, u);
  };
  if (q(p_min) >= 0) return p_min;
  return find_upcrossing(q, p_min, 2.0 * std::max(p_min, u.p_cir), 1e-13);
}

// Type 3 with d = 0: closed form via the Lambert W,
//   chi = exp(a + r_e ln2/B + W((a g p_cir/(sigma2 B) - a) e^{-a - r_e ln2/B})),
//   p   = (chi - 1) sigma2 B / g.
inline Real type3_stationary(const UserParams& u, Real b) {
  const UtilitySpec& s = u.utility;
  const Real c0 = s.a + u.r_e * kLn2 / b;
  // analytically >= -1/e for a in (0,1); clamp the rounding margin
  const Real arg = std::max((s.a * u.g * u.p_cir / (u.sigma2 * b) - s.a) * std::exp(-c0), -kInvE);
  const Real chi = std::exp(c0 + lambert_w0(arg));
  return (chi - 1.0) * u.sigma2 * b / u.g;
}

} // namespace detail

/// Best transmit power for one user at fixed bandwidth: the larger of the
/// floor power and the interior stationary point. Closed forms cover the
/// three families in their simulation parameterizations; anything else is
/// handled by golden section on a doubled bracket.
inline Real optimize_power_given_bandwidth(const UserParams& u, Real b) {
  const Real p_min = p_min_for(b, u);
  const UtilitySpec& s = u.utility;
  switch (s.family) {
    case UtilityFamily::kType1:
      if (s.b >= 1.0) return std::max(p_min, detail::type1_stationary(u, b, p_min));
      break;
    case UtilityFamily::kType2:
      return std::max(p_min, detail::type2_stationary(u, b, p_min));
    case UtilityFamily::kType3:
      if (s.d == 0.0) return std::max(p_min, detail::type3_stationary(u, b));
      break;
    case UtilityFamily::kCustom:
      break;
  }
  return detail::golden_power_opt(u, b, p_min);
}

/// Baseline: equal bandwidth split, per-user power optimization.
inline SolveReport optimize_power_only(const ProblemInstance& inst) {
  inst.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = inst.n();
  SolveReport rep;
  rep.allocation.p.resize(n);
  rep.allocation.b.resize(n);
  rep.per_user_uee.resize(n);
  const Real b = inst.b_total / static_cast<Real>(n);
  for (Index i = 0; i < n; ++i) {
    rep.allocation.b[i] = b;
    rep.allocation.p[i] = optimize_power_given_bandwidth(inst.users[i], b);
    rep.per_user_uee[i] = uee(rep.allocation.p[i], b, inst.users[i]);
  }
  rep.objective = weighted_sum_uee(rep.allocation, inst);
  rep.status = SolveStatus::kConverged;
  rep.outer_iterations = 0;
  rep.kkt_residual = std::numeric_limits<Real>::quiet_NaN();
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace detail {

// bandwidth reaching the rate floor at fixed power; the rate saturates at
// g p / (sigma2 ln 2) as B grows, so the floor may be unreachable
inline Real b_min_for(Real p, const UserParams& u) {
  const Real rate_sup = u.g * p / (u.sigma2 * kLn2);
  if (!(rate_sup > u.r_min))
    throw SolverError("bandwidth-only: fixed power cannot reach the rate floor (rate limit " +
                      std::to_string(rate_sup) + " bit/s < r_min)");
  auto h = [&](Real b) { return rate(p, b, u) - u.r_min; };
  return find_upcrossing(h, 0.0, u.r_min, 1e-12);
}

// weighted marginal utility of bandwidth c * d/dB [f(r_s)/(p+p_cir)]
inline Real bandwidth_gradient(Real b, Real p, const UserParams& u) {
  const Real theta = u.g * p / (u.sigma2 * b);
  const Real rs = std::max(secrecy_rate(p, b, u), 0.0);
  const Real slope = (std::log1p(theta) - theta / (1.0 + theta)) / kLn2;
  return u.c * utility_deriv(u.utility, rs) * slope / (p + u.p_cir);
}

// max{B_hat(zeta), B_min}: the price-implied bandwidth, clamped at the floor
inline Real bandwidth_demand_at(Real zeta, Real p, Real b_min, const UserParams& u,
                                const RootConfig& cfg) {
  Real grad_floor;
  try {
    grad_floor = bandwidth_gradient(b_min * (1.0 + 1e-12), p, u);
  } catch (const DomainError&) {
    grad_floor = std::numeric_limits<Real>::infinity(); // f' unbounded at the floor
  }
  if (!(grad_floor > zeta)) return b_min;
  RootConfig c = cfg;
  c.initial_guess = std::max(b_min, 1.0);
  const Real t = find_root_decreasing(
      [&](Real dt) { return bandwidth_gradient(b_min + dt, p, u); }, zeta, c);
  return b_min + t;
}

} // namespace detail

/// Baseline: bandwidths from the fixed-power KKT system. Per-user floors
/// from rate inversion, then the bandwidth price zeta found by bisection on
/// the aggregate demand, then a proportional scale so the budget binds.
inline SolveReport optimize_bandwidth_only(const ProblemInstance& inst, const ArrayX& p_fixed,
                                           const RootConfig& root_cfg = {}) {
  inst.validate();
  if (p_fixed.size() != inst.n())
    throw DomainError("optimize_bandwidth_only: p_fixed dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = inst.n();

  ArrayX b_min(n);
  for (Index i = 0; i < n; ++i) {
    if (!(p_fixed[i] > 0)) throw DomainError("optimize_bandwidth_only: powers must be positive");
    b_min[i] = detail::b_min_for(p_fixed[i], inst.users[i]);
  }

  // price scale from the marginal utility at an equal split
  Real log_scale = 0;
  for (Index i = 0; i < n; ++i) {
    const Real b_ref = std::max(inst.b_total / static_cast<Real>(n), b_min[i] * (1.0 + 1e-9));
    log_scale += std::log(detail::bandwidth_gradient(b_ref, p_fixed[i], inst.users[i]));
  }
  RootConfig zeta_cfg = root_cfg;
  zeta_cfg.initial_guess = std::exp(log_scale / static_cast<Real>(n));

  auto demand = [&](Real zeta) {
    Real sum = 0;
    for (Index i = 0; i < n; ++i)
      sum += detail::bandwidth_demand_at(zeta, p_fixed[i], b_min[i], inst.users[i], root_cfg);
    return sum;
  };
  const Real zeta = find_root_decreasing(demand, inst.b_total, zeta_cfg);

  SolveReport rep;
  rep.allocation.p = p_fixed;
  rep.allocation.b.resize(n);
  Real total = 0;
  for (Index i = 0; i < n; ++i) {
    rep.allocation.b[i] =
        detail::bandwidth_demand_at(zeta, p_fixed[i], b_min[i], inst.users[i], root_cfg);
    total += rep.allocation.b[i];
  }
  rep.allocation.b *= inst.b_total / total;
  rep.per_user_uee.resize(n);
  for (Index i = 0; i < n; ++i)
    rep.per_user_uee[i] = uee(rep.allocation.p[i], rep.allocation.b[i], inst.users[i]);
  rep.objective = weighted_sum_uee(rep.allocation, inst);
  rep.status = SolveStatus::kConverged;
  rep.outer_iterations = 0;
  rep.kkt_residual = std::numeric_limits<Real>::quiet_NaN();
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Baseline: rounds of power-only (at the current bandwidths) then
/// bandwidth-only (at the current powers) from the default feasible start,
/// until the relative objective improvement falls under ao_rel_tol.
inline SolveReport alternating(const ProblemInstance& inst, const BaselineConfig& cfg = {}) {
  inst.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = inst.n();

  Allocation a = default_initial_allocation(inst);
  Real obj = weighted_sum_uee(a, inst);
  int rounds = 0;
  for (; rounds < cfg.ao_max_rounds; ++rounds) {
    for (Index i = 0; i < n; ++i)
      a.p[i] = optimize_power_given_bandwidth(inst.users[i], a.b[i]);
    const SolveReport bstep = optimize_bandwidth_only(inst, a.p, cfg.root_cfg);
    a.b = bstep.allocation.b;
    const Real next = weighted_sum_uee(a, inst);
    const bool converged = next - obj < cfg.ao_rel_tol * std::abs(obj);
    obj = next;
    if (converged) {
      ++rounds;
      break;
    }
  }

  SolveReport rep;
  rep.allocation = a;
  rep.objective = obj;
  rep.per_user_uee.resize(n);
  for (Index i = 0; i < n; ++i)
    rep.per_user_uee[i] = uee(a.p[i], a.b[i], inst.users[i]);
  rep.outer_iterations = rounds;
  rep.status = SolveStatus::kConverged;
  rep.kkt_residual = std::numeric_limits<Real>::quiet_NaN();
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

} // namespace ueeopt

#endif
