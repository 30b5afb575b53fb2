#ifndef UEEOPT_ROOTS_HPP
#define UEEOPT_ROOTS_HPP

#include "ueeopt/types.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace ueeopt {

struct RootConfig {
  Real abs_tol = 0.0;
  Real rel_tol = 1e-9;
  int max_iter = 200;
  Real initial_guess = 1.0; // starting point for bracket doubling

  void validate() const {
    if (!(abs_tol >= 0) || !(rel_tol >= 0) || !(abs_tol + rel_tol > 0))
      throw DomainError("RootConfig: tolerances must be positive");
    if (max_iter < 1) throw DomainError("RootConfig: max_iter must be >= 1");
    if (!(initial_guess > 0) || !std::isfinite(initial_guess))
      throw DomainError("RootConfig: initial_guess must be positive and finite");
  }
};

/// Solve f(lambda) = target for a non-increasing f on (0, inf).
///
/// The caller guarantees f exceeds `target` as lambda -> 0+ and falls below
/// it as lambda -> inf. Lower bound starts at 0 (never evaluated there; f may
/// diverge), the upper bound is found by doubling from cfg.initial_guess,
/// then bisection. The returned point lies on the low side of the target:
/// f(lambda) <= target, within the value tolerance
/// abs_tol + rel_tol*|target| or, where evaluation noise near a steep
/// crossing makes that unreachable, with the bracket collapsed to
/// floating-point resolution around the crossing.
inline Real find_root_decreasing(const std::function<Real(Real)>& f, Real target,
                                 const RootConfig& cfg) {
  cfg.validate();
  const Real tol = cfg.abs_tol + cfg.rel_tol * std::abs(target);
  constexpr Real eps = std::numeric_limits<Real>::epsilon();

  auto eval = [&](Real x) {
    const Real v = f(x);
    if (std::isnan(v)) throw SolverError("find_root_decreasing: f(" + std::to_string(x) + ") is not finite");
    return v;
  };

  Real lo = 0.0;
  Real hi = cfg.initial_guess;
  Real fhi = eval(hi);
  int doublings = 0;
  while (fhi > target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > cfg.max_iter || !std::isfinite(hi))
      throw SolverError("find_root_decreasing: failed to bracket the target by doubling");
    fhi = eval(hi);
  }

  bool collapsed = false;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (target - fhi <= tol) break;
    if (hi - lo <= 4.0 * eps * hi) {
      collapsed = true;
      break;
    }
    const Real mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      collapsed = true;
      break;
    }
    const Real fm = eval(mid);
    if (fm > target) {
      lo = mid;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  if (!(fhi <= target) || (target - fhi > tol && !collapsed))
    throw SolverError("find_root_decreasing: bisection did not reach tolerance");
  return hi;
}

/// Root of a function h that crosses zero once from below on (lo, inf):
/// h < 0 left of the root, h > 0 right of it. `lo` itself is never
/// evaluated (h may be singular or exactly zero there). Returns a point
/// within rel_tol of the crossing.
inline Real find_upcrossing(const std::function<Real(Real)>& h, Real lo, Real guess,
                            Real rel_tol = 1e-12, int max_iter = 400) {
  if (!(guess > lo)) guess = lo > 0 ? 2.0 * lo : 1.0;
  Real hi = guess;
  Real lo_b = lo;
  int it = 0;
  while (true) {
    const Real v = h(hi);
    if (std::isnan(v)) throw SolverError("find_upcrossing: non-finite evaluation");
    if (v >= 0) break;
    lo_b = hi;
    hi = lo > 0 ? lo + 2.0 * (hi - lo) : 2.0 * hi;
    if (++it > max_iter || !std::isfinite(hi))
      throw SolverError("find_upcrossing: failed to bracket a sign change");
  }
  for (it = 0; it < max_iter; ++it) {
    const Real mid = 0.5 * (lo_b + hi);
    if (mid <= lo_b || mid >= hi) break;
    if (hi - lo_b <= rel_tol * std::abs(hi)) break;
    if (h(mid) < 0)
      lo_b = mid;
    else
      hi = mid;
  }
  return hi;
}

/// Golden-section maximization of a unimodal f on [lo, hi].
inline Real golden_section_max(const std::function<Real(Real)>& f, Real lo, Real hi,
                               Real rel_tol = 1e-12, int max_iter = 200) {
  constexpr Real invphi = 0.6180339887498949;
  Real a = lo, b = hi;
  Real c = b - invphi * (b - a);
  Real d = a + invphi * (b - a);
  Real fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > rel_tol * (std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Bracket the maximum of a function that increases from `lo` and eventually
/// decreases (unimodal on [lo, inf)), by doubling the step from `lo`.
/// Returns an upper end point past the maximizer.
inline Real bracket_unimodal_max(const std::function<Real(Real)>& f, Real lo,
                                 Real initial_step, int max_iter = 200) {
  Real prev = lo;
  Real cur = lo + initial_step;
  Real fprev = f(lo);
  Real fcur = f(cur);
  int it = 0;
  while (fcur >= fprev) {
    prev = cur;
    fprev = fcur;
    cur = lo + 2.0 * (cur - lo);
    if (++it > max_iter || !std::isfinite(cur))
      throw SolverError("bracket_unimodal_max: no decrease found");
    fcur = f(cur);
  }
  return cur;
}

} // namespace ueeopt

#endif
