#ifndef UEEOPT_OUTER_HPP
#define UEEOPT_OUTER_HPP

#include "ueeopt/inner.hpp"
#include "ueeopt/kkt.hpp"
#include "ueeopt/model.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace ueeopt {

struct NewtonConfig {
  Real xi = 0.5;       // line-search shrink factor, in (0,1)
  Real epsilon = 0.01; // sufficient-decrease constant, in (0,1)
  Real phi_tol = 1e-6; // stop when ||phi||_2 <= phi_tol * sqrt(2N)
  int max_outer = 100;
  int max_linesearch = 60;
  RootConfig inner_cfg{};
  bool fault_flip_sigma = false; // test hook: negate one search direction

  void validate() const {
    if (!(xi > 0 && xi < 1)) throw DomainError("NewtonConfig: xi must lie in (0,1)");
    if (!(epsilon > 0 && epsilon < 1)) throw DomainError("NewtonConfig: epsilon must lie in (0,1)");
    if (!(phi_tol > 0)) throw DomainError("NewtonConfig: phi_tol must be > 0");
    if (max_outer < 1 || max_linesearch < 0) throw DomainError("NewtonConfig: bad iteration caps");
  }
};

struct NewtonState {
  DualParams dual;
  ArrayX phi1; // -F(p#, B#) + beta (p# + p_cir), per user
  ArrayX phi2; // -1 + nu (p# + p_cir), per user
  Real phi_norm = 0;
  InnerSolution inner;
  int iteration = 0;
  std::vector<int> j_history;
};

struct Direction {
  ArrayX sigma1;
  ArrayX sigma2;
};

enum class SolveStatus { kConverged, kMaxIter, kError };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kError: return "error";
  }
  return "unknown";
}

struct SolveReport {
  Allocation allocation;
  Real objective = 0;
  ArrayX per_user_uee;
  int outer_iterations = 0;
  std::vector<double> phi_norm_trace;
  Real kkt_residual = 0;
  Real wall_time = 0; // seconds
  SolveStatus status = SolveStatus::kError;
  std::string message;
  // extras for diagnostics and certification
  DualParams dual;
  Real lambda_sharp = 0;
  ArrayX tau;
  long inner_solves = 0;
  std::vector<int> j_history;
};

/// Default strictly feasible start: equal bandwidth split with every rate
/// at twice its floor.
inline Allocation default_initial_allocation(const ProblemInstance& inst) {
  const Index n = inst.n();
  Allocation a;
  a.p.resize(n);
  a.b.resize(n);
  for (Index i = 0; i < n; ++i) {
    const UserParams& u = inst.users[i];
    const Real b = inst.b_total / static_cast<Real>(n);
    a.b[i] = b;
    a.p[i] = (std::exp2(2.0 * u.r_min / b) - 1.0) * u.sigma2 * b / u.g;
  }
  return a;
}

/// Multipliers matching a feasible allocation: beta the weighted utility
/// per consumed power, nu the reciprocal consumed power.
inline DualParams init_dual(const ProblemInstance& inst, const Allocation& a0) {
  const auto feas = check_feasible(a0, inst);
  if (!feas.is_feasible) throw DomainError("init_dual: initial allocation is infeasible");
  const Index n = inst.n();
  ArrayX beta(n), nu(n);
  for (Index i = 0; i < n; ++i) {
    const UserParams& u = inst.users[i];
    const Real denom = a0.p[i] + u.p_cir;
    const Real rs = secrecy_rate(a0.p[i], a0.b[i], u);
    beta[i] = u.c * utility_eval(u.utility, std::max(rs, 0.0)) / denom;
    nu[i] = 1.0 / denom;
  }
  return DualParams(std::move(beta), std::move(nu));
}

struct PhiEval {
  ArrayX phi1;
  ArrayX phi2;
  InnerSolution inner;
  Real norm = 0;
};

/// Solve the subproblem at (beta, nu) and evaluate the root system whose
/// zero characterizes the optimum: phi1 = -F + beta (p# + p_cir),
/// phi2 = -1 + nu (p# + p_cir).
inline PhiEval eval_phi(const ProblemInstance& inst, const DualParams& dual,
                        const RootConfig& cfg) {
  PhiEval ev;
  ev.inner = solve_p3(inst, dual, cfg);
  const Index n = inst.n();
  ev.phi1.resize(n);
  ev.phi2.resize(n);
  for (Index i = 0; i < n; ++i) {
    const UserParams& u = inst.users[i];
    const Real p = ev.inner.allocation.p[i];
    const Real b = ev.inner.allocation.b[i];
    const Real f = u.c * utility_eval(u.utility, std::max(secrecy_rate(p, b, u), 0.0));
    ev.phi1[i] = -f + dual.beta[i] * (p + u.p_cir);
    ev.phi2[i] = -1.0 + dual.nu[i] * (p + u.p_cir);
  }
  ev.norm = std::sqrt(ev.phi1.square().sum() + ev.phi2.square().sum());
  return ev;
}

/// Newton step for the diagonal Jacobian approximation: both partial
/// derivatives of the root system equal p# + p_cir, so the step is
/// sigma = -phi / (p# + p_cir) componentwise.
inline Direction newton_direction(const NewtonState& state, const ProblemInstance& inst) {
  const Index n = inst.n();
  Direction dir;
  dir.sigma1.resize(n);
  dir.sigma2.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Real denom = state.inner.allocation.p[i] + inst.users[i].p_cir;
    dir.sigma1[i] = -state.phi1[i] / denom;
    dir.sigma2[i] = -state.phi2[i] / denom;
  }
  return dir;
}

struct LineSearchResult {
  int j = 0;
  DualParams dual;
  PhiEval eval;
  long trials = 0;
};

/// Geometric line search: the smallest J with
///   ||phi(beta + xi^J s1, nu + xi^J s2)|| <= (1 - xi^J eps) ||phi||.
/// Trials that would push a multiplier nonpositive count as failed, as do
/// steps so short they no longer move the iterate in floating point (else
/// a non-descent direction would be "accepted" with zero progress).
/// Throws SolverError when max_linesearch is exhausted.
inline LineSearchResult line_search(const ProblemInstance& inst, const NewtonState& state,
                                    const Direction& dir, const NewtonConfig& cfg) {
  Real step = 1.0;
  LineSearchResult res;
  for (int j = 0; j <= cfg.max_linesearch; ++j, step *= cfg.xi) {
    ArrayX beta = state.dual.beta + step * dir.sigma1;
    ArrayX nu = state.dual.nu + step * dir.sigma2;
    if ((beta <= 0).any() || (nu <= 0).any()) continue; // positivity guard
    if ((beta == state.dual.beta).all() && (nu == state.dual.nu).all()) break; // step underflowed
    DualParams trial(std::move(beta), std::move(nu));
    PhiEval ev = eval_phi(inst, trial, cfg.inner_cfg);
    ++res.trials;
    if (ev.norm <= (1.0 - step * cfg.epsilon) * state.phi_norm) {
      res.j = j;
      res.dual = std::move(trial);
      res.eval = std::move(ev);
      return res;
    }
  }
  throw SolverError("line_search: no step satisfied the decrease condition within " +
                    std::to_string(cfg.max_linesearch) + " trials (the search direction fails "
                    "sufficient decrease; best iterate retained)");
}

/// Damped-Newton driver for the weighted sum-UEE problem. Feasible start,
/// multipliers initialized from it, then repeated subproblem solves with
/// the geometric line search until the root system is small.
inline SolveReport solve(const ProblemInstance& inst, const NewtonConfig& cfg = {}) {
  inst.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = inst.n();
  const Real target = cfg.phi_tol * std::sqrt(2.0 * static_cast<Real>(n));

  SolveReport rep;
  auto finalize = [&](const NewtonState& state, SolveStatus status, const std::string& msg) {
    rep.status = status;
    rep.message = msg;
    rep.allocation = state.inner.allocation;
    rep.dual = state.dual;
    rep.lambda_sharp = state.inner.lambda_sharp;
    rep.outer_iterations = state.iteration;
    rep.j_history = state.j_history;
    rep.per_user_uee.resize(n);
    for (Index i = 0; i < n; ++i)
      rep.per_user_uee[i] = uee(state.inner.allocation.p[i], state.inner.allocation.b[i],
                                inst.users[i]);
    rep.objective = weighted_sum_uee(state.inner.allocation, inst);
    const KktReport kkt = kkt_residuals(inst, state.inner.allocation, state.dual,
                                        state.inner.lambda_sharp);
    rep.kkt_residual = kkt.max_residual;
    rep.tau = kkt.tau;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  NewtonState state;
  try {
    const Allocation a0 = default_initial_allocation(inst);
    state.dual = init_dual(inst, a0);
    PhiEval ev = eval_phi(inst, state.dual, cfg.inner_cfg);
    ++rep.inner_solves;
    state.phi1 = std::move(ev.phi1);
    state.phi2 = std::move(ev.phi2);
    state.inner = std::move(ev.inner);
    state.phi_norm = ev.norm;
    rep.phi_norm_trace.push_back(state.phi_norm);

    while (true) {
      if (state.phi_norm <= target) {
        finalize(state, SolveStatus::kConverged, "");
        return rep;
      }
      if (state.iteration >= cfg.max_outer) {
        finalize(state, SolveStatus::kMaxIter,
                 "no convergence within " + std::to_string(cfg.max_outer) + " outer iterations");
        return rep;
      }
      Direction dir = newton_direction(state, inst);
      if (cfg.fault_flip_sigma) dir.sigma2 = -dir.sigma2;
      LineSearchResult ls = line_search(inst, state, dir, cfg);
      rep.inner_solves += ls.trials;
      state.dual = std::move(ls.dual);
      state.phi1 = std::move(ls.eval.phi1);
      state.phi2 = std::move(ls.eval.phi2);
      state.inner = std::move(ls.eval.inner);
      state.phi_norm = ls.eval.norm;
      state.j_history.push_back(ls.j);
      ++state.iteration;
      rep.phi_norm_trace.push_back(state.phi_norm);
    }
  } catch (const std::exception& e) {
    if (state.phi1.size() == n && state.inner.allocation.p.size() == n) {
      finalize(state, SolveStatus::kError, e.what());
      return rep;
    }
    throw; // failed before any usable iterate existed
  }
}

} // namespace ueeopt

#endif
