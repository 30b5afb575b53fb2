#ifndef UEEOPT_MODEL_HPP
#define UEEOPT_MODEL_HPP

#include "ueeopt/types.hpp"
#include "ueeopt/utility.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace ueeopt {

/// Channel, security and economic parameters of one user.
/// All quantities are SI: gains linear, powers in W, rates in bit/s,
/// noise PSD in W/Hz. dBm/dB conversion happens at scenario ingestion only.
struct UserParams {
  Real g = 1.0;      // channel gain (linear)
  Real sigma2 = 1.0; // noise power spectral density (W/Hz)
  Real p_cir = 1.0;  // circuit power (W)
  Real r_min = 1.0;  // minimum rate (bit/s)
  Real r_e = 0.0;    // eavesdropper rate (bit/s)
  Real c = 1.0;      // priority weight
  UtilitySpec utility{};

  void validate() const {
    if (!(g > 0) || !std::isfinite(g)) throw DomainError("UserParams: g must be > 0");
    if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw DomainError("UserParams: sigma2 must be > 0");
    if (!(p_cir > 0) || !std::isfinite(p_cir)) throw DomainError("UserParams: p_cir must be > 0");
    if (!(c > 0) || !std::isfinite(c)) throw DomainError("UserParams: c must be > 0");
    if (!(r_min > 0)) throw DomainError("UserParams: r_min must be > 0");
    if (!(r_e >= 0)) throw DomainError("UserParams: r_e must be >= 0");
    if (!(r_min >= r_e)) throw DomainError("UserParams: r_min must be >= r_e");
  }
};

/// The full allocation problem: users plus the shared FDMA bandwidth budget.
/// Always feasible: with B_n = b_total/N the rate constraint is reachable for
/// every user because the rate is unbounded in the transmit power.
struct ProblemInstance {
  std::vector<UserParams> users;
  Real b_total = 1.0; // Hz

  Index n() const { return static_cast<Index>(users.size()); }

  void validate() const {
    if (users.empty()) throw DomainError("ProblemInstance: needs at least one user");
    if (!(b_total > 0) || !std::isfinite(b_total))
      throw DomainError("ProblemInstance: b_total must be > 0");
    for (const auto& u : users) u.validate();
  }
};

/// Per-user transmit powers (W) and bandwidths (Hz), all strictly positive.
struct Allocation {
  ArrayX p;
  ArrayX b;
};

struct FeasibilityReport {
  Real bandwidth_slack = 0;  // b_total - sum B_n (Hz)
  ArrayX rate_violations;    // max(0, r_min - r_n) per user (bit/s)
  bool is_feasible = false;
};

namespace detail {
inline constexpr Real kLn2 = 0.6931471805599453;
}

/// Shannon rate b * log2(1 + g p / (sigma2 b)) in bit/s.
inline Real rate(Real p, Real b, const UserParams& u) {
  if (std::isnan(p) || std::isnan(b) || std::isinf(p) || std::isinf(b) || p < 0)
    throw DomainError("rate: p must be finite and >= 0");
  if (!(b > 0)) throw DomainError("rate: b must be > 0");
  return b * std::log1p(u.g * p / (u.sigma2 * b)) / detail::kLn2;
}

inline Real secrecy_rate(Real p, Real b, const UserParams& u) { return rate(p, b, u) - u.r_e; }

/// Utility-energy efficiency f(r_s) / (p + p_cir) in utility per joule.
inline Real uee(Real p, Real b, const UserParams& u) {
  const Real rs = secrecy_rate(p, b, u);
  if (rs < 0) throw DomainError("uee: secrecy rate is negative");
  return utility_eval(u.utility, rs) / (p + u.p_cir);
}

inline Real weighted_sum_uee(const Allocation& a, const ProblemInstance& inst) {
  if (a.p.size() != inst.n() || a.b.size() != inst.n())
    throw DomainError("weighted_sum_uee: allocation dimensions do not match instance");
  Real total = 0;
  for (Index i = 0; i < inst.n(); ++i)
    total += inst.users[i].c * uee(a.p[i], a.b[i], inst.users[i]);
  return total;
}

/// Feasibility of an allocation against the bandwidth budget and per-user
/// rate floors. Default rate tolerance is 1e-6 * r_min per user; the
/// bandwidth slack tolerance is 1e-9 * b_total.
inline FeasibilityReport check_feasible(const Allocation& a, const ProblemInstance& inst,
                                        std::optional<Real> tol_rate = std::nullopt) {
  if (a.p.size() != inst.n() || a.b.size() != inst.n())
    throw DomainError("check_feasible: allocation dimensions do not match instance");
  FeasibilityReport rep;
  rep.bandwidth_slack = inst.b_total - a.b.sum();
  rep.rate_violations.resize(inst.n());
  bool rates_ok = true;
  for (Index i = 0; i < inst.n(); ++i) {
    const UserParams& u = inst.users[i];
    const Real v = std::max(0.0, u.r_min - rate(a.p[i], a.b[i], u));
    rep.rate_violations[i] = v;
    const Real tol = tol_rate ? *tol_rate : 1e-6 * u.r_min;
    if (v > tol) rates_ok = false;
  }
  rep.is_feasible = rates_ok && rep.bandwidth_slack >= -1e-9 * inst.b_total;
  return rep;
}

} // namespace ueeopt

#endif
