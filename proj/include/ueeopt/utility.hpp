#ifndef UEEOPT_UTILITY_HPP
#define UEEOPT_UTILITY_HPP

#include "ueeopt/roots.hpp"
#include "ueeopt/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ueeopt {

enum class UtilityFamily { kType1, kType2, kType3, kCustom };

/// One concave increasing utility f of the secrecy rate, with closed-form
/// derivative and derivative inverse for the three parametric families:
///
///   Type 1: f(x) = kappa * ln(b + a x)        kappa, a > 0, b >= 0
///   Type 2: f(x) = kappa * (1 - e^{-a x + c}) kappa, a > 0
///   Type 3: f(x) = kappa * (x + d)^a          kappa > 0, 0 < a < 1, d >= 0
///
/// Custom utilities plug in f and f'; the derivative inverse falls back to
/// monotone bisection on f' when no closed form is supplied.
struct UtilitySpec {
  UtilityFamily family = UtilityFamily::kType3;
  Real kappa = 1.0;
  Real a = 0.5;
  Real b = 0.0; // Type 1 offset inside the log
  Real c = 0.0; // Type 2 exponent shift
  Real d = 0.0; // Type 3 argument shift

  std::function<Real(Real)> custom_f;
  std::function<Real(Real)> custom_fp;
  std::function<std::optional<Real>(Real)> custom_fp_inv; // may be empty

  static UtilitySpec type1(Real kappa, Real a, Real b) {
    UtilitySpec s;
    s.family = UtilityFamily::kType1;
    s.kappa = kappa;
    s.a = a;
    s.b = b;
    return s;
  }
  static UtilitySpec type2(Real kappa, Real a, Real c) {
    UtilitySpec s;
    s.family = UtilityFamily::kType2;
    s.kappa = kappa;
    s.a = a;
    s.c = c;
    return s;
  }
  static UtilitySpec type3(Real kappa, Real a, Real d) {
    UtilitySpec s;
    s.family = UtilityFamily::kType3;
    s.kappa = kappa;
    s.a = a;
    s.d = d;
    return s;
  }
  static UtilitySpec custom(std::function<Real(Real)> f, std::function<Real(Real)> fp,
                            std::function<std::optional<Real>(Real)> fp_inv = {}) {
    UtilitySpec s;
    s.family = UtilityFamily::kCustom;
    s.custom_f = std::move(f);
    s.custom_fp = std::move(fp);
    s.custom_fp_inv = std::move(fp_inv);
    return s;
  }
};

inline Real utility_eval(const UtilitySpec& s, Real x) {
  if (std::isnan(x) || x < 0) throw DomainError("utility_eval: x must be >= 0");
  switch (s.family) {
    case UtilityFamily::kType1: {
      if (!(s.b + s.a * x > 0)) throw DomainError("utility_eval: log argument not positive");
      if (s.b > 0) return s.kappa * (std::log(s.b) + std::log1p(s.a * x / s.b));
      return s.kappa * std::log(s.a * x);
    }
    case UtilityFamily::kType2:
      return -s.kappa * std::expm1(s.c - s.a * x);
    case UtilityFamily::kType3:
      return s.kappa * std::pow(x + s.d, s.a);
    case UtilityFamily::kCustom:
      return s.custom_f(x);
  }
  throw DomainError("utility_eval: unknown family");
}

inline Real utility_deriv(const UtilitySpec& s, Real x) {
  if (std::isnan(x) || x < 0) throw DomainError("utility_deriv: x must be >= 0");
  switch (s.family) {
    case UtilityFamily::kType1: {
      const Real arg = s.b + s.a * x;
      if (!(arg > 0)) throw DomainError("utility_deriv: log argument not positive");
      return s.kappa * s.a / arg;
    }
    case UtilityFamily::kType2:
      return s.kappa * s.a * std::exp(-s.a * x + s.c);
    case UtilityFamily::kType3:
      if (x + s.d <= 0)
        throw DomainError("utility_deriv: derivative unbounded at 0+ for Type 3 with d = 0");
      return s.kappa * s.a * std::pow(x + s.d, s.a - 1.0);
    case UtilityFamily::kCustom:
      return s.custom_fp(x);
  }
  throw DomainError("utility_deriv: unknown family");
}

/// Inverse of the derivative: the unique x >= 0 with f'(x) = y, or nullopt
/// when every solution is negative (the clamp case).
inline std::optional<Real> utility_deriv_inverse(const UtilitySpec& s, Real y) {
  if (!(y > 0) || std::isnan(y)) throw DomainError("utility_deriv_inverse: y must be > 0");
  switch (s.family) {
    case UtilityFamily::kType1: {
      // f'(x) = kappa a / (b + a x)
      const Real x = s.kappa / y - s.b / s.a;
      if (x < 0) return std::nullopt;
      return x;
    }
    case UtilityFamily::kType2: {
      // f'(x) = kappa a e^{-a x + c}
      const Real x = (s.c + std::log(s.kappa * s.a / y)) / s.a;
      if (x < 0) return std::nullopt;
      return x;
    }
    case UtilityFamily::kType3: {
      // f'(x) = kappa a (x + d)^{a-1}
      const Real x = std::pow(y / (s.kappa * s.a), 1.0 / (s.a - 1.0)) - s.d;
      if (x < 0) return std::nullopt;
      return x;
    }
    case UtilityFamily::kCustom: {
      if (s.custom_fp_inv) return s.custom_fp_inv(y);
      // f' is positive and decreasing, so the equation f'(x) = y is a
      // monotone root find; x = 0 side handled by the clamp below.
      const Real eps = 1e-12;
      if (s.custom_fp(eps) < y) return std::nullopt;
      RootConfig cfg;
      cfg.rel_tol = 1e-13;
      cfg.max_iter = 400;
      cfg.initial_guess = 1.0;
      const Real x = find_root_decreasing([&](Real t) { return s.custom_fp(t); }, y, cfg);
      return x;
    }
  }
  throw DomainError("utility_deriv_inverse: unknown family");
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;

  void fail(const std::string& what) {
    ok = false;
    failures.push_back(what);
  }
};

/// Numeric validation of the concave-increasing contract: parameter ranges,
/// f' > 0 and f' non-increasing on a log grid over [1e-3, 1e9], f' against
/// centered differences of f (rel err <= 1e-6), and f'(inv(y)) = y round
/// trips (rel err <= 1e-10).
inline ValidationReport validate_spec(const UtilitySpec& s) {
  ValidationReport rep;
  switch (s.family) {
    case UtilityFamily::kType1:
      if (!(s.kappa > 0)) rep.fail("type1: kappa must be > 0");
      if (!(s.a > 0)) rep.fail("type1: a must be > 0");
      if (!(s.b >= 0)) rep.fail("type1: b must be >= 0");
      break;
    case UtilityFamily::kType2:
      if (!(s.kappa > 0)) rep.fail("type2: kappa must be > 0");
      if (!(s.a > 0)) rep.fail("type2: a must be > 0");
      break;
    case UtilityFamily::kType3:
      if (!(s.kappa > 0)) rep.fail("type3: kappa must be > 0");
      if (!(s.a > 0 && s.a < 1)) rep.fail("type3: a must lie in (0, 1)");
      if (!(s.d >= 0)) rep.fail("type3: d must be >= 0");
      break;
    case UtilityFamily::kCustom:
      if (!s.custom_f || !s.custom_fp) rep.fail("custom: f and f' are required");
      break;
  }
  if (!rep.ok) return rep;

  constexpr int kGrid = 121;
  Real prev_f = 0, prev_fp = 0;
  bool have_prev = false;
  for (int i = 0; i < kGrid; ++i) {
    const Real x = std::pow(10.0, -3.0 + 12.0 * i / (kGrid - 1));
    Real f, fp;
    try {
      f = utility_eval(s, x);
      fp = utility_deriv(s, x);
    } catch (const std::exception& e) {
      rep.fail(std::string("evaluation failed at x = ") + std::to_string(x) + ": " + e.what());
      return rep;
    }
    // Type-2 utilities saturate in double precision once a*x is large;
    // f' underflows there and differences stop carrying information, so
    // those grid points are skipped rather than misreported.
    const bool observable = fp > 1e-280 && 2 * 6e-6 * x * fp > 1e-7 * std::abs(f);
    if (!(fp > 0) && observable) {
      std::ostringstream os;
      os << "f'(x) not positive at x = " << x;
      rep.fail(os.str());
    }
    if (have_prev) {
      if (f < prev_f * (1.0 - 1e-12) - 1e-300) {
        std::ostringstream os;
        os << "f not increasing at x = " << x;
        rep.fail(os.str());
      }
      if (fp > prev_fp * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "f' not non-increasing (concavity) at x = " << x;
        rep.fail(os.str());
      }
    }
    if (observable) {
      // centered difference of f against the closed-form derivative
      const Real h = 6e-6 * x;
      const Real fd = (utility_eval(s, x + h) - utility_eval(s, x - h)) / (2 * h);
      if (std::abs(fd - fp) > 1e-6 * std::abs(fp)) {
        std::ostringstream os;
        os << "f' disagrees with finite differences at x = " << x << " (fd " << fd << " vs " << fp
           << ")";
        rep.fail(os.str());
      }
    }
    prev_f = f;
    prev_fp = fp;
    have_prev = true;
  }

  // derivative-inverse round trip over admissible y values
  for (int i = 0; i < kGrid; i += 6) {
    const Real x = std::pow(10.0, -3.0 + 12.0 * i / (kGrid - 1));
    const Real y = utility_deriv(s, x);
    if (!(y > 1e-290)) continue; // below this the inverse is not resolvable
    const auto inv = utility_deriv_inverse(s, y);
    if (!inv) {
      std::ostringstream os;
      os << "deriv_inverse clamps an attainable value y = f'(" << x << ")";
      rep.fail(os.str());
      continue;
    }
    const Real back = utility_deriv(s, *inv);
    if (std::abs(back - y) > 1e-10 * std::abs(y)) {
      std::ostringstream os;
      os << "f'(deriv_inverse(y)) != y at y = " << y;
      rep.fail(os.str());
    }
  }
  return rep;
}

} // namespace ueeopt

#endif
