#ifndef UEEOPT_LAMBERT_HPP
#define UEEOPT_LAMBERT_HPP

#include "ueeopt/types.hpp"

#include <cmath>
#include <limits>

namespace ueeopt {

/// 1/e rounded to double; callers forming arguments at the branch point
/// should scale by this same constant so the domain check stays exact.
inline constexpr double kInvE = 0.36787944117144232159553;

/// Principal branch W0 of the Lambert W function: the solution w >= -1 of
/// w * exp(w) = z, defined for z >= -1/e.
///
/// Branch-aware initial guess (series in sqrt(2(e*z+1)) near the branch
/// point, log-based for large z) refined by Halley iterations. Residual
/// |w e^w - z| <= 1e-12 * max(1, |z|) over the full domain.
template <typename T>
T lambert_w0(T z) {
  const T inv_e = T(kInvE);
  if (std::isnan(z) || z < -inv_e) {
    throw DomainError("lambert_w0: argument below -1/e");
  }
  if (z == T(0)) return T(0);
  if (std::isinf(z)) throw DomainError("lambert_w0: non-finite argument");

  T w;
  if (z < T(-0.32)) {
    // branch-point series, accurate to O(s^6) for s = sqrt(2(1 + e z))
    const T s = std::sqrt(T(2) * (T(1) + z / inv_e));
    w = T(-1) +
        s * (T(1) +
             s * (T(-1.0L / 3.0L) +
                  s * (T(11.0L / 72.0L) +
                       s * (T(-43.0L / 540.0L) + s * T(769.0L / 17280.0L)))));
  } else if (z > T(1e100)) {
    // work in log space to avoid overflow in exp(w)
    const T lz = std::log(z);
    w = lz - std::log(lz);
    for (int i = 0; i < 50; ++i) {
      const T f = w + std::log(w) - lz;
      const T dw = f / (T(1) + T(1) / w);
      w -= dw;
      if (std::abs(dw) <= T(4) * std::numeric_limits<T>::epsilon() * std::abs(w)) break;
    }
    return w;
  } else if (z > T(3)) {
    const T l1 = std::log(z);
    const T l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  } else {
    w = std::log1p(z);
  }

  for (int i = 0; i < 50; ++i) {
    const T ew = std::exp(w);
    const T f = w * ew - z;
    if (f == T(0)) break;
    const T wp1 = w + T(1);
    // Halley step; the second-order correction keeps convergence cubic
    const T denom = ew * wp1 - (w + T(2)) * f / (T(2) * wp1);
    if (denom == T(0)) break;
    const T dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= T(2) * std::numeric_limits<T>::epsilon() * (T(1) + std::abs(w))) break;
  }
  return w;
}

} // namespace ueeopt

#endif
