#ifndef UEEOPT_SCENARIO_HPP
#define UEEOPT_SCENARIO_HPP

#include "ueeopt/model.hpp"
#include "ueeopt/types.hpp"
#include "ueeopt/utility.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ueeopt {

inline Real dbm_to_watts(Real v) {
  if (!std::isfinite(v)) throw DomainError("dbm_to_watts: non-finite input");
  return std::pow(10.0, (v - 30.0) / 10.0);
}

inline Real db_to_linear(Real v) {
  if (!std::isfinite(v)) throw DomainError("db_to_linear: non-finite input");
  return std::pow(10.0, v / 10.0);
}

/// Linear channel gain from the urban path-loss model
/// 128.1 + 37.6 log10(d_km) dB plus a shadow-fading term in dB
/// (drawn by the caller).
inline Real channel_gain(Real distance_km, Real shadow_db) {
  if (!(distance_km > 0)) throw DomainError("channel_gain: distance must be > 0");
  const Real loss_db = 128.1 + 37.6 * std::log10(distance_km) + shadow_db;
  return std::pow(10.0, -loss_db / 10.0);
}

/// A fitted utility curve. `spec` takes the secrecy rate in bit/s; the
/// published coefficients were fitted against the bitrate normalized by
/// the dataset maximum, so they are folded here together with
/// `input_divisor_bps`.
struct UtilityPreset {
  std::string name;
  UtilitySpec spec;
  Real input_divisor_bps = 1.0;
};

/// Fitted utility presets by name. The SSV360 fits normalize the bitrate by
/// 15.94 Mbps, the Netflix fits by 15 Mbps; the Netflix curves also carry a
/// normalized-resolution variable which is frozen at `y` (default 1, the
/// dataset's top resolution).
inline UtilityPreset preset_utility(const std::string& name, Real y = 1.0) {
  UtilityPreset p;
  p.name = name;
  if (name == "ssv360_user1_seated") {
    p.input_divisor_bps = 15.94e6;
    p.spec = UtilitySpec::type1(0.5424, 37.2965 / p.input_divisor_bps, 1.0);
  } else if (name == "ssv360_user2_seated") {
    p.input_divisor_bps = 15.94e6;
    p.spec = UtilitySpec::type2(2.9351, 2.1224 / p.input_divisor_bps, 0.0);
  } else if (name == "ssv360_user1_standing") {
    p.input_divisor_bps = 15.94e6;
    p.spec = UtilitySpec::type3(3.2956 * std::pow(p.input_divisor_bps, -0.2733), 0.2733, 0.0);
  } else if (name == "netflix_elfuente1") {
    p.input_divisor_bps = 15e6;
    p.spec = UtilitySpec::type1(33.4215, 0.784 / p.input_divisor_bps, 1.0 + 10.0826 * y);
  } else if (name == "netflix_bigbuckbunny") {
    p.input_divisor_bps = 15e6;
    p.spec = UtilitySpec::type2(103.3464, 0.23166 / p.input_divisor_bps, -2.9792 * y);
  } else if (name == "netflix_birdsincage") {
    p.input_divisor_bps = 15e6;
    p.spec = UtilitySpec::type3(61.8622 * std::pow(p.input_divisor_bps, -0.5301), 0.5301,
                                p.input_divisor_bps * y / 1.1664);
  } else {
    throw ConfigError("preset_utility: unknown preset '" + name + "'");
  }
  return p;
}

/// Scenario recipe matching the simulation setup: urban path loss with
/// log-normal shadowing, thermal-noise PSD, uniform user distances, and
/// per-group weight / eavesdropper-rate / utility overrides.
struct ScenarioSpec {
  int n_users = 30;
  Real b_total_hz = 20e6;
  Real d_min_km = 0.1;
  Real d_max_km = 0.5;
  Real shadow_std_db = 8.0;
  Real noise_psd_dbm_hz = -174.0;
  Real p_cir_dbm = 2.0;
  Real r_min_bps = 20e3;
  Real r_e_bps = 20e3;
  Real weight = 1.0;
  UtilitySpec utility = UtilitySpec::type3(1.0, 0.5, 0.0);
  std::uint64_t seed = 1;

  struct Group {
    std::optional<Real> weight;
    std::optional<Real> r_e_bps;        // absolute override
    std::optional<Real> r_e_factor;     // r_e = factor * r_min
    std::optional<UtilitySpec> utility;
  };
  // users are split into equal contiguous blocks, one per group; the last
  // block absorbs any remainder
  std::vector<Group> groups;

  void validate() const {
    if (n_users < 1) throw ConfigError("ScenarioSpec: n_users must be >= 1");
    if (!(b_total_hz > 0)) throw ConfigError("ScenarioSpec: b_total_hz must be > 0");
    if (!(d_min_km > 0) || !(d_max_km >= d_min_km))
      throw ConfigError("ScenarioSpec: distance range must be positive and ordered");
    if (!(shadow_std_db >= 0)) throw ConfigError("ScenarioSpec: shadow_std_db must be >= 0");
    if (!(r_min_bps > 0)) throw ConfigError("ScenarioSpec: r_min_bps must be > 0");
    if (!(r_e_bps >= 0)) throw ConfigError("ScenarioSpec: r_e_bps must be >= 0");
    if (!(weight > 0)) throw ConfigError("ScenarioSpec: weight must be > 0");
  }

  int group_of(int user) const {
    if (groups.empty()) return -1;
    const int per = n_users / static_cast<int>(groups.size());
    if (per == 0) return static_cast<int>(groups.size()) - 1;
    return std::min(user / per, static_cast<int>(groups.size()) - 1);
  }
};

namespace detail {

/// Deterministic uniform/normal draws on top of std::mt19937_64 (whose
/// output sequence is pinned by the standard). The distributions are done
/// by hand because the std::*_distribution algorithms vary across library
/// implementations.
class ScenarioRng {
public:
  explicit ScenarioRng(std::uint64_t seed) : eng_(seed) {}

  Real uniform01() {
    // 53-bit mantissa draw in [0, 1)
    return static_cast<Real>(eng_() >> 11) * 0x1.0p-53;
  }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform01(); }

  Real normal(Real stddev) {
    // Box-Muller; two fresh uniforms per call keep the per-user stream
    // independent of how many draws preceded it
    const Real u1 = std::max(uniform01(), 1e-300);
    const Real u2 = uniform01();
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

private:
  std::mt19937_64 eng_;
};

} // namespace detail

/// Build the problem instance for a scenario: deterministic in the seed,
/// all parameters converted to SI at this boundary.
inline ProblemInstance generate(const ScenarioSpec& spec) {
  spec.validate();
  detail::ScenarioRng rng(spec.seed);
  ProblemInstance inst;
  inst.b_total = spec.b_total_hz;
  inst.users.reserve(static_cast<std::size_t>(spec.n_users));
  for (int i = 0; i < spec.n_users; ++i) {
    UserParams u;
    const Real d = rng.uniform(spec.d_min_km, spec.d_max_km);
    const Real shadow = rng.normal(spec.shadow_std_db);
    u.g = channel_gain(d, shadow);
    u.sigma2 = dbm_to_watts(spec.noise_psd_dbm_hz);
    u.p_cir = dbm_to_watts(spec.p_cir_dbm);
    u.r_min = spec.r_min_bps;
    u.r_e = spec.r_e_bps;
    u.c = spec.weight;
    u.utility = spec.utility;
    const int gi = spec.group_of(i);
    if (gi >= 0) {
      const auto& grp = spec.groups[static_cast<std::size_t>(gi)];
      if (grp.weight) u.c = *grp.weight;
      if (grp.r_e_bps) u.r_e = *grp.r_e_bps;
      if (grp.r_e_factor) u.r_e = *grp.r_e_factor * u.r_min;
      if (grp.utility) u.utility = *grp.utility;
    }
    u.validate();
    inst.users.push_back(std::move(u));
  }
  return inst;
}

} // namespace ueeopt

#endif
