#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ueeopt/baselines.hpp"
#include "ueeopt/outer.hpp"
#include "ueeopt/scenario.hpp"

#include <cmath>
#include <random>

using namespace ueeopt;

namespace {

// golden-section oracle on the raw UEE curve, independent of the closed forms
double golden_oracle(const UserParams& u, double b) {
  const double p_min = p_min_for(b, u);
  auto obj = [&](double p) { return uee(p, b, u); };
  const double hi = bracket_unimodal_max(obj, p_min, std::max(p_min, u.p_cir));
  return std::max(p_min, golden_section_max(obj, p_min, hi, 1e-13, 300));
}

UserParams random_user(std::mt19937_64& rng, UtilitySpec spec) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  UserParams u;
  const double d = 0.1 + 0.4 * u01(rng);
  const double shadow = 8.0 * (2.0 * u01(rng) - 1.0);
  u.g = channel_gain(d, shadow);
  u.sigma2 = dbm_to_watts(-174.0);
  u.p_cir = dbm_to_watts(2.0);
  u.r_min = 2e4;
  u.r_e = u01(rng) < 0.5 ? 0.0 : 1e4;
  u.c = 1.0;
  u.utility = std::move(spec);
  return u;
}

} // namespace

TEST_CASE("p_min_for closed form and round trip") {
  UserParams u;
  u.g = 1.0;
  u.sigma2 = 1.0;
  u.p_cir = 1.0;
  u.r_min = 1.0;
  u.r_e = 0.0;
  u.utility = UtilitySpec::type3(1.0, 0.5, 0.0);
  CHECK(p_min_for(1.0, u) == doctest::Approx(1.0));
  u.r_min = 4.0;
  CHECK(p_min_for(2.0, u) == doctest::Approx(6.0));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    UserParams ru = random_user(rng, UtilitySpec::type3(1.0, 0.5, 0.0));
    const double b = 1e4 * std::pow(100.0, u01(rng));
    const double p = p_min_for(b, ru);
    CHECK(rate(p, b, ru) == doctest::Approx(ru.r_min).epsilon(1e-12));
  }
}

TEST_CASE("power optimizer matches the golden-section oracle per family") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    UtilitySpec spec;
    switch (i % 3) {
      case 0: spec = UtilitySpec::type1(0.2 + 3 * u01(rng), 1e-5 * (0.1 + u01(rng)), 1.0); break;
      case 1: spec = UtilitySpec::type2(0.2 + 3 * u01(rng), 1e-5 * (0.1 + u01(rng)), 0.0); break;
      default: spec = UtilitySpec::type3(0.2 + 3 * u01(rng), 0.1 + 0.8 * u01(rng), 0.0); break;
    }
    const UserParams u = random_user(rng, spec);
    const double b = 2e5 * std::pow(10.0, u01(rng));
    const double p_closed = optimize_power_given_bandwidth(u, b);
    const double p_oracle = golden_oracle(u, b);
    CHECK(p_closed == doctest::Approx(p_oracle).epsilon(1e-6));
  }
}

TEST_CASE("power optimizer clamps at the floor when the peak is below it") {
  // shrink the bandwidth so the floor power exceeds the unconstrained peak
  std::mt19937_64 rng(3);
  UserParams u = random_user(rng, UtilitySpec::type3(1.0, 0.5, 0.0));
  u.r_min = 2e5;
  u.r_e = 0.0;
  const double b = 1e4;
  const double p_min = p_min_for(b, u);
  const double p = optimize_power_given_bandwidth(u, b);
  const double stationary = detail::type3_stationary(u, b);
  REQUIRE(stationary < p_min);
  CHECK(p == p_min);
}

TEST_CASE("returned power dominates a grid around it") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const UserParams u = random_user(rng, UtilitySpec::type3(1.0, 0.5, 0.0));
    const double b = 5e5;
    const double p_star = optimize_power_given_bandwidth(u, b);
    const double best = uee(p_star, b, u);
    const double p_min = p_min_for(b, u);
    for (int i = 0; i <= 1000; ++i) {
      const double p = p_min * std::pow(100.0 * p_star / p_min, i / 1000.0);
      CHECK(uee(p, b, u) <= best * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("interior stationary points satisfy d uee / dp = 0") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    UtilitySpec spec;
    switch (i % 3) {
      case 0: spec = UtilitySpec::type1(1.0, 2e-5, 1.0); break;
      case 1: spec = UtilitySpec::type2(1.0, 1e-5, 0.0); break;
      default: spec = UtilitySpec::type3(1.0, 0.5, 0.0); break;
    }
    const UserParams u = random_user(rng, spec);
    const double b = 6e5;
    const double p = optimize_power_given_bandwidth(u, b);
    if (p <= p_min_for(b, u) * (1.0 + 1e-9)) continue;
    const double h = 1e-6 * p;
    const double deriv = (uee(p + h, b, u) - uee(p - h, b, u)) / (2 * h);
    const double scale = uee(p, b, u) / (p + u.p_cir);
    CHECK(std::abs(deriv) <= 1e-5 * scale);
  }
}

TEST_CASE("power-only baseline") {
  ScenarioSpec spec;
  spec.n_users = 6;
  spec.seed = 14;
  const ProblemInstance inst = generate(spec);
  const SolveReport rep = optimize_power_only(inst);
  CHECK(check_feasible(rep.allocation, inst).is_feasible);
  for (Index i = 0; i < inst.n(); ++i)
    CHECK(rep.allocation.b[i] == doctest::Approx(inst.b_total / inst.n()));

  SUBCASE("permuting users permutes powers") {
    ProblemInstance rev = inst;
    std::reverse(rev.users.begin(), rev.users.end());
    const SolveReport rrep = optimize_power_only(rev);
    for (Index i = 0; i < inst.n(); ++i)
      CHECK(rrep.allocation.p[i] == doctest::Approx(rep.allocation.p[inst.n() - 1 - i]));
  }
  SUBCASE("dominated by the joint solver") {
    const SolveReport joint = solve(inst);
    REQUIRE(joint.status == SolveStatus::kConverged);
    CHECK(joint.objective >= rep.objective * (1.0 - 1e-9));
  }
}

TEST_CASE("power-only equals the full-band optimum for one user") {
  ScenarioSpec spec;
  spec.n_users = 1;
  spec.seed = 15;
  const ProblemInstance inst = generate(spec);
  const SolveReport rep = optimize_power_only(inst);
  const double p_direct = optimize_power_given_bandwidth(inst.users[0], inst.b_total);
  CHECK(rep.allocation.p[0] == doctest::Approx(p_direct));
  CHECK(rep.allocation.b[0] == doctest::Approx(inst.b_total));
}

TEST_CASE("bandwidth-only baseline") {
  ScenarioSpec spec;
  spec.n_users = 2;
  spec.seed = 16;
  spec.b_total_hz = 2e6;
  const ProblemInstance inst = generate(spec);

  SUBCASE("identical users and powers split the band evenly") {
    ProblemInstance twin;
    twin.b_total = 2e6;
    twin.users = {inst.users[0], inst.users[0]};
    const ArrayX p = ArrayX::Constant(2, 1e-3);
    const SolveReport rep = optimize_bandwidth_only(twin, p);
    CHECK(rep.allocation.b[0] == doctest::Approx(rep.allocation.b[1]).epsilon(1e-9));
    CHECK(rep.allocation.b.sum() == doctest::Approx(twin.b_total).epsilon(1e-12));
  }

  SUBCASE("matches a fine 1-D grid over the bandwidth split") {
    const ArrayX p = ArrayX::Constant(2, 1e-3);
    const SolveReport rep = optimize_bandwidth_only(inst, p);
    double grid_best = -std::numeric_limits<double>::infinity();
    const double b1_lo = detail::b_min_for(p[0], inst.users[0]);
    const double b2_lo = detail::b_min_for(p[1], inst.users[1]);
    REQUIRE(b1_lo + b2_lo < inst.b_total);
    for (int i = 0; i <= 10000; ++i) {
      const double b1 = b1_lo + (inst.b_total - b2_lo - b1_lo) * i / 10000.0;
      Allocation a;
      a.p = p;
      a.b.resize(2);
      a.b[0] = b1;
      a.b[1] = inst.b_total - b1;
      grid_best = std::max(grid_best, weighted_sum_uee(a, inst));
    }
    CHECK(rep.objective >= grid_best - 1e-3 * std::abs(grid_best));
    CHECK(rep.objective <= grid_best + 1e-3 * std::abs(grid_best));
  }

  SUBCASE("floors clamp when the price is high") {
    // a third user with a weak channel stays at its floor bandwidth
    ProblemInstance mix = inst;
    UserParams weak = inst.users[0];
    weak.g *= 0.05;
    weak.c = 1e-6; // nearly no weight: the price pushes it to the floor
    mix.users.push_back(weak);
    const ArrayX p = ArrayX::Constant(3, 2e-3);
    const SolveReport rep = optimize_bandwidth_only(mix, p);
    const double floor3 = detail::b_min_for(p[2], weak);
    CHECK(rep.allocation.b[2] <= floor3 * (1.0 + 1e-6));
    CHECK(rate(p[2], rep.allocation.b[2], weak) >= weak.r_min * (1.0 - 1e-6));
  }

  SUBCASE("unreachable floor raises a solver error") {
    const ArrayX p = ArrayX::Constant(2, 1e-12);
    CHECK_THROWS_AS(optimize_bandwidth_only(inst, p), SolverError);
  }
}

TEST_CASE("alternating optimization") {
  ScenarioSpec spec;
  spec.n_users = 5;
  spec.seed = 17;
  const ProblemInstance inst = generate(spec);

  SUBCASE("half-steps never decrease the objective") {
    Allocation a = default_initial_allocation(inst);
    double prev = weighted_sum_uee(a, inst);
    for (int round = 0; round < 4; ++round) {
      for (Index i = 0; i < inst.n(); ++i)
        a.p[i] = optimize_power_given_bandwidth(inst.users[i], a.b[i]);
      const double after_p = weighted_sum_uee(a, inst);
      CHECK(after_p >= prev * (1.0 - 1e-10));
      a.b = optimize_bandwidth_only(inst, a.p).allocation.b;
      const double after_b = weighted_sum_uee(a, inst);
      CHECK(after_b >= after_p * (1.0 - 1e-10));
      prev = after_b;
    }
  }

  SUBCASE("dominated by the joint solver, feasible output") {
    const SolveReport ao = alternating(inst);
    CHECK(check_feasible(ao.allocation, inst).is_feasible);
    const SolveReport joint = solve(inst);
    REQUIRE(joint.status == SolveStatus::kConverged);
    CHECK(joint.objective >= ao.objective * (1.0 - 1e-9));
  }
}

TEST_CASE("alternating solves the single-user problem in two rounds") {
  ScenarioSpec spec;
  spec.n_users = 1;
  spec.seed = 18;
  const ProblemInstance inst = generate(spec);
  BaselineConfig cfg;
  cfg.ao_max_rounds = 2;
  const SolveReport ao = alternating(inst, cfg);

  // 2-D oracle: bandwidth is maximal at the optimum, so scan powers at full band
  const UserParams& u = inst.users[0];
  double best = -std::numeric_limits<double>::infinity();
  const double p_lo = p_min_for(inst.b_total, u);
  for (int i = 0; i <= 200000; ++i) {
    const double p = p_lo * std::pow(1e6, i / 200000.0);
    best = std::max(best, u.c * uee(p, inst.b_total, u));
  }
  CHECK(ao.objective >= best - 1e-3 * std::abs(best));
}
