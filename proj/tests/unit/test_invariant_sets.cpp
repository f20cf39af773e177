#include <cmath>
#include <vector>

#include <doctest.h>

#include "qgr/errors.hpp"
#include "qgr/invariant_sets.hpp"
#include "qgr/renorm.hpp"
#include "qgr/special_fns.hpp"

using namespace qgr;

TEST_CASE("candidate_member values") {
  auto c = candidate_member(0.5, 0.6, 2.0);
  CHECK(c(0.0) == 0.0);
  CHECK(c(1.0) == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(c(2.0) == doctest::Approx(0.5 * std::exp(-4.0)).epsilon(1e-12));
  CHECK(c(2.0) == doctest::Approx(0.009158).epsilon(1e-4));
  CHECK(c(0.5) == doctest::Approx(0.5 * std::pow(0.5, 0.6) * std::exp(-1.0)).epsilon(1e-10));
  CHECK(c(-2.0) == c(2.0));
}

TEST_CASE("check_E_ak") {
  auto g = default_grid();
  auto c = candidate_member(0.5, 0.6, 2.0, g);
  auto r = check_E_ak(c, 2.0, 0.5);
  REQUIRE(r.in_E_ak.has_value());
  CHECK(*r.in_E_ak);

  auto twice = sample(g, 1.0, Repr::Psi, [](double x) { return 2.0 * std::exp(-x); });
  auto r2 = check_E_ak(twice, 1.0, 1.0);
  CHECK_FALSE(*r2.in_E_ak);
  CHECK(r2.worst_envelope_ratio == doctest::Approx(2.0).epsilon(1e-12));

  auto edge = sample(g, 2.0, Repr::Psi, [](double x) { return 0.5 * std::exp(-2.0 * x); });
  auto r3 = check_E_ak(edge, 2.0, 0.5);
  CHECK(*r3.in_E_ak);
  CHECK(r3.worst_envelope_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("check_holder") {
  auto g = default_grid();
  BoundsParams b;
  EvenFn flat(g, std::vector<double>(g.n_points, 0.3), 0.0);
  auto r = check_holder(flat, b, 2.0);
  CHECK(r.holder_norm == 0.0);
  CHECK(r.min_envelope_A == 0.0);
  CHECK(*r.in_holder);
  CHECK(*r.modulus_envelope_ok);

  BoundsParams loose = b;
  loose.alpha = 0.6;
  loose.K = 1e6;
  loose.A = 1e6;
  auto c = candidate_member(0.5, 0.6, 2.0, g);
  auto rc = check_holder(c, loose, 1.5);
  MESSAGE("candidate: minimal K " << rc.holder_norm << ", minimal A " << rc.min_envelope_A
                                 << ", refinement growth " << rc.modulus_growth);
  CHECK(std::isfinite(rc.holder_norm));
  CHECK(std::isfinite(rc.min_envelope_A));
  CHECK(*rc.in_holder);
  CHECK(*rc.modulus_envelope_ok);

  auto step = sample(g, 0.0, Repr::Psi, [](double x) { return std::abs(x) < 2.0 ? 1.0 : 0.0; });
  auto rs = check_holder(step, loose, 1.5);
  MESSAGE("step: refinement growth " << rs.modulus_growth);
  CHECK(rs.modulus_growth > 1.25);
  CHECK_FALSE(*rs.in_holder);
}

TEST_CASE("check_M") {
  auto g = default_grid();
  EvenFn one(g, std::vector<double>(g.n_points, 1.0), 0.0);
  CHECK_THROWS_AS(check_M(one, 0.1, -1.5, 0.0), SingularIntegrand);

  auto c = candidate_member(0.5, 0.6, 2.0, g);
  auto r = check_M(c, 0.0, -1.5, 0.6);
  CHECK(std::isfinite(r.I_value));
  CHECK(r.I_value > 0.0);
  CHECK(*check_M(c, 0.5 * r.I_value, -1.5, 0.6).in_M);
  CHECK_FALSE(*check_M(c, 2.0 * r.I_value, -1.5, 0.6).in_M);

  auto neg = combine(-1.0, c, 0.0, c);
  auto rn = check_M(neg, 1e-12, -1.5, 0.6);
  CHECK(rn.I_value < 0.0);
  CHECK_FALSE(*rn.in_M);
}

TEST_CASE("locate_a0") {
  auto a0 = locate_a0(0.5, 0.6, -1.5, 0.8);
  REQUIRE(a0.has_value());
  CHECK(*a0 == 2.0);
  double I = weighted_integral_I(candidate_member(0.5, 0.6, 2.0), -1.5, 0.6);
  CHECK(I > mu0_threshold(2.0, 0.5, -1.5, 0.8));
}

TEST_CASE("envelope stays under itself") {
  auto g = default_grid();
  auto env = sample(g, 2.0, Repr::Psi, [](double x) { return 0.5 * std::exp(-2.0 * std::abs(x)); });
  for (double beta : {0.8, 0.9, 0.99}) {
    CAPTURE(beta);
    auto image = apply_psi(env, {beta, 2.0});
    double worst = 1e300;
    for (std::size_t i = 0; i < g.n_points; ++i)
      worst = std::min(worst, env.value(i) - std::abs(image.value(i)));
    CHECK(worst >= -1e-12);
  }
}

TEST_CASE("invariance_experiment") {
  InvarianceConfig cfg;
  cfg.bounds.mu = 1.05 * mu0_threshold(cfg.bounds.a, cfg.bounds.k, cfg.bounds.sigma, cfg.beta0);

  SUBCASE("empty") {
    cfg.n_samples = 0;
    auto rep = invariance_experiment(cfg);
    CHECK(rep.failures.empty());
    for (const auto& t : rep.tallies) {
      CHECK(t.envelope_tested == 0);
      CHECK(t.weighted_tested == 0);
    }
  }

  SUBCASE("mu below threshold") {
    cfg.bounds.mu = 0.5 * cfg.bounds.mu;
    CHECK_THROWS_AS(invariance_experiment(cfg), InvalidArgument);
  }

  SUBCASE("beta outside (beta0, 1)") {
    cfg.betas = {0.7};
    CHECK_THROWS_AS(invariance_experiment(cfg), InvalidArgument);
  }

  SUBCASE("deterministic in the seed") {
    cfg.n_samples = 6;
    auto a = invariance_experiment(cfg);
    auto b = invariance_experiment(cfg);
    REQUIRE(a.tallies.size() == b.tallies.size());
    for (std::size_t i = 0; i < a.tallies.size(); ++i) {
      CHECK(a.tallies[i].worst_envelope_margin == b.tallies[i].worst_envelope_margin);
      CHECK(a.tallies[i].worst_weighted_margin == b.tallies[i].worst_weighted_margin);
    }
  }
}
