#include <cmath>
#include <vector>

#include <doctest.h>

#include "qgr/errors.hpp"
#include "qgr/fixed_point.hpp"
#include "qgr/invariant_sets.hpp"

using namespace qgr;

namespace {

double sup_error_on(const LimitOdeSolution& sol, double upto, double (*exact)(double)) {
  const auto& g = sol.samples.grid();
  double err = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double eta = g.node(i);
    if (eta > upto) break;
    err = std::max(err, std::abs(sol.samples.values()[i] - exact(eta)));
  }
  return err;
}

double two_cos(double eta) { return 2.0 * std::cos(std::sqrt(2.0) * eta); }

}  // namespace

TEST_CASE("march: zero and constant solutions") {
  auto g = make_grid(4.0, 513);
  auto zero = march_limit_ode(0.0, g);
  for (double v : zero.samples.values()) CHECK(v == 0.0);

  auto one = march_limit_ode(1.0, g);
  CHECK(sup_error_on(one, 2.0, [](double) { return 1.0; }) <= 1e-8);
}

TEST_CASE("march: Taylor start") {
  auto sol = march_limit_ode(0.5, make_grid(4.0, 1025));
  CHECK(sol.samples.values()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(sol.samples(0.1) - 0.5025) <= 5e-5);

  auto c = limit_ode_taylor(0.5, 4);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(c[2] == doctest::Approx(0.25));
}

TEST_CASE("march: fourth order on an oscillating exact solution") {
  double prev = 0.0;
  for (std::size_t n : {129u, 257u, 513u}) {
    auto sol = march_limit_ode(2.0, make_grid(2.0, n), true);
    double err = sup_error_on(sol, 2.0, two_cos);
    if (prev > 0.0) {
      MESSAGE("n = " << n << " sup error " << err << " ratio " << prev / err);
      CHECK(prev / err >= 8.0);
    }
    prev = err;
  }
}

TEST_CASE("march: argument checks and overflow") {
  CHECK_THROWS_AS(march_limit_ode(2.0, make_grid(4.0, 513)), InvalidArgument);
  CHECK_THROWS_AS(march_limit_ode(0.5, make_grid(8.0, 257)), InvalidArgument);
  CHECK_THROWS_AS(march_limit_ode(1e200, make_grid(4.0, 513), true), OverflowError);
}

TEST_CASE("tail classes across the search range") {
  auto g = default_grid();
  for (double nu : {0.1, 0.5, 0.9}) {
    auto sol = march_limit_ode(nu, g);
    CHECK(sol.tail_class == TailClass::Growing);
    CHECK(sol.growth_indicator > 0.0);
  }
  CHECK(march_limit_ode(1.0, g).tail_class != TailClass::Decaying);
}

TEST_CASE("find_nu: bracket errors") {
  CHECK_THROWS_AS(find_nu(0.5, 0.5, 1e-6), InvalidArgument);
  CHECK_THROWS_AS(find_nu(0.6, 0.5, 1e-6), InvalidArgument);
  // Both ends sit on the same side.
  CHECK_THROWS_AS(find_nu(0.3, 0.6, 1e-6), BracketError);
  // No sign change anywhere in (0, 1): every member grows.
  CHECK_THROWS_AS(find_nu(0.01, 0.99, 1e-6), BracketError);
}

TEST_CASE("scan_nu: separatrix at nu = 1") {
  auto scan = scan_nu(0.5, 1.5, 21);
  CHECK(scan.entries.size() == 21);
  REQUIRE(scan.transitions.size() == 1);
  CHECK(std::abs(scan.transitions[0] - 1.0) <= 0.05);
  CHECK_THROWS_AS(scan_nu(0.5, 1.5, 1), InvalidArgument);
}

TEST_CASE("picard: fixed seed converges immediately") {
  auto g = default_grid();
  EvenFn one(g, std::vector<double>(g.n_points, 1.0), 0.0);
  auto r = picard_solve(one, {0.9, 2.0}, 0.5, 1e-10, 10);
  CHECK(r.iterations == 0);
  CHECK(r.residual.sup <= 1e-10);
  REQUIRE(r.history.size() == 1);
}

TEST_CASE("picard: candidate seed residual history") {
  auto c = candidate_member(0.5, 0.6, 2.0);
  std::vector<double> hist;
  try {
    hist = picard_solve(c, {0.9, 2.0}, 0.5, 1e-10, 5).history;
  } catch (const DivergenceError& e) {
    hist = e.history();
  }
  REQUIRE(hist.size() >= 2);
  bool decreasing = true;
  for (std::size_t i = 1; i < hist.size(); ++i) decreasing = decreasing && hist[i] < hist[i - 1];
  MESSAGE("first residual " << hist.front() << " last " << hist.back());
  WARN_MESSAGE(decreasing, "Picard residual not monotone over the first iterations");
}

TEST_CASE("picard: argument checks") {
  auto g = default_grid();
  EvenFn one(g, std::vector<double>(g.n_points, 1.0), 0.0);
  CHECK_THROWS_AS(picard_solve(one, {0.9, 2.0}, 0.0, 1e-10, 10), InvalidArgument);
  CHECK_THROWS_AS(picard_solve(one, {0.9, 2.0}, 1.5, 1e-10, 10), InvalidArgument);
  CHECK_THROWS_AS(picard_solve(one, {0.9, 2.0}, 0.5, 0.0, 10), InvalidArgument);
  EvenFn phi(g, std::vector<double>(g.n_points, 1.0), 0.0, Repr::Phi);
  CHECK_THROWS_AS(picard_solve(phi, {0.9, 2.0}, 0.5, 1e-10, 10), InvalidArgument);
}
