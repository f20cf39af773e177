#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qgr/errors.hpp"
#include "qgr/invariant_sets.hpp"
#include "qgr/quadrature.hpp"

using namespace qgr;

namespace {

EvenFn constant(const GridSpec& g, double c) { return EvenFn(g, std::vector<double>(g.n_points, c), 0.0); }

}  // namespace

TEST_CASE("truncated convolution of simple functions") {
  auto g = default_grid();
  auto one = constant(g, 1.0);
  CHECK(std::abs(bullet_convolution(one, one, 3.0) - 3.0) <= 1e-13);
  auto e = sample(g, 1.0, Repr::Psi, [](double x) { return std::exp(-x); });
  CHECK(std::abs(bullet_convolution(e, e, 1.0) - std::exp(-1.0)) <= 1e-10);
  auto lin = sample(g, 0.0, Repr::Psi, [](double x) { return x; });
  CHECK(std::abs(bullet_convolution(lin, lin, 2.0) - 8.0 / 6.0) <= 1e-12);
  CHECK(bullet_convolution(e, e, 0.0) == 0.0);
  CHECK_THROWS_AS(bullet_convolution(e, e, -1.0), InvalidArgument);
  // Off-node argument.
  CHECK(std::abs(bullet_convolution(e, e, 1.2345) - 1.2345 * std::exp(-1.2345)) <= 1e-8);
}

TEST_CASE("convolution is symmetric") {
  auto g = default_grid();
  auto a = sample(g, 1.0, Repr::Psi, [](double x) { return std::exp(-x) * (1.0 + 0.3 * std::cos(2 * x)); });
  auto b = sample(g, 2.0, Repr::Psi, [](double x) { return std::exp(-x * x) + 0.1 * x * std::exp(-2 * x); });
  for (double z : {0.5, 1.0, 3.0, 7.5})
    CHECK(std::abs(bullet_convolution(a, b, z) - bullet_convolution(b, a, z)) <= 1e-12);
}

TEST_CASE("batch table") {
  auto g = default_grid();
  auto one = constant(g, 1.0);
  auto t1 = bullet_all(one);
  for (std::size_t i = 0; i < g.n_points; i += 37) CHECK(std::abs(t1.values[i] - g.node(i)) <= 1e-12);
  CHECK(t1.values[0] == 0.0);

  auto e2 = sample(g, 2.0, Repr::Psi, [](double x) { return std::exp(-2 * x); });
  auto t2 = bullet_all(e2);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i)
    worst = std::max(worst, std::abs(t2.values[i] - g.node(i) * std::exp(-2 * g.node(i))));
  CHECK(worst <= 1e-8);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(g.n_points);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g.node(i)) * (1.0 + 0.5 * u(rng));
  EvenFn r(g, v, 1.0);
  auto tr = bullet_all(r);
  std::uniform_int_distribution<std::size_t> pick(0, g.n_points - 1);
  for (int k = 0; k < 10; ++k) {
    std::size_t i = pick(rng);
    CHECK(std::abs(tr.values[i] - bullet_convolution(r, r, g.node(i))) <= 1e-12);
  }
}

TEST_CASE("Simpson order on a smooth integrand") {
  // (e^{-x^2} . e^{-x^2})(z) = sqrt(pi/2) e^{-z^2/2} erf(z / sqrt 2).
  auto exact = [](double z) { return std::sqrt(M_PI / 2) * std::exp(-z * z / 2) * std::erf(z / std::sqrt(2.0)); };
  double prev = 0.0;
  for (std::size_t n : {65u, 129u, 257u}) {
    auto g = make_grid(8.0, n);
    auto f = sample(g, 1.0, Repr::Psi, [](double x) { return std::exp(-x * x); });
    double err = std::abs(bullet_convolution(f, f, 2.0) - exact(2.0));
    if (prev > 0.0) CHECK(prev / err >= 8.0);
    prev = err;
  }
}

TEST_CASE("J functional") {
  auto g = default_grid();
  auto zero = constant(g, 0.0);
  CHECK(j_functional(zero, 0.5, 1.0) == 0.0);
  auto one = constant(g, 1.0);
  double ref = std::exp(0.25) / 2.0 * (std::exp(-0.25) - std::exp(-1.0));
  CHECK(std::abs(j_functional(one, 0.5, 1.0) - ref) <= 1e-10);
  CHECK(j_functional(one, 0.7, 0.0) == 0.0);
  // Stabilized form stays finite at the edge of the grid.
  CHECK(std::isfinite(j_functional(one, 0.9, 8.0)));
  CHECK_THROWS_AS(j_functional(one, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("phi-form nonlinear term") {
  auto g = default_grid();
  auto zero = EvenFn(g, std::vector<double>(g.n_points, 0.0), 1.0, Repr::Phi);
  CHECK(phi_nonlinear_term(zero, 0.6, 1.0) == 0.0);
  auto phi = sample(g, 2.0 * g.half_width, Repr::Phi, [](double x) { return std::exp(-x * x); });
  for (double beta : {0.5, 0.8})
    for (double eta : {0.0, 0.3, 1.0, 2.5}) {
      double ref = std::exp(-eta * eta) - std::exp(-eta * eta / (beta * beta));
      CHECK(std::abs(phi_nonlinear_term(phi, beta, eta) - ref) <= 1e-8);
    }
  // Far out the term is bounded by the tail mass and tends to zero.
  auto e = sample(g, 2.0, Repr::Psi, [](double x) { return 0.5 * std::exp(-2 * x); });
  auto phe = to_phi(e);
  double far = phi_nonlinear_term(phe, 0.9, 8.0);
  CHECK(std::abs(far) <= 1e-20);
}

TEST_CASE("J norm scaling and Young ratio") {
  auto g = default_grid();
  auto f = candidate_member(0.5, 0.6, 2.0, g);
  std::vector<double> x, y;
  for (double beta : {0.9, 0.95, 0.975, 0.99}) {
    x.push_back(std::log(1.0 - beta));
    y.push_back(std::log(lp_norm(j_profile(f, beta), 2.0)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / x.size(), my += y[i] / y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  double slope = sxy / sxx;
  MESSAGE("J-norm slope " << slope);
  CHECK(slope >= 0.20);

  // Young bound: sup ratio finite and stable under grid refinement (q = p/(2p-2) = 1 at p = 2).
  double r1 = young_ratio_sup(f, 0.9, 1.0);
  double r2 = young_ratio_sup(candidate_member(0.5, 0.6, 2.0, make_grid(8.0, 2049)), 0.9, 1.0);
  CHECK(std::isfinite(r1));
  CHECK(r2 <= 1.05 * r1);
}
