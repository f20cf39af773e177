#pragma once

#include <cstddef>
#include <vector>

#include "qgr/grid_fn.hpp"

namespace qgr {

// (f . f)(zeta_i) = int_0^{zeta_i} f(x) f(zeta_i - x) dx on uniform nodes.
// The table may extend past the function's grid; reads beyond L use the
// tail model.
struct ConvTable {
  GridSpec grid;
  std::vector<double> values;

  double at(double zeta) const;  // local cubic interpolation, odd extension
};

double bullet_convolution(const EvenFn& f, const EvenFn& g, double zeta);
ConvTable bullet_all(const EvenFn& f);
ConvTable bullet_all(const EvenFn& f, std::size_t n_nodes);

// int_lo^hi exp(c - zeta^gamma) zeta^(2 - gamma) S(zeta) dzeta with the
// exponent difference kept inside the integrand, zeta >= 0.
double stabilized_integral(const ConvTable& S, double c, double lo, double hi,
                           double gamma = 2.0);

double j_functional(const EvenFn& f, double beta, double eta);
EvenFn j_profile(const EvenFn& f, double beta);

double phi_nonlinear_term(const EvenFn& phi, double beta, double eta);

// Ratio |J(eta)| / [e^{beta^2 eta^2} (erf(sqrt(q) eta) - erf(sqrt(q) beta eta))^{1/q}]
// maximised over grid nodes with eta > 0.
double young_ratio_sup(const EvenFn& f, double beta, double q);

}  // namespace qgr
