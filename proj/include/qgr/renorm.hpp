#pragma once

#include "qgr/grid_fn.hpp"

namespace qgr {

struct RenormParams {
  double beta = 0.5;
  double gamma = 2.0;
};

void validate(const RenormParams& p);

EvenFn apply_phi(const EvenFn& phi, double beta);
EvenFn apply_psi(const EvenFn& f, const RenormParams& params);

// The part of apply_phi that is quadratic in phi, at every node.
EvenFn phi_nonlinear_profile(const EvenFn& phi, double beta);

struct Residual {
  double lp = 0.0;   // over [-L, L]
  double sup = 0.0;  // max over nodes
};

Residual residual_norm(const EvenFn& f, const RenormParams& params, double p);
Residual power_iterate_check(const EvenFn& f, double beta, int n);

}  // namespace qgr
