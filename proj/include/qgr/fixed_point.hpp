#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qgr/grid_fn.hpp"
#include "qgr/renorm.hpp"

namespace qgr {

enum class TailClass { Decaying, Growing, Indeterminate };
std::string to_string(TailClass c);

struct LimitOdeSolution {
  double nu = 0.0;
  EvenFn samples;
  TailClass tail_class = TailClass::Indeterminate;
  double tail_fit_rate = 0.0;
  // log(|theta(L)| / |theta(3)|) + (L - 3): negative on the decaying side.
  double growth_indicator = 0.0;
};

// Taylor coefficients of the limit-equation solution with theta(0) = nu.
std::vector<double> limit_ode_taylor(double nu, std::size_t n_terms);

// Fourth-order Adams-Moulton march of theta' = 2 eta theta - 2 (theta . theta).
// The search-range check 0 <= nu <= 1.5 can be lifted for exact-solution
// checks at larger nu.
LimitOdeSolution march_limit_ode(double nu, const GridSpec& grid,
                                 bool allow_outside_search_range = false);

double find_nu(double bracket_lo, double bracket_hi, double tol,
               const GridSpec& grid = default_grid());

struct NuScanEntry {
  double nu = 0.0;
  TailClass tail_class = TailClass::Indeterminate;
  double growth_indicator = 0.0;
  double signed_log_tail = 0.0;  // sign(theta(L)) * log(1 + |theta(L)|)
};

struct NuScan {
  std::vector<NuScanEntry> entries;
  // Midpoints of adjacent entries where theta(L) changes sign or the class
  // switches between Decaying and Growing.
  std::vector<double> transitions;
};

NuScan scan_nu(double lo, double hi, std::size_t count, const GridSpec& grid = default_grid());

struct PicardResult {
  EvenFn iterate;
  Residual residual;
  int iterations = 0;
  std::vector<double> history;  // sup residual per iterate, starting with f0
};

PicardResult picard_solve(const EvenFn& f0, const RenormParams& params, double damping,
                          double tol, int max_iter);

}  // namespace qgr
