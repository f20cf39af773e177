#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qgr/grid_fn.hpp"

namespace qgr {

enum class Kernel { HalflineConv, FulllineSgn };
std::string to_string(Kernel k);
Kernel kernel_from_string(const std::string& s);

struct SimState {
  GridSpec grid_y;
  std::vector<double> v;
  double t = 0.0;
  double T = 1.0;
  Kernel kernel = Kernel::HalflineConv;
  bool nonlinear = true;        // false: pure heat flow (diagnostic mode)
  std::optional<EvenFn> seed;   // profile used by init_state, for reference fields
};

// L_y = 40 / sqrt(T), 4097 nodes.
GridSpec default_sim_grid(double T);

SimState init_state(const EvenFn& psi, double T, const GridSpec& grid_y,
                    Kernel kernel = Kernel::HalflineConv);

// y * (v . v)(y) or y * int_R v(y - z) sgn(y - z) v(z) dz at the nodes, with v
// extended evenly and taken as zero beyond the grid.
std::vector<double> nonlinear_term(const SimState& state);

double phi1(double x);
double phi2(double x);

// One exponential time differencing step (Cox-Matthews ETD2RK).
SimState step(const SimState& state, double dt);

std::vector<double> self_similar_reference(const EvenFn& psi, double t, double T,
                                           const GridSpec& grid_y);

double energy(const SimState& state);
double enstrophy(const SimState& state);
double energy(const GridSpec& grid_y, const std::vector<double>& v);
double enstrophy(const GridSpec& grid_y, const std::vector<double>& v);

struct RunOptions {
  double dt_max = 1e-2;
  double profile_window = 3.0;  // |y| sqrt(T - t) <= window
};

struct ScalingReport {
  std::vector<double> sample_times;
  std::vector<double> T_minus_t;
  std::vector<double> energies;
  std::vector<double> enstrophies;
  std::vector<double> profile_errors;
  double energy_slope = 0.0;
  double enstrophy_slope = 0.0;
  double max_profile_error = 0.0;
  // Slopes of the exact self-similar field at the same times.
  double reference_energy_slope = 0.0;
  double reference_enstrophy_slope = 0.0;
  bool degenerate = false;
  bool failed = false;
  double failure_time = 0.0;
  std::string failure_message;
  std::size_t steps = 0;
  std::vector<double> final_field;  // v at the last recorded time
};

ScalingReport run_and_fit(const SimState& state0, double t_end_frac, std::size_t n_samples,
                          const RunOptions& options = {});

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qgr
