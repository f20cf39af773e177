#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qgr {

struct GridSpec {
  double half_width = 0.0;
  std::size_t n_points = 0;
  double spacing = 0.0;

  double node(std::size_t i) const { return static_cast<double>(i) * spacing; }
  std::vector<double> nodes() const;
  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double L, std::size_t n_points);
GridSpec default_grid();

enum class Repr { Psi, Phi };

// Even function sampled at eta >= 0. Off-node values come from a local
// monotone-filtered cubic Hermite interpolant whose slope stencils do not
// cross isolated kinks; a start f(0) = 0 with a non-integer power law
// f ~ eta^q g(eta) is interpolated through g. Beyond L an exponential tail
// values.back() * exp(-tail_rate * (|x| - L)) is used. tail_rate = 0 keeps
// the last value constant, which is what the constant fixed point needs.
class EvenFn {
 public:
  EvenFn(GridSpec grid, std::vector<double> values, double tail_rate,
         Repr repr = Repr::Psi);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  std::span<const double> slopes() const { return slopes_; }
  // Exponent q of a detected power-law start, 0 when none was detected.
  double start_power() const { return start_power_; }
  double tail_rate() const { return tail_rate_; }
  Repr repr() const { return repr_; }

  double operator()(double x) const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;       // used by the cell to the right of a node
  std::vector<double> slopes_left_;  // used by the cell to the left of a node
  double tail_rate_;
  Repr repr_;
  double start_power_ = 0.0;
  std::vector<double> start_g_;      // f / eta^q on the first nodes
};

EvenFn sample(const GridSpec& grid, double tail_rate, Repr repr,
              const auto& fn) {
  std::vector<double> v(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) v[i] = fn(grid.node(i));
  return EvenFn(grid, std::move(v), tail_rate, repr);
}

double eval(const EvenFn& f, double x);

// Integrates |f|^p of the interpolant over R, including the tail model.
double lp_norm(const EvenFn& f, double p);

// Like lp_norm but restricted to [-L, L]; used for residuals whose tail is
// not part of the represented function.
double lp_norm_truncated(const EvenFn& f, double p);

double sup_norm_nodes(const EvenFn& f);

// Integral of f(eta) exp(-eta^2) |eta|^sigma over R. local_order is the
// exponent nu with f(eta) ~ |eta|^nu near 0 (0 when f(0) != 0).
double weighted_integral_I(const EvenFn& f, double sigma,
                           double local_order = 0.0);

EvenFn to_phi(const EvenFn& f);
EvenFn to_psi(const EvenFn& f);

EvenFn holder_modulus_profile(const EvenFn& f, double alpha,
                              std::span<const double> deltas);

// Pointwise linear combination on a shared grid (tail rate of the first).
EvenFn combine(double a, const EvenFn& f, double b, const EvenFn& g);

}  // namespace qgr
