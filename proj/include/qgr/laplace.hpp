#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "qgr/fixed_point.hpp"

namespace qgr {

double numeric_laplace(const LimitOdeSolution& f, double s);
// Same transform for any Psi-representation profile on eta >= 0.
double numeric_laplace(const EvenFn& f, double s);

double riccati_residual(const std::function<double(double)>& hat, double nu, double s);

// Hypergeometric argument of the closed form: s^2/4 solves the transformed
// equation; s^2/2 is kept for comparison.
enum class HatVariant { QuarterArgument, HalfArgument };

double closed_form_hat(double s, double nu, double c1, double c2,
                       HatVariant variant = HatVariant::QuarterArgument);

// Complex-abscissa evaluation for contour inversion. Uses the entire
// continuation of the bracket while the power series is accurate and the
// large-|s| expansion sum_n n! a_n / s^{n+1} of the theta(0) = nu solution
// beyond (valid for c1 != 0).
std::complex<double> closed_form_hat_complex(std::complex<double> s, double nu, double c1,
                                             double c2,
                                             HatVariant variant = HatVariant::QuarterArgument);

struct RiccatiSolution {
  double nu = 0.0;
  double c1 = 1.0;
  double c2 = 0.0;
  HatVariant variant = HatVariant::QuarterArgument;
  double fit_residual = 0.0;  // smallest singular value of the fit rows
  std::vector<double> s_grid;
  std::vector<double> hat_values;
};

// Projective (c1, c2) matching hat(s_ref[j]) = targets[j]; least squares when
// more than one reference point is given.
RiccatiSolution fit_riccati_constants(double nu, std::span<const double> s_ref,
                                      std::span<const double> targets,
                                      HatVariant variant = HatVariant::QuarterArgument);

struct LaplaceTransform {
  std::function<double(double)> real;
  std::function<std::complex<double>(std::complex<double>)> complex;
};

enum class InversionMethod { GaverStehfest, TalbotContour };

double inverse_laplace(const LaplaceTransform& F, double eta, InversionMethod method);

struct CheckedInversion {
  double talbot = 0.0;
  double stehfest = 0.0;
  double rel_diff = 0.0;
};

// Runs both methods; disagreement above 1e-2 relative (where |value| >= 0.01)
// raises UnstableInversion.
CheckedInversion inverse_laplace_checked(const LaplaceTransform& F, double eta);

}  // namespace qgr
