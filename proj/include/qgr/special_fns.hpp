#pragma once

namespace qgr {

struct HypergeomArgs {
  double a = 0.0;
  double b = 0.0;
  double z = 0.0;
};

double erf(double x);
double gamma_fn(double x);
double lower_incomplete_gamma(double s, double x);

// Kummer M(a, b, z), z >= 0: power series up to z = 30, large-z expansion
// beyond.
double kummer_m(const HypergeomArgs& args);
// exp(-z) * M(a, b, z); finite for every z where the expansion applies.
double kummer_m_scaled(const HypergeomArgs& args);

struct TricomiResult {
  double value = 0.0;
  bool precision_warning = false;
  double digits_lost = 0.0;
};

// Tricomi U(a, b, z) for b in {1/2, 3/2}. Small z uses the M combination,
// large z the optimally truncated asymptotic series, and the range in
// between is filled by integrating Kummer's equation down from the
// asymptotic region.
TricomiResult tricomi_u(const HypergeomArgs& args);

// The displayed combination itself, for any z >= 0 (cancels at large z).
TricomiResult tricomi_u_combination(const HypergeomArgs& args);
// The asymptotic series on its own (any real b), with the smallest term.
double tricomi_u_asymptotic(const HypergeomArgs& args, double* smallest_term = nullptr);

double mu0_threshold(double a, double k, double sigma, double beta0);

}  // namespace qgr
