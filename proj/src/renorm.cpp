#include "qgr/renorm.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qgr/errors.hpp"
#include "qgr/quadrature.hpp"

namespace qgr {

namespace {

// exp(-40) is below double resolution relative to the O(1) terms.
constexpr double kExponentCut = 40.0;

struct Split {
  std::vector<double> linear;
  std::vector<double> nonlinear;
};

// Both terms of the operator in psi scale. For gamma = 2 the kernel
// phi(z) phi(zeta - z) e^{-2 z (zeta - z)} equals e^{-zeta^2} psi(z) psi(zeta - z),
// so the inner integrals are the convolution table of psi and the outer
// weight e^{eta^2 - zeta^2} stays below one.
Split operator_terms(const EvenFn& psi, double beta, double gamma, bool linear_part = true) {
  const auto& g = psi.grid();
  const double h = g.spacing, L = g.half_width;
  const std::size_t n = g.n_points;
  double top = std::min(L / beta, std::pow(std::pow(L, gamma) + kExponentCut, 1.0 / gamma));
  std::size_t n_tab = std::max(n, static_cast<std::size_t>(std::ceil(top / h)) + 4);
  auto S = bullet_all(psi, n_tab);
  Split out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double pre = std::pow(beta, gamma - 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = g.node(i);
    double eg = std::pow(eta, gamma);
    if (linear_part) {
      double ex = eg - std::pow(eta / beta, gamma);
      out.linear[i] = pre * std::exp(ex) * psi(eta / beta);
    }
    if (i == 0) continue;
    double hi = std::min(eta / beta, std::pow(eg + kExponentCut, 1.0 / gamma));
    double integral = stabilized_integral(S, eg, eta, hi, gamma);
    out.nonlinear[i] = gamma * std::pow(eta, gamma - 2.0) * integral;
    if (!std::isfinite(out.nonlinear[i]) || !std::isfinite(out.linear[i]))
      throw RangeError(fmt::format("operator value not representable at eta = {}", eta), eta);
  }
  return out;
}

void require_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument(fmt::format("beta must lie in (0, 1), got {}", beta));
}

}  // namespace

void validate(const RenormParams& p) {
  require_beta(p.beta);
  if (!(p.gamma > 1.0) || !std::isfinite(p.gamma))
    throw InvalidArgument(fmt::format("gamma must be > 1, got {}", p.gamma));
}

EvenFn apply_phi(const EvenFn& phi, double beta) {
  if (phi.repr() != Repr::Phi) throw InvalidArgument("apply_phi expects a Phi-representation function");
  require_beta(beta);
  auto psi = to_psi(phi);
  auto t = operator_terms(psi, beta, 2.0);
  const auto& g = phi.grid();
  std::vector<double> v(g.n_points);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double eta = g.node(i);
    v[i] = std::exp(-eta * eta) * (t.linear[i] + t.nonlinear[i]);
  }
  return EvenFn(g, std::move(v), phi.tail_rate(), Repr::Phi);
}

EvenFn phi_nonlinear_profile(const EvenFn& phi, double beta) {
  if (phi.repr() != Repr::Phi) throw InvalidArgument("phi_nonlinear_profile expects Phi representation");
  require_beta(beta);
  auto t = operator_terms(to_psi(phi), beta, 2.0, false);
  const auto& g = phi.grid();
  std::vector<double> v(g.n_points);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double eta = g.node(i);
    v[i] = std::exp(-eta * eta) * t.nonlinear[i];
  }
  return EvenFn(g, std::move(v), phi.tail_rate(), Repr::Phi);
}

EvenFn apply_psi(const EvenFn& f, const RenormParams& params) {
  if (f.repr() != Repr::Psi) throw InvalidArgument("apply_psi expects a Psi-representation function");
  validate(params);
  if (params.gamma == 2.0) return to_psi(apply_phi(to_phi(f), params.beta));
  auto t = operator_terms(f, params.beta, params.gamma);
  std::vector<double> v(f.grid().n_points);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.linear[i] + t.nonlinear[i];
  return EvenFn(f.grid(), std::move(v), f.tail_rate(), Repr::Psi);
}

Residual residual_norm(const EvenFn& f, const RenormParams& params, double p) {
  if (!(p >= 1.0)) throw InvalidArgument(fmt::format("residual_norm needs p >= 1, got {}", p));
  auto r = combine(1.0, apply_psi(f, params), -1.0, f);
  return {lp_norm_truncated(r, p), sup_norm_nodes(r)};
}

Residual power_iterate_check(const EvenFn& f, double beta, int n) {
  require_beta(beta);
  if (n < 1) throw InvalidArgument(fmt::format("power_iterate_check needs n >= 1, got {}", n));
  double bn = std::pow(beta, n);
  if (bn < 0.05)
    throw InvalidArgument(fmt::format("beta^n = {} is below the minimum 0.05", bn));
  return residual_norm(f, {bn, 2.0}, 2.0);
}

}  // namespace qgr
