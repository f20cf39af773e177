#include "qgr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "numerics.hpp"
#include "qgr/errors.hpp"

namespace qgr {

namespace {

void require_psi(const EvenFn& f, const char* op) {
  if (f.repr() != Repr::Psi)
    throw InvalidArgument(fmt::format("{} expects a Psi-representation function", op));
}

void require_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument(fmt::format("beta must lie in (0, 1), got {}", beta));
}

// Node values extended past L with the tail model.
std::vector<double> extended_values(const EvenFn& f, std::size_t n_nodes) {
  std::vector<double> v(n_nodes);
  const auto vals = f.values();
  const double h = f.grid().spacing;
  for (std::size_t i = 0; i < n_nodes; ++i)
    v[i] = i < vals.size() ? vals[i] : f(static_cast<double>(i) * h);
  return v;
}

}  // namespace

double ConvTable::at(double zeta) const {
  double a = std::abs(zeta);
  double top = grid.half_width;
  if (a > top * (1.0 + 1e-12))
    throw RangeError(fmt::format("convolution table read at {} beyond {}", a, top), a);
  double v = detail::lagrange4(values, grid.spacing, std::min(a, top));
  return zeta < 0.0 ? -v : v;
}

double bullet_convolution(const EvenFn& f, const EvenFn& g, double zeta) {
  require_psi(f, "bullet_convolution");
  require_psi(g, "bullet_convolution");
  if (!(zeta >= 0.0) || !std::isfinite(zeta))
    throw InvalidArgument(fmt::format("bullet_convolution needs zeta >= 0, got {}", zeta));
  if (zeta == 0.0) return 0.0;
  const double h = f.grid().spacing;
  double s = zeta / h;
  double r = std::round(s);
  std::size_t m;
  double step;
  if (r >= 1.0 && std::abs(s - r) <= 1e-9 * std::max(1.0, s)) {
    m = static_cast<std::size_t>(r);
    step = h;
  } else {
    m = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(s)));
    step = zeta / static_cast<double>(m);
  }
  auto w = detail::simpson_weights(m);
  double acc = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    double x = static_cast<double>(j) * step;
    double y = static_cast<double>(m - j) * step;
    acc += w[j] * f(x) * g(y);
  }
  return acc * step;
}

ConvTable bullet_all(const EvenFn& f) { return bullet_all(f, f.grid().n_points); }

ConvTable bullet_all(const EvenFn& f, std::size_t n_nodes) {
  require_psi(f, "bullet_all");
  if (n_nodes < 2) throw InvalidArgument("convolution table needs at least 2 nodes");
  const double h = f.grid().spacing;
  auto v = extended_values(f, n_nodes);
  ConvTable t;
  t.grid = make_grid(h * static_cast<double>(n_nodes - 1), n_nodes);
  t.grid.spacing = h;
  t.values.assign(n_nodes, 0.0);
  std::vector<double> w;
  for (std::size_t i = 1; i < n_nodes; ++i) {
    w = detail::simpson_weights(i);
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += w[j] * v[j] * v[i - j];
    t.values[i] = acc * h;
  }
  return t;
}

double stabilized_integral(const ConvTable& S, double c, double lo, double hi, double gamma) {
  if (!(hi > lo)) return 0.0;
  const double h = S.grid.spacing;
  double out;
  if (gamma == 2.0) {
    out = detail::cellwise_gauss<5>(lo, hi, h, [&](double z) {
      return std::exp(c - z * z) * S.at(z);
    });
  } else {
    out = detail::cellwise_gauss<5>(lo, hi, h, [&](double z) {
      return std::exp(c - std::pow(z, gamma)) * std::pow(z, 2.0 - gamma) * S.at(z);
    });
  }
  if (!std::isfinite(out))
    throw RangeError(fmt::format("stabilized integral over [{}, {}] is not finite", lo, hi), lo);
  return out;
}

namespace {

std::size_t table_size_for(const EvenFn& f, double top) {
  const double h = f.grid().spacing;
  return std::max(f.grid().n_points,
                  static_cast<std::size_t>(std::ceil(top / h)) + 4);
}

}  // namespace

double j_functional(const EvenFn& f, double beta, double eta) {
  require_psi(f, "j_functional");
  require_beta(beta);
  double e = std::abs(eta);
  if (e == 0.0) return 0.0;
  const double h = f.grid().spacing;
  std::size_t n = static_cast<std::size_t>(std::ceil(e / h)) + 4;
  auto S = bullet_all(f, std::max<std::size_t>(n, 4));
  return stabilized_integral(S, beta * beta * e * e, beta * e, e);
}

EvenFn j_profile(const EvenFn& f, double beta) {
  require_psi(f, "j_profile");
  require_beta(beta);
  const auto& g = f.grid();
  auto S = bullet_all(f, table_size_for(f, g.half_width));
  std::vector<double> v(g.n_points, 0.0);
  for (std::size_t i = 1; i < g.n_points; ++i) {
    double e = g.node(i);
    v[i] = stabilized_integral(S, beta * beta * e * e, beta * e, e);
  }
  return EvenFn(g, std::move(v), f.tail_rate(), Repr::Psi);
}

double phi_nonlinear_term(const EvenFn& phi, double beta, double eta) {
  if (phi.repr() != Repr::Phi)
    throw InvalidArgument("phi_nonlinear_term expects a Phi-representation function");
  require_beta(beta);
  const double e = std::abs(eta);
  if (e == 0.0) return 0.0;
  const auto& g = phi.grid();
  const double h = g.spacing;
  const auto vals = phi.values();

  // Outer cut: |G(zeta)| <= zeta * max|phi| * sup_{x >= zeta/2} |phi(x)|.
  std::vector<double> suffix(vals.size());
  double run = std::abs(vals.back());
  for (std::size_t i = vals.size(); i-- > 0;) {
    run = std::max(run, std::abs(vals[i]));
    suffix[i] = run;
  }
  const double peak = suffix[0];
  if (peak == 0.0) return 0.0;
  auto tail_sup = [&](double x) {
    if (x >= g.half_width) return std::abs(phi(x));
    return suffix[static_cast<std::size_t>(x / h)];
  };
  double hi = e / beta;
  for (double z = e; z < hi; z += h) {
    if (z * peak * tail_sup(0.5 * z) < 1e-18 * peak * peak) {
      hi = z;
      break;
    }
  }
  if (!(hi > e)) return 0.0;

  auto inner = [&](double zeta) {
    if (zeta == 0.0) return 0.0;
    std::size_t m = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(zeta / h)));
    if (m % 2) ++m;
    double step = zeta / static_cast<double>(m);
    auto w = detail::simpson_weights(m);
    double acc = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      double z = static_cast<double>(j) * step;
      double y = zeta - z;
      acc += w[j] * phi(z) * phi(y) * std::exp(-2.0 * z * y);
    }
    return acc * step;
  };
  std::size_t mo = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((hi - e) / h)));
  if (mo % 2) ++mo;
  double step = (hi - e) / static_cast<double>(mo);
  auto w = detail::simpson_weights(mo);
  double acc = 0.0;
  for (std::size_t j = 0; j <= mo; ++j) acc += w[j] * inner(e + static_cast<double>(j) * step);
  return 2.0 * acc * step;
}

double young_ratio_sup(const EvenFn& f, double beta, double q) {
  auto J = j_profile(f, beta);
  const auto& g = f.grid();
  double sq = std::sqrt(q);
  double best = 0.0;
  for (std::size_t i = 1; i < g.n_points; ++i) {
    double e = g.node(i);
    // e^{b^2 e^2} (erf(sq e) - erf(sq b e))^{1/q}, evaluated in log form.
    double diff = std::erfc(sq * beta * e) - std::erfc(sq * e);
    if (!(diff > 0.0)) continue;
    double log_den = beta * beta * e * e + std::log(diff) / q;
    double ratio = std::abs(J.value(i)) * std::exp(-log_den);
    if (std::isfinite(ratio)) best = std::max(best, ratio);
  }
  return best;
}

}  // namespace qgr
