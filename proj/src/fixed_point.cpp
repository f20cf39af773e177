#include "qgr/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "numerics.hpp"
#include "qgr/errors.hpp"

namespace qgr {

std::string to_string(TailClass c) {
  switch (c) {
    case TailClass::Decaying: return "Decaying";
    case TailClass::Growing: return "Growing";
    case TailClass::Indeterminate: return "Indeterminate";
  }
  return "?";
}

std::vector<double> limit_ode_taylor(double nu, std::size_t n_terms) {
  std::vector<double> a(std::max<std::size_t>(n_terms, 2), 0.0);
  a[0] = nu;
  // (n+1) a_{n+1} = 2 a_{n-1} - 2 sum_{p+q=n-1} a_p a_q B(p+1, q+1)
  for (std::size_t n = 1; n + 1 < a.size(); ++n) {
    double conv = 0.0;
    for (std::size_t p = 0; p <= n - 1; ++p) {
      std::size_t q = n - 1 - p;
      conv += a[p] * a[q] * std::beta(static_cast<double>(p + 1), static_cast<double>(q + 1));
    }
    a[n + 1] = (2.0 * a[n - 1] - 2.0 * conv) / static_cast<double>(n + 1);
  }
  return a;
}

namespace {

double poly(const std::vector<double>& a, double x) {
  double s = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) s = s * x + a[k];
  return s;
}

double poly_deriv(const std::vector<double>& a, double x) {
  double s = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) s = s * x + static_cast<double>(k) * a[k];
  return s;
}

void classify(LimitOdeSolution& sol) {
  const auto& g = sol.samples.grid();
  const auto v = sol.samples.values();
  const std::size_t n = g.n_points;
  const double L = g.half_width;
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  std::size_t i3 = static_cast<std::size_t>(std::lround(3.0 / g.spacing));
  sol.tail_class = TailClass::Indeterminate;
  sol.growth_indicator = 0.0;
  sol.tail_fit_rate = 0.0;
  if (sol.nu > 0.0 && peak > 10.0 * sol.nu) sol.tail_class = TailClass::Growing;
  if (i3 >= n - 1) return;
  double a3 = std::abs(v[i3]), aL = std::abs(v[n - 1]);
  if (a3 > 0.0 && aL > 0.0) sol.growth_indicator = std::log(aL / a3) + (L - 3.0);
  else if (a3 > 0.0) sol.growth_indicator = -std::numeric_limits<double>::infinity();
  if (sol.tail_class != TailClass::Growing) {
    bool monotone = true;
    for (std::size_t i = i3 + 1; i < n && monotone; ++i)
      monotone = std::abs(v[i]) < std::abs(v[i - 1]);
    if (monotone && aL < a3 * std::exp(-(L - 3.0))) sol.tail_class = TailClass::Decaying;
  }
  // Exponential rate over the last unit of the grid.
  std::size_t i0 = static_cast<std::size_t>(std::lround(std::max(0.0, L - 1.0) / g.spacing));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = i0; i < n; ++i) {
    if (v[i] == 0.0) return;
    double x = g.node(i), y = std::log(std::abs(v[i]));
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++cnt;
  }
  if (cnt >= 2) {
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    sol.tail_fit_rate = -slope;
  }
}

}  // namespace

LimitOdeSolution march_limit_ode(double nu, const GridSpec& grid, bool allow_outside_search_range) {
  if (!std::isfinite(nu) || (!allow_outside_search_range && !(nu >= 0.0 && nu <= 1.5)))
    throw InvalidArgument(fmt::format("march_limit_ode: nu = {} outside [0, 1.5]", nu));
  if (grid.spacing > 1.0 / 64.0 + 1e-15)
    throw InvalidArgument(fmt::format("march_limit_ode needs h <= 1/64, got {}", grid.spacing));
  const std::size_t n = grid.n_points;
  const double h = grid.spacing;
  std::vector<double> th(n, 0.0), rhs(n, 0.0);
  auto taylor = limit_ode_taylor(nu, 40);
  const std::size_t start = std::min<std::size_t>(4, n);
  for (std::size_t i = 0; i < start; ++i) {
    th[i] = poly(taylor, grid.node(i));
    rhs[i] = poly_deriv(taylor, grid.node(i));
  }
  std::vector<double> w;
  for (std::size_t i = start; i < n; ++i) {
    const double eta = grid.node(i);
    w = detail::simpson_weights(i);
    double known = 0.0;
    for (std::size_t j = 1; j < i; ++j) known += w[j] * th[j] * th[i - j];
    known *= h;
    // theta_i enters the memory term linearly through the two end weights.
    const double A = 2.0 * eta - 2.0 * h * (w[0] + w[i]) * th[0];
    const double B = -2.0 * known;
    const double num = th[i - 1] + h / 24.0 * (9.0 * B + 19.0 * rhs[i - 1] - 5.0 * rhs[i - 2] + rhs[i - 3]);
    th[i] = num / (1.0 - 9.0 * h / 24.0 * A);
    rhs[i] = A * th[i] + B;
    if (!std::isfinite(th[i]))
      throw OverflowError(fmt::format("limit ODE march overflowed at eta = {}", eta), eta);
  }
  LimitOdeSolution sol{nu, EvenFn(grid, th, 0.0, Repr::Psi)};
  classify(sol);
  if (sol.tail_fit_rate > 0.0)
    sol.samples = EvenFn(grid, std::move(th), sol.tail_fit_rate, Repr::Psi);
  return sol;
}

double find_nu(double lo, double hi, double tol, const GridSpec& grid) {
  if (!(lo < hi) || !(tol > 0.0)) throw InvalidArgument("find_nu needs lo < hi and tol > 0");
  auto slo = march_limit_ode(lo, grid);
  auto shi = march_limit_ode(hi, grid);
  auto endpoint_ok = [](TailClass c) { return c == TailClass::Decaying || c == TailClass::Growing; };
  if (!endpoint_ok(slo.tail_class) || !endpoint_ok(shi.tail_class) ||
      slo.tail_class == shi.tail_class)
    throw BracketError(fmt::format(
        "no sign change in bracket: nu = {} is {} (indicator {:.6g}), nu = {} is {} (indicator {:.6g})",
        lo, to_string(slo.tail_class), slo.growth_indicator, hi, to_string(shi.tail_class),
        shi.growth_indicator));
  const bool lo_decays = slo.tail_class == TailClass::Decaying;
  double a = lo, b = hi;
  while (b - a > tol) {
    double m = 0.5 * (a + b);
    auto s = march_limit_ode(m, grid);
    bool decays = s.tail_class == TailClass::Decaying ||
                  (s.tail_class == TailClass::Indeterminate && s.growth_indicator < 0.0);
    if (decays == lo_decays) a = m; else b = m;
  }
  return 0.5 * (a + b);
}

NuScan scan_nu(double lo, double hi, std::size_t count, const GridSpec& grid) {
  if (count < 2 || !(lo < hi)) throw InvalidArgument("scan_nu needs count >= 2 and lo < hi");
  NuScan out;
  for (std::size_t k = 0; k < count; ++k) {
    double nu = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    NuScanEntry e{nu};
    try {
      auto s = march_limit_ode(nu, grid);
      double tl = s.samples.values().back();
      e.tail_class = s.tail_class;
      e.growth_indicator = s.growth_indicator;
      e.signed_log_tail = std::copysign(std::log1p(std::abs(tl)), tl);
    } catch (const OverflowError&) {
      e.tail_class = TailClass::Growing;
      e.growth_indicator = std::numeric_limits<double>::infinity();
    }
    out.entries.push_back(e);
  }
  for (std::size_t k = 1; k < out.entries.size(); ++k) {
    const auto& p = out.entries[k - 1];
    const auto& q = out.entries[k];
    bool sign_flip = p.signed_log_tail * q.signed_log_tail < 0.0;
    bool class_flip = (p.tail_class == TailClass::Decaying && q.tail_class == TailClass::Growing) ||
                      (p.tail_class == TailClass::Growing && q.tail_class == TailClass::Decaying);
    if (sign_flip || class_flip) out.transitions.push_back(0.5 * (p.nu + q.nu));
  }
  return out;
}

PicardResult picard_solve(const EvenFn& f0, const RenormParams& params, double damping,
                          double tol, int max_iter) {
  if (f0.repr() != Repr::Psi) throw InvalidArgument("picard_solve expects a Psi-representation seed");
  if (!(damping > 0.0 && damping <= 1.0))
    throw InvalidArgument(fmt::format("damping must lie in (0, 1], got {}", damping));
  if (!(tol > 0.0) || max_iter < 0) throw InvalidArgument("picard_solve needs tol > 0, max_iter >= 0");
  validate(params);
  EvenFn f = f0;
  auto Rf = apply_psi(f, params);
  auto residual_of = [&](const EvenFn& x, const EvenFn& Rx) {
    auto r = combine(1.0, Rx, -1.0, x);
    return Residual{lp_norm_truncated(r, 2.0), sup_norm_nodes(r)};
  };
  Residual res = residual_of(f, Rf);
  if (!std::isfinite(res.sup)) throw InvalidArgument("picard_solve: seed residual is not finite");
  std::vector<double> hist{res.sup};
  int iter = 0, growth_run = 0;
  while (res.sup > tol && iter < max_iter) {
    Residual next;
    try {
      f = combine(1.0 - damping, f, damping, Rf);
      Rf = apply_psi(f, params);
      next = residual_of(f, Rf);
    } catch (const InvalidArgument&) {
      hist.push_back(std::numeric_limits<double>::infinity());
      throw DivergenceError(fmt::format("Picard iterate became non-finite at iteration {}", iter + 1), hist);
    }
    ++iter;
    hist.push_back(next.sup);
    growth_run = (next.sup >= 2.0 * res.sup) ? growth_run + 1 : 0;
    res = next;
    if (growth_run >= 3 || !std::isfinite(res.sup))
      throw DivergenceError(fmt::format("Picard iteration diverged after {} iterations", iter), hist);
  }
  return {f, res, iter, std::move(hist)};
}

}  // namespace qgr
