#include "qgr/grid_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "numerics.hpp"
#include "qgr/errors.hpp"

namespace qgr {

std::vector<double> GridSpec::nodes() const {
  std::vector<double> out(n_points);
  for (std::size_t i = 0; i < n_points; ++i) out[i] = node(i);
  return out;
}

GridSpec make_grid(double L, std::size_t n_points) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw InvalidArgument(fmt::format("grid half-width must be positive, got {}", L));
  if (n_points < 2)
    throw InvalidArgument(fmt::format("grid needs at least 2 points, got {}", n_points));
  GridSpec g;
  g.half_width = L;
  g.n_points = n_points;
  g.spacing = L / static_cast<double>(n_points - 1);
  return g;
}

GridSpec default_grid() { return make_grid(8.0, 1025); }

namespace {

// Isolated kinks: the second difference at the node is at least four times
// both neighbours, which stay smooth on either side.
std::vector<std::size_t> segment_breaks(std::span<const double> f) {
  const std::size_t n = f.size();
  std::vector<std::size_t> breaks{0};
  double scale = 0.0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  auto d2 = [&](std::size_t i) { return std::abs(f[i + 1] - 2.0 * f[i] + f[i - 1]); };
  for (std::size_t i = 2; i + 2 < n; ++i) {
    double c = d2(i);
    if (c > 1e-13 * scale && c > 4.0 * std::max(d2(i - 1), d2(i + 1))) breaks.push_back(i);
  }
  if (n > 1) breaks.push_back(n - 1);
  return breaks;
}

// Derivative at node i from nodes [a, b] only.
double one_segment_slope(std::span<const double> f, double h, std::size_t i, std::size_t a,
                         std::size_t b) {
  static constexpr double w5[5][5] = {{-25, 48, -36, 16, -3},
                                      {-3, -10, 18, -6, 1},
                                      {1, -8, 0, 8, -1},
                                      {-1, 6, -18, 10, 3},
                                      {3, -16, 36, -48, 25}};
  static constexpr double w3[3][3] = {{-3, 4, -1}, {-1, 0, 1}, {1, -4, 3}};
  const std::size_t len = b - a + 1;
  if (len >= 5) {
    std::size_t j = std::clamp<std::size_t>(i >= a + 2 ? i - 2 : a, a, b - 4);
    const std::size_t o = i - j;
    double acc = 0.0;
    for (std::size_t k = 0; k < 5; ++k) acc += w5[o][k] * f[j + k];
    return acc / (12.0 * h);
  }
  if (len >= 3) {
    std::size_t j = std::clamp<std::size_t>(i >= a + 1 ? i - 1 : a, a, b - 2);
    const std::size_t o = i - j;
    double acc = 0.0;
    for (std::size_t k = 0; k < 3; ++k) acc += w3[o][k] * f[j + k];
    return acc / (2.0 * h);
  }
  return (f[b] - f[a]) / h;
}

struct Slopes {
  std::vector<double> right, left;
};

Slopes hermite_slopes(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  Slopes d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  auto br = segment_breaks(f);
  std::vector<bool> is_break(n, false);
  for (std::size_t s = 0; s + 1 < br.size(); ++s) {
    const std::size_t a = br[s], b = br[s + 1];
    is_break[a] = is_break[b] = true;
    for (std::size_t i = a; i <= b; ++i) {
      double v = one_segment_slope(f, h, i, a, b);
      if (i < b) d.right[i] = v;
      if (i > a) d.left[i] = v;
    }
  }
  d.left[0] = d.right[0];
  d.right[n - 1] = d.left[n - 1];
  // Hyman-type filter: inside locally monotone data keep the slope sign and
  // bound it by three times the smaller adjacent secant.
  auto clamp_slope = [](double di, double bound_secant) {
    if (di * bound_secant <= 0.0) return 0.0;
    double lim = 3.0 * std::abs(bound_secant);
    return std::abs(di) > lim ? std::copysign(lim, di) : di;
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (is_break[i]) continue;
    double sl = (f[i] - f[i - 1]) / h, sr = (f[i + 1] - f[i]) / h;
    if (sl * sr > 0.0) {
      double smaller = std::abs(sl) < std::abs(sr) ? sl : sr;
      d.right[i] = d.left[i] = clamp_slope(d.right[i], smaller);
    }
  }
  double s_last = (f[n - 1] - f[n - 2]) / h;
  if (d.left[n - 1] * s_last > 0.0) d.left[n - 1] = d.right[n - 1] = clamp_slope(d.left[n - 1], s_last);
  return d;
}

constexpr std::size_t kStartCells = 6;

// Fits log|f_i| = q log i + c0 + c1 i + c2 i^2 + c3 i^3 on nodes 1..5 and
// returns q when f(0) = 0 and q is clearly non-integer, else 0.
double detect_start_power(std::span<const double> f) {
  if (f.size() < kStartCells + 8 || f[0] != 0.0) return 0.0;
  double sign = f[1] > 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 1; i <= 5; ++i)
    if (!(f[i] * sign > 0.0)) return 0.0;
  double m[5][6];
  for (int r = 0; r < 5; ++r) {
    double t = r + 1.0;
    m[r][0] = std::log(t);
    m[r][1] = 1.0;
    m[r][2] = t;
    m[r][3] = t * t;
    m[r][4] = t * t * t;
    m[r][5] = std::log(std::abs(f[r + 1]));
  }
  for (int c = 0; c < 5; ++c) {
    int piv = c;
    for (int r = c + 1; r < 5; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    for (int k = 0; k < 6; ++k) std::swap(m[c][k], m[piv][k]);
    for (int r = 0; r < 5; ++r) {
      if (r == c) continue;
      double fac = m[r][c] / m[c][c];
      for (int k = c; k < 6; ++k) m[r][k] -= fac * m[c][k];
    }
  }
  double q = m[0][5] / m[0][0];
  if (!(q > 0.02 && q < 3.98) || std::abs(q - std::round(q)) < 0.02) return 0.0;
  return q;
}

void require_psi(const EvenFn& f, const char* op) {
  if (f.repr() != Repr::Psi)
    throw InvalidArgument(fmt::format("{} expects a Psi-representation function", op));
}

}  // namespace

EvenFn::EvenFn(GridSpec grid, std::vector<double> values, double tail_rate, Repr repr)
    : grid_(grid), values_(std::move(values)), tail_rate_(tail_rate), repr_(repr) {
  if (grid_.n_points < 2 || !(grid_.spacing > 0.0))
    throw InvalidArgument("EvenFn needs a valid grid");
  if (values_.size() != grid_.n_points)
    throw InvalidArgument(fmt::format("EvenFn expects {} values, got {}",
                                      grid_.n_points, values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw InvalidArgument(fmt::format("non-finite sample at node {}", i));
  if (!(tail_rate_ >= 0.0) || !std::isfinite(tail_rate_))
    throw InvalidArgument(fmt::format("tail rate must be finite and >= 0, got {}", tail_rate_));
  auto d = hermite_slopes(values_, grid_.spacing);
  slopes_ = std::move(d.right);
  slopes_left_ = std::move(d.left);
  start_power_ = detect_start_power(values_);
  if (start_power_ > 0.0) {
    const std::size_t m = kStartCells + 3;
    start_g_.assign(m, 0.0);
    for (std::size_t i = 1; i < m; ++i)
      start_g_[i] = values_[i] / std::pow(grid_.node(i), start_power_);
    start_g_[0] = 4.0 * start_g_[1] - 6.0 * start_g_[2] + 4.0 * start_g_[3] - start_g_[4];
  }
}

double EvenFn::operator()(double x) const {
  if (!std::isfinite(x)) throw InvalidArgument("eval at non-finite abscissa");
  const double ax = std::abs(x);
  const double L = grid_.half_width, h = grid_.spacing;
  const std::size_t n = grid_.n_points;
  if (ax > L) return values_[n - 1] * std::exp(-tail_rate_ * (ax - L));
  const double s = ax / h;
  const double r = std::round(s);
  if (std::abs(s - r) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, s))
    return values_[std::min(static_cast<std::size_t>(r), n - 1)];
  if (start_power_ > 0.0 && s < static_cast<double>(kStartCells))
    return std::pow(ax, start_power_) * detail::lagrange4(start_g_, h, ax);
  std::size_t k = std::min(static_cast<std::size_t>(s), n - 2);
  const double t = s - static_cast<double>(k);
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[k] + h10 * h * slopes_[k] + h01 * values_[k + 1] +
         h11 * h * slopes_left_[k + 1];
}

double eval(const EvenFn& f, double x) { return f(x); }

namespace {

double half_line_power_integral(const EvenFn& f, double p) {
  const auto& g = f.grid();
  return detail::cellwise_gauss<6>(0.0, g.half_width, g.spacing,
                                   [&](double x) { return std::pow(std::abs(f(x)), p); });
}

}  // namespace

double lp_norm(const EvenFn& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument(fmt::format("lp_norm needs p >= 1, got {}", p));
  require_psi(f, "lp_norm");
  double inner = half_line_power_integral(f, p);
  double fl = std::abs(f.values().back());
  double tail = 0.0;
  if (fl != 0.0) {
    if (f.tail_rate() == 0.0) return std::numeric_limits<double>::infinity();
    tail = std::pow(fl, p) / (p * f.tail_rate());
  }
  return std::pow(2.0 * (inner + tail), 1.0 / p);
}

double lp_norm_truncated(const EvenFn& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument(fmt::format("lp_norm needs p >= 1, got {}", p));
  return std::pow(2.0 * half_line_power_integral(f, p), 1.0 / p);
}

double sup_norm_nodes(const EvenFn& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double weighted_integral_I(const EvenFn& f, double sigma, double local_order) {
  require_psi(f, "weighted_integral_I");
  if (!std::isfinite(sigma) || !std::isfinite(local_order) || local_order < 0.0)
    throw InvalidArgument("weighted_integral_I: bad sigma or local-order hint");
  const auto& g = f.grid();
  const auto vals = f.values();
  const std::size_t n = g.n_points;
  const double h = g.spacing;
  double fmax = sup_norm_nodes(f);
  if (sigma <= -1.0 && std::abs(vals[0]) > 1e-14 * fmax)
    throw SingularIntegrand(fmt::format(
        "weight |eta|^{} is not integrable at 0 against f(0) = {}", sigma, vals[0]));
  const double order = (sigma > -1.0 && local_order == 0.0) ? 0.0 : local_order;
  const double pe = order + sigma + 1.0;
  if (!(pe > 0.0))
    throw SingularIntegrand(fmt::format(
        "local order {} does not make |eta|^{} integrable at 0", order, sigma));

  // Near 0 write f = eta^order * g with g smooth and remove the power by the
  // substitution eta = c * u^q; beyond c use node Simpson.
  std::size_t ic = static_cast<std::size_t>(std::lround(0.5 / h));
  if (n < 9) ic = n - 1;
  ic = std::clamp<std::size_t>(ic, std::min<std::size_t>(4, n - 1), n - 1);
  const double c = g.node(ic);
  const std::size_t m = std::min(n, ic + 3);
  std::vector<double> gv(m);
  for (std::size_t i = 1; i < m; ++i)
    gv[i] = order == 0.0 ? vals[i] : vals[i] / std::pow(g.node(i), order);
  if (order == 0.0)
    gv[0] = vals[0];
  else if (m >= 5)
    gv[0] = 4.0 * gv[1] - 6.0 * gv[2] + 4.0 * gv[3] - gv[4];
  else
    gv[0] = gv[1];
  const double q = pe < 1.0 ? 1.0 / pe : 1.0;
  const double cp = std::pow(c, pe);
  const std::size_t panels = std::max<std::size_t>(8, static_cast<std::size_t>(
                                                          std::ceil(q * c / h)) * 2);
  const double du = 1.0 / static_cast<double>(panels);
  double near = detail::cellwise_gauss<6>(0.0, 1.0, du, [&](double u) {
    if (u <= 0.0) return 0.0;
    double eta = c * std::pow(u, q);
    double jac = q * std::pow(u, q * pe - 1.0);
    return cp * jac * detail::lagrange4(gv, h, eta) * std::exp(-eta * eta);
  });
  std::vector<double> y(n);
  for (std::size_t i = ic; i < n; ++i) {
    double eta = g.node(i);
    y[i] = vals[i] * std::pow(eta, sigma) * std::exp(-eta * eta);
  }
  double far = detail::simpson_sum(y, ic, n - 1, h);
  const double L = g.half_width;
  double tail = vals[n - 1] * std::pow(L, sigma) * std::exp(-L * L) / (2.0 * L + f.tail_rate());
  return 2.0 * (near + far + tail);
}

EvenFn to_phi(const EvenFn& f) {
  require_psi(f, "to_phi");
  const auto& g = f.grid();
  std::vector<double> v(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double eta = g.node(i);
    v[i] = f.value(i) * std::exp(-eta * eta);
  }
  return EvenFn(g, std::move(v), f.tail_rate() + 2.0 * g.half_width, Repr::Phi);
}

EvenFn to_psi(const EvenFn& f) {
  if (f.repr() != Repr::Phi) throw InvalidArgument("to_psi expects a Phi-representation function");
  const auto& g = f.grid();
  std::vector<double> v(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double eta = g.node(i);
    v[i] = f.value(i) * std::exp(eta * eta);
    if (!std::isfinite(v[i]))
      throw RangeError(fmt::format("to_psi overflows at eta = {}", eta), eta);
  }
  return EvenFn(g, std::move(v), std::max(0.0, f.tail_rate() - 2.0 * g.half_width), Repr::Psi);
}

EvenFn holder_modulus_profile(const EvenFn& f, double alpha, std::span<const double> deltas) {
  if (deltas.empty()) throw InvalidArgument("holder_modulus_profile needs at least one delta");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidArgument(fmt::format("Hoelder exponent must lie in (0, 1], got {}", alpha));
  for (double d : deltas)
    if (!(d != 0.0) || !std::isfinite(d)) throw InvalidArgument("deltas must be finite and non-zero");
  const auto& g = f.grid();
  std::vector<double> w(g.n_points, 0.0);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double eta = g.node(i), fi = f.value(i);
    double best = 0.0;
    for (double d : deltas) {
      double scale = std::pow(std::abs(d), alpha);
      best = std::max(best, std::abs(f(eta - d) - fi) / scale);
      best = std::max(best, std::abs(f(eta + d) - fi) / scale);
    }
    w[i] = best;
  }
  return EvenFn(g, std::move(w), f.tail_rate(), Repr::Psi);
}

EvenFn combine(double a, const EvenFn& f, double b, const EvenFn& g) {
  if (!(f.grid() == g.grid())) throw InvalidArgument("combine needs matching grids");
  if (f.repr() != g.repr()) throw InvalidArgument("combine needs matching representations");
  std::vector<double> v(f.grid().n_points);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * f.value(i) + b * g.value(i);
  return EvenFn(f.grid(), std::move(v), f.tail_rate(), f.repr());
}

}  // namespace qgr
