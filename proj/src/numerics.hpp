#pragma once

// Small building blocks shared by the translation units; not installed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace qgr::detail {

// Composite Newton-Cotes weights for m unit intervals: Simpson when m is even,
// Simpson followed by a 3/8 panel when m is odd, trapezoid when m == 1.
inline std::vector<double> simpson_weights(std::size_t m) {
  std::vector<double> w(m + 1, 0.0);
  if (m == 0) return w;
  if (m == 1) {
    w[0] = w[1] = 0.5;
    return w;
  }
  std::size_t even = (m % 2 == 0) ? m : m - 3;
  for (std::size_t i = 0; i + 2 <= even; i += 2) {
    w[i] += 1.0 / 3.0;
    w[i + 1] += 4.0 / 3.0;
    w[i + 2] += 1.0 / 3.0;
  }
  if (even != m) {
    w[even] += 3.0 / 8.0;
    w[even + 1] += 9.0 / 8.0;
    w[even + 2] += 9.0 / 8.0;
    w[even + 3] += 3.0 / 8.0;
  }
  return w;
}

// Simpson sum over samples y[i0..i1] with spacing h.
inline double simpson_sum(std::span<const double> y, std::size_t i0,
                          std::size_t i1, double h) {
  if (i1 <= i0) return 0.0;
  auto w = simpson_weights(i1 - i0);
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * y[i0 + j];
  return s * h;
}

template <std::size_t N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    std::size_t k = 0;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      if (ab[i] == 0.0) {
        x[k] = 0.0;
        w[k++] = wt[i];
      } else {
        x[k] = ab[i];
        w[k++] = wt[i];
        x[k] = -ab[i];
        w[k++] = wt[i];
      }
    }
  }
};

template <std::size_t N>
const GaussRule<N>& gauss_rule() {
  static const GaussRule<N> rule;
  return rule;
}

// Gauss-Legendre on each grid cell met by [lo, hi]; cells have width h and
// start at multiples of h.
template <std::size_t N, class F>
double cellwise_gauss(double lo, double hi, double h, F&& f) {
  if (!(hi > lo)) return 0.0;
  const auto& rule = gauss_rule<N>();
  double total = 0.0;
  double a = lo;
  while (a < hi) {
    double next = (std::floor(a / h + 1e-9) + 1.0) * h;
    if (next <= a) next = a + h;
    double b = std::min(hi, next);
    double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += rule.w[i] * f(c + r * rule.x[i]);
    total += r * s;
    a = b;
  }
  return total;
}

// Local four-point Lagrange interpolation on a uniform table y[0..m-1].
inline double lagrange4(std::span<const double> y, double h, double x) {
  const std::size_t m = y.size();
  if (m == 1) return y[0];
  if (m < 4) {
    double s = std::clamp(x / h, 0.0, static_cast<double>(m - 1));
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s), m - 2);
    double t = s - static_cast<double>(k);
    return (1.0 - t) * y[k] + t * y[k + 1];
  }
  double s = x / h;
  long j0 = static_cast<long>(std::floor(s)) - 1;
  j0 = std::clamp<long>(j0, 0, static_cast<long>(m) - 4);
  double t = s - static_cast<double>(j0);
  const double* p = y.data() + j0;
  double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
  double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
  double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
  return l0 * p[0] + l1 * p[1] + l2 * p[2] + l3 * p[3];
}

}  // namespace qgr::detail
