#include "qgr/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "qgr/errors.hpp"

namespace qgr {

namespace {

constexpr double kSeriesSwitch = 30.0;
constexpr double kUCombinationMax = 2.0;
constexpr double kUAsymptoticMin = 30.0;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

double rgamma(double x) { return is_nonpositive_integer(x) ? 0.0 : 1.0 / std::tgamma(x); }

void check_args(const HypergeomArgs& p, const char* op) {
  if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.z))
    throw InvalidArgument(fmt::format("{}: non-finite argument", op));
  if (is_nonpositive_integer(p.b))
    throw InvalidArgument(fmt::format("{}: b = {} is a pole", op, p.b));
  if (p.z < 0.0) throw InvalidArgument(fmt::format("{}: z = {} must be >= 0", op, p.z));
}

double m_series(double a, double b, double z) {
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 5000; ++k) {
    term *= (a + k) * z / ((b + k) * (k + 1));
    sum += term;
    if (term == 0.0) break;
    if (k > a * 1.0 + z && std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Optimally truncated sum_k (p)_k (q)_k / k! * x^k.
double truncated_2f0(double p, double q, double x, double* smallest = nullptr) {
  double term = 1.0, sum = 1.0, prev = 1.0;
  for (int k = 0; k < 200; ++k) {
    double next = term * (p + k) * (q + k) * x / (k + 1);
    if (next == 0.0) {
      term = 0.0;
      break;
    }
    if (std::abs(next) > std::abs(prev)) break;
    term = next;
    sum += term;
    prev = std::abs(term);
    if (prev < 1e-17 * std::abs(sum)) break;
  }
  if (smallest) *smallest = std::abs(term);
  return sum;
}

// Large-z form of exp(-z) M(a, b, z) on the positive axis; the subdominant
// piece carries cos(pi a), the average of the two Stokes branches.
double m_scaled_asymptotic(double a, double b, double z) {
  double dom = std::tgamma(b) * rgamma(a) * std::pow(z, a - b) *
               truncated_2f0(b - a, 1.0 - a, 1.0 / z);
  double sub = std::tgamma(b) * rgamma(b - a) * std::cos(std::numbers::pi * a) *
               std::exp(-z) * std::pow(z, -a) * truncated_2f0(a, a - b + 1.0, -1.0 / z);
  return dom + sub;
}

}  // namespace

double erf(double x) { return std::erf(x); }

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("gamma_fn: non-finite argument");
  if (is_nonpositive_integer(x)) throw RangeError(fmt::format("Gamma has a pole at {}", x), x);
  return std::tgamma(x);
}

double lower_incomplete_gamma(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0) || !std::isfinite(s) || !std::isfinite(x))
    throw InvalidArgument(fmt::format("lower_incomplete_gamma needs s > 0, x >= 0 (got {}, {})", s, x));
  if (x == 0.0) return 0.0;
  const double log_pref = s * std::log(x) - x;
  if (x < s + 1.0) {
    double term = 1.0 / s, sum = term;
    for (int k = 1; k < 10000; ++k) {
      term *= x / (s + k);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(log_pref) * sum;
  }
  // Upper part by a modified Lentz continued fraction.
  const double tiny = 1e-300;
  double b = x + 1.0 - s, c = 1.0 / tiny, d = 1.0 / b, f = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::tgamma(s) - std::exp(log_pref) * f;
}

double kummer_m(const HypergeomArgs& p) {
  check_args(p, "kummer_m");
  if (p.z == 0.0) return 1.0;
  if (p.z <= kSeriesSwitch || is_nonpositive_integer(p.a)) return m_series(p.a, p.b, p.z);
  return m_scaled_asymptotic(p.a, p.b, p.z) * std::exp(p.z);
}

double kummer_m_scaled(const HypergeomArgs& p) {
  check_args(p, "kummer_m_scaled");
  if (p.z <= kSeriesSwitch || is_nonpositive_integer(p.a))
    return m_series(p.a, p.b, p.z) * std::exp(-p.z);
  return m_scaled_asymptotic(p.a, p.b, p.z);
}

double tricomi_u_asymptotic(const HypergeomArgs& p, double* smallest_term) {
  if (!(p.z > 0.0)) throw InvalidArgument("asymptotic U needs z > 0");
  return std::pow(p.z, -p.a) * truncated_2f0(p.a, p.a - p.b + 1.0, -1.0 / p.z, smallest_term);
}

TricomiResult tricomi_u_combination(const HypergeomArgs& p) {
  check_args(p, "tricomi_u");
  const double a = p.a, b = p.b, z = p.z;
  TricomiResult r;
  double t1 = std::tgamma(1.0 - b) * rgamma(a - b + 1.0) * m_series(a, b, z);
  if (z == 0.0) {
    if (b > 1.0) throw DomainError(fmt::format("U(a, {}, 0) is singular", b), 0.0);
    r.value = t1;
    return r;
  }
  double t2 = std::tgamma(b - 1.0) * rgamma(a) * std::pow(z, 1.0 - b) *
              m_series(a - b + 1.0, 2.0 - b, z);
  r.value = t1 + t2;
  double big = std::max(std::abs(t1), std::abs(t2));
  r.digits_lost = r.value == 0.0 ? std::numeric_limits<double>::infinity()
                                 : std::max(0.0, std::log10(big / std::abs(r.value)));
  r.precision_warning = r.digits_lost > 6.0;
  return r;
}

namespace {

// Smallest z >= 30 (in steps of 10) where the truncated series for U and for
// its derivative both stop at a relative term below 1e-14.
double asymptotic_start(double a, double b) {
  double z = kUAsymptoticMin;
  for (; z < 400.0; z += 10.0) {
    double t0 = 0.0, t1 = 0.0;
    double s0 = truncated_2f0(a, a - b + 1.0, -1.0 / z, &t0);
    double s1 = truncated_2f0(a + 1.0, a - b + 1.0, -1.0 / z, &t1);
    if (t0 <= 1e-14 * std::abs(s0) && t1 <= 1e-14 * std::abs(s1)) break;
  }
  return z;
}

}  // namespace

TricomiResult tricomi_u(const HypergeomArgs& p) {
  check_args(p, "tricomi_u");
  if (std::abs(p.b - 0.5) > 1e-14 && std::abs(p.b - 1.5) > 1e-14)
    throw InvalidArgument(fmt::format("tricomi_u supports b = 1/2 or 3/2, got {}", p.b));
  if (p.z <= kUCombinationMax) return tricomi_u_combination(p);
  TricomiResult r;
  const double z0 = asymptotic_start(p.a, p.b);
  if (p.z >= z0) {
    r.value = tricomi_u_asymptotic(p);
    return r;
  }
  // z u'' + (b - z) u' - a u = 0, integrated from the asymptotic region down.
  const double a = p.a, b = p.b;
  double z = z0;
  double u = tricomi_u_asymptotic({a, b, z});
  double du = -a * tricomi_u_asymptotic({a + 1.0, b + 1.0, z});
  const std::size_t steps = static_cast<std::size_t>(std::ceil((z0 - p.z) / 2e-3));
  const double hstep = (p.z - z0) / static_cast<double>(steps);
  auto acc = [&](double zz, double uu, double vv) { return (a * uu - (b - zz) * vv) / zz; };
  for (std::size_t i = 0; i < steps; ++i) {
    double k1u = du, k1v = acc(z, u, du);
    double k2u = du + 0.5 * hstep * k1v, k2v = acc(z + 0.5 * hstep, u + 0.5 * hstep * k1u, k2u);
    double k3u = du + 0.5 * hstep * k2v, k3v = acc(z + 0.5 * hstep, u + 0.5 * hstep * k2u, k3u);
    double k4u = du + hstep * k3v, k4v = acc(z + hstep, u + hstep * k3u, k4u);
    u += hstep / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    du += hstep / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    z = z0 + static_cast<double>(i + 1) * hstep;
  }
  r.value = u;
  return r;
}

double mu0_threshold(double a, double k, double sigma, double beta0) {
  if (std::isfinite(sigma) && std::abs(sigma + 1.0) <= 1e-10)
    throw RangeError("mu0 prefactor diverges at sigma = -1", sigma);
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument(fmt::format("mu0: a = {} must be > 0", a));
  if (!(k > 0.0 && k <= 1.0)) throw InvalidArgument(fmt::format("mu0: k = {} must lie in (0, 1]", k));
  if (!(sigma > -3.0 && sigma < -1.0))
    throw InvalidArgument(fmt::format("mu0: sigma = {} must lie in (-3, -1)", sigma));
  if (!(beta0 > 0.0 && beta0 < 1.0))
    throw InvalidArgument(fmt::format("mu0: beta0 = {} must lie in (0, 1)", beta0));
  const double s1 = 0.5 * (sigma + 3.0), s2 = 0.5 * (sigma + 4.0), z = 0.25 * a * a;
  double bracket;
  if (z <= kUCombinationMax) {
    bracket = std::tgamma(s1) * kummer_m({s1, 0.5, z}) - a * std::tgamma(s2) * kummer_m({s2, 1.5, z});
  } else {
    // Same difference without the cancellation: it equals
    // Gamma(s1) Gamma(s2) / sqrt(pi) * U(s1, 1/2, z).
    bracket = std::tgamma(s1) * std::tgamma(s2) / std::sqrt(std::numbers::pi) *
              tricomi_u({s1, 0.5, z}).value;
  }
  double pref = (k * k / (beta0 * beta0)) * (1.0 - beta0 * beta0) / (std::pow(beta0, 1.0 + sigma) - 1.0);
  return pref * bracket;
}

}  // namespace qgr
