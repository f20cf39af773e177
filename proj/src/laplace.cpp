#include "qgr/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "numerics.hpp"
#include "qgr/errors.hpp"
#include "qgr/special_fns.hpp"

namespace qgr {

using cplx = std::complex<double>;

namespace {

constexpr int kTalbotNodes = 24;
constexpr int kStehfestTerms = 16;
constexpr double kComplexSeriesMax = 40.0;

double kappa_of(HatVariant v) { return v == HatVariant::QuarterArgument ? 0.25 : 0.5; }

}  // namespace

double numeric_laplace(const EvenFn& f, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument(fmt::format("Laplace variable must be > 0, got {}", s));
  if (f.repr() != Repr::Psi) throw InvalidArgument("numeric_laplace expects a Psi-representation profile");
  const auto& g = f.grid();
  const double L = g.half_width;
  double body = detail::cellwise_gauss<6>(0.0, L, g.spacing,
                                          [&](double x) { return std::exp(-s * x) * f(x); });
  double tail = f.values().back() * std::exp(-s * L) / (s + f.tail_rate());
  return body + tail;
}

double numeric_laplace(const LimitOdeSolution& f, double s) {
  if (f.tail_class == TailClass::Growing)
    throw InvalidArgument(fmt::format("Laplace transform of a growing profile (nu = {})", f.nu));
  return numeric_laplace(f.samples, s);
}

double riccati_residual(const std::function<double(double)>& hat, double nu, double s) {
  const double d = 1e-4 * std::max(1.0, s);
  const double h0 = hat(s);
  const double dh = (hat(s + d) - hat(s - d)) / (2.0 * d);
  return std::abs(dh + h0 * h0 + 0.5 * s * h0 - 0.5 * nu);
}

namespace {

// exp(-z)-scaled bracket pieces: value and z-derivative of M(a, 1/2, z) and
// U(a, 1/2, z).
struct Bracket {
  double m0, m1, u0, u1;
};

Bracket bracket_terms(double nu, double z) {
  const double a = 0.5 * (1.0 + nu);
  Bracket b{};
  b.m0 = kummer_m_scaled({a, 0.5, z});
  b.m1 = 2.0 * a * kummer_m_scaled({a + 1.0, 1.5, z});
  double ez = std::exp(-z);
  b.u0 = ez * tricomi_u({a, 0.5, z}).value;
  b.u1 = -a * ez * tricomi_u({a + 1.0, 1.5, z}).value;
  return b;
}

}  // namespace

double closed_form_hat(double s, double nu, double c1, double c2, HatVariant variant) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument(fmt::format("closed_form_hat needs s > 0, got {}", s));
  const double kappa = kappa_of(variant);
  const double z = kappa * s * s;
  auto b = bracket_terms(nu, z);
  double den = c1 * b.m0 + c2 * b.u0;
  if (!(den > 0.0))
    throw DomainError(fmt::format("log argument of the closed form is {} at s = {}", den, s), s);
  return -0.5 * s + 2.0 * kappa * s * (c1 * b.m1 + c2 * b.u1) / den;
}

namespace {

// Power series of M(a, b, z) at complex z with the largest term magnitude.
cplx m_series_c(double a, double b, cplx z, double& peak) {
  cplx term = 1.0, sum = 1.0;
  peak = 1.0;
  for (int k = 0; k < 4000; ++k) {
    term *= (a + k) * z / ((b + k) * (k + 1.0));
    sum += term;
    peak = std::max(peak, std::abs(term));
    if (term == 0.0) break;
    if (k > std::abs(z) + std::abs(a) && std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Uses Kummer's transformation when it cancels less.
cplx m_complex(double a, double b, cplx z, double& loss) {
  double p1;
  cplx direct = m_series_c(a, b, z, p1);
  double l1 = std::log10(p1 / std::max(std::abs(direct), 1e-300));
  if (l1 < 3.0) {
    loss = std::max(0.0, l1);
    return direct;
  }
  double p2;
  cplx t = m_series_c(b - a, b, -z, p2);
  cplx via = std::exp(z) * t;
  double l2 = std::log10(p2 / std::max(std::abs(t), 1e-300));
  if (l2 < l1) {
    loss = std::max(0.0, l2);
    return via;
  }
  loss = std::max(0.0, l1);
  return direct;
}

cplx asymptotic_hat(cplx s, double nu) {
  auto a = limit_ode_taylor(nu, 80);
  cplx sum = 0.0, inv = 1.0 / s;
  cplx pw = inv;
  double fact = 1.0, prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (n > 0) fact *= static_cast<double>(n);
    cplx term = fact * a[n] * pw;
    double mag = std::abs(term);
    if (a[n] != 0.0) {
      if (mag > prev) break;
      prev = mag;
    }
    sum += term;
    pw *= inv;
    if (!std::isfinite(fact)) break;
  }
  return sum;
}

}  // namespace

cplx closed_form_hat_complex(cplx s, double nu, double c1, double c2, HatVariant variant) {
  const double kappa = kappa_of(variant);
  const cplx z = kappa * s * s;
  if (std::abs(z) <= kComplexSeriesMax) {
    const double a = 0.5 * (1.0 + nu);
    const double sp = std::sqrt(std::numbers::pi);
    const cplx r = std::sqrt(kappa) * s;  // continuation of sqrt(z)
    double l[5];
    cplx Ma = m_complex(a, 0.5, z, l[0]);
    cplx Ma1 = m_complex(a + 1.0, 1.5, z, l[1]);
    cplx Mh = m_complex(a + 0.5, 1.5, z, l[2]);
    cplx Mh0 = m_complex(a + 0.5, 0.5, z, l[3]);
    l[4] = 0.0;
    cplx m0 = Ma, m1 = 2.0 * a * Ma1;
    cplx ua = sp / std::tgamma(a + 0.5) * Ma;
    cplx ub = -2.0 * sp / std::tgamma(a) * r * Mh;
    cplx u0 = ua + ub;
    // dU/dz = -a U(a+1, 3/2, z)
    cplx va = -2.0 * sp / std::tgamma(a + 0.5) * Ma1;
    cplx vb = sp / std::tgamma(a + 1.0) / r * Mh0;
    cplx u1 = -a * (va + vb);
    cplx num = c1 * m1 + c2 * u1, den = c1 * m0 + c2 * u0;
    double worst = *std::max_element(l, l + 5);
    if (c2 != 0.0) {
      double big = std::max(std::abs(ua), std::abs(ub)) * std::abs(c2);
      worst += std::max(0.0, std::log10(big / std::max(std::abs(den), 1e-300)));
    }
    if (worst < 8.0 && std::abs(den) > 0.0) return -0.5 * s + 2.0 * kappa * s * num / den;
  }
  if (c1 == 0.0)
    throw DomainError("large-|s| expansion needs a non-zero M component", std::abs(s));
  return asymptotic_hat(s, nu);
}

RiccatiSolution fit_riccati_constants(double nu, std::span<const double> s_ref,
                                      std::span<const double> targets, HatVariant variant) {
  if (s_ref.empty() || s_ref.size() != targets.size())
    throw InvalidArgument("fit_riccati_constants needs matching, non-empty reference lists");
  const double kappa = kappa_of(variant);
  // Each reference gives c1 p + c2 q = 0; minimise over unit (c1, c2).
  double a11 = 0, a12 = 0, a22 = 0;
  for (std::size_t j = 0; j < s_ref.size(); ++j) {
    double s = s_ref[j], h = targets[j];
    auto b = bracket_terms(nu, kappa * s * s);
    double p = 2.0 * kappa * s * b.m1 - (h + 0.5 * s) * b.m0;
    double q = 2.0 * kappa * s * b.u1 - (h + 0.5 * s) * b.u0;
    double nrm = std::hypot(p, q);
    if (nrm == 0.0) continue;
    p /= nrm;
    q /= nrm;
    a11 += p * p;
    a12 += p * q;
    a22 += q * q;
  }
  double tr = a11 + a22, det = a11 * a22 - a12 * a12;
  double lam = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  double c1, c2;
  if (std::abs(a12) > 1e-300) {
    c1 = a12;
    c2 = lam - a11;
  } else if (a11 <= a22) {
    c1 = 1.0;
    c2 = 0.0;
  } else {
    c1 = 0.0;
    c2 = 1.0;
  }
  double nrm = std::hypot(c1, c2);
  c1 /= nrm;
  c2 /= nrm;
  auto b0 = bracket_terms(nu, kappa * s_ref[0] * s_ref[0]);
  if (c1 * b0.m0 + c2 * b0.u0 < 0.0) {
    c1 = -c1;
    c2 = -c2;
  }
  RiccatiSolution out;
  out.nu = nu;
  out.c1 = c1;
  out.c2 = c2;
  out.variant = variant;
  out.fit_residual = std::sqrt(std::max(0.0, lam));
  for (int k = 0; k <= 40; ++k) {
    double s = std::pow(10.0, -1.0 + 0.075 * k);
    out.s_grid.push_back(s);
    try {
      out.hat_values.push_back(closed_form_hat(s, nu, c1, c2, variant));
    } catch (const DomainError&) {
      out.hat_values.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

namespace {

double talbot(const LaplaceTransform& F, double t) {
  if (!F.complex) throw InvalidArgument("Talbot inversion needs complex evaluation of F");
  const int M = kTalbotNodes;
  const double r = 2.0 * M / (5.0 * t);
  double sum = 0.5 * std::real(F.complex(cplx(r, 0.0))) * std::exp(r * t);
  for (int k = 1; k < M; ++k) {
    double th = k * std::numbers::pi / M;
    double cot = std::cos(th) / std::sin(th);
    cplx s(r * th * cot, r * th);
    double sig = th + (th * cot - 1.0) * cot;
    sum += std::real(std::exp(t * s) * F.complex(s) * cplx(1.0, sig));
  }
  return r / M * sum;
}

const std::vector<double>& stehfest_weights() {
  static const std::vector<double> V = [] {
    const int N = kStehfestTerms, half = N / 2;
    std::vector<double> v(N + 1, 0.0);
    auto fact = [](int n) { return std::tgamma(n + 1.0); };
    for (int k = 1; k <= N; ++k) {
      double s = 0.0;
      for (int j = (k + 1) / 2; j <= std::min(k, half); ++j)
        s += std::pow(j, half) * fact(2 * j) /
             (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
      v[k] = ((k + half) % 2 ? -1.0 : 1.0) * s;
    }
    return v;
  }();
  return V;
}

double stehfest(const LaplaceTransform& F, double t) {
  std::function<double(double)> real = F.real;
  if (!real) real = [&F](double s) { return std::real(F.complex(cplx(s, 0.0))); };
  const auto& V = stehfest_weights();
  const double ln2t = std::numbers::ln2 / t;
  double sum = 0.0;
  for (int k = 1; k <= kStehfestTerms; ++k) sum += V[k] * real(k * ln2t);
  return ln2t * sum;
}

}  // namespace

double inverse_laplace(const LaplaceTransform& F, double eta, InversionMethod method) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw InvalidArgument(fmt::format("inverse_laplace needs eta > 0, got {}", eta));
  if (!F.real && !F.complex) throw InvalidArgument("inverse_laplace: empty transform");
  return method == InversionMethod::TalbotContour ? talbot(F, eta) : stehfest(F, eta);
}

CheckedInversion inverse_laplace_checked(const LaplaceTransform& F, double eta) {
  CheckedInversion c;
  c.talbot = inverse_laplace(F, eta, InversionMethod::TalbotContour);
  c.stehfest = inverse_laplace(F, eta, InversionMethod::GaverStehfest);
  double scale = std::max(std::abs(c.talbot), std::abs(c.stehfest));
  c.rel_diff = scale > 0.0 ? std::abs(c.talbot - c.stehfest) / scale : 0.0;
  if (scale >= 0.01 && c.rel_diff > 1e-2)
    throw UnstableInversion(fmt::format(
        "inversion methods disagree at eta = {}: Talbot {:.10g}, Stehfest {:.10g}", eta,
        c.talbot, c.stehfest));
  return c;
}

}  // namespace qgr
