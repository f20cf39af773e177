#include "qgr/invariant_sets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "qgr/errors.hpp"
#include "qgr/renorm.hpp"
#include "qgr/special_fns.hpp"

namespace qgr {

namespace {

constexpr double kEnvelopeSlack = 1e-8;
constexpr double kWeightedSlack = 1e-6;

}  // namespace

void validate(const BoundsParams& b, double p) {
  auto bad = [](const std::string& what) { throw InvalidArgument("bounds: " + what); };
  if (!(b.a > 0.0)) bad(fmt::format("a = {} must be > 0", b.a));
  if (!(b.k > 0.0 && b.k <= 1.0)) bad(fmt::format("k = {} must lie in (0, 1]", b.k));
  if (!(b.K > 0.0)) bad("K must be > 0");
  if (!(b.A > 0.0)) bad("A must be > 0");
  if (!(b.alpha > 0.0 && b.alpha < 1.0)) bad(fmt::format("alpha = {} must lie in (0, 1)", b.alpha));
  if (!(p >= 1.0)) bad(fmt::format("p = {} must be >= 1", p));
  if (!(b.alpha < 1.0 / p)) bad(fmt::format("alpha = {} must be below 1/p = {}", b.alpha, 1.0 / p));
  if (!(b.delta0 > 0.0)) bad("delta0 must be > 0");
  if (!(b.mu > 0.0)) bad("mu must be > 0");
  if (!(b.sigma > -3.0 && b.sigma < -1.0)) bad(fmt::format("sigma = {} must lie in (-3, -1)", b.sigma));
  if (!(b.nu_exp > -1.0 - b.sigma && b.nu_exp < 1.0))
    bad(fmt::format("nu_exp = {} must lie in ({}, 1)", b.nu_exp, -1.0 - b.sigma));
}

EvenFn candidate_member(double k, double nu_exp, double a, const GridSpec& grid) {
  if (!(k > 0.0 && k <= 1.0) || !(nu_exp > 0.0 && nu_exp < 1.0) || !(a > 0.0))
    throw InvalidArgument(fmt::format("candidate_member: bad parameters ({}, {}, {})", k, nu_exp, a));
  return sample(grid, a, Repr::Psi, [&](double eta) {
    return k * std::min(1.0, std::pow(eta, nu_exp)) * std::exp(-a * eta);
  });
}

MembershipReport check_E_ak(const EvenFn& f, double a, double k) {
  if (f.repr() != Repr::Psi) throw InvalidArgument("check_E_ak expects Psi representation");
  const auto& g = f.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i)
    worst = std::max(worst, std::abs(f.value(i)) / (k * std::exp(-a * g.node(i))));
  MembershipReport r;
  r.worst_envelope_ratio = worst;
  r.in_E_ak = worst <= 1.0 + 1e-9;
  return r;
}

MembershipReport check_holder(const EvenFn& f, const BoundsParams& params, double p) {
  if (f.repr() != Repr::Psi) throw InvalidArgument("check_holder expects Psi representation");
  const double d0 = params.delta0;
  const std::vector<double> coarse{d0 / 8, d0 / 4, d0 / 2, d0};
  const std::vector<double> fine{d0 / 32, d0 / 16, d0 / 8, d0 / 4};
  auto w = holder_modulus_profile(f, params.alpha, coarse);
  auto wf = holder_modulus_profile(f, params.alpha, fine);
  MembershipReport r;
  r.holder_norm = lp_norm(w, p);
  double sup_c = sup_norm_nodes(w), sup_f = sup_norm_nodes(wf);
  r.modulus_growth = sup_c > 0.0 ? sup_f / sup_c : (sup_f > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  const auto& g = f.grid();
  double need_A = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    double eta = g.node(i);
    if (eta <= 1.0) continue;
    need_A = std::max(need_A, w.value(i) / (eta * std::exp(-params.a * eta)));
  }
  r.min_envelope_A = need_A;
  r.modulus_envelope_ok = need_A <= params.A;
  r.in_holder = r.holder_norm <= params.K && r.modulus_growth <= 1.25;
  return r;
}

MembershipReport check_M(const EvenFn& f, double mu, double sigma, double local_order_hint) {
  MembershipReport r;
  r.I_value = weighted_integral_I(f, sigma, local_order_hint);
  r.in_M = r.I_value >= mu;
  return r;
}

std::optional<double> locate_a0(double k, double nu_exp, double sigma, double beta0,
                                const std::vector<double>& as, const GridSpec& grid) {
  for (double a : as) {
    double I = weighted_integral_I(candidate_member(k, nu_exp, a, grid), sigma, nu_exp);
    if (I > mu0_threshold(a, k, sigma, beta0)) return a;
  }
  return std::nullopt;
}

namespace {

// Low-order even trigonometric polynomial with sup <= 1.
struct Modulation {
  double omega = 1.0;
  std::array<double, 4> c{};
  double operator()(double eta) const {
    double s = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      s += c[j] * std::cos(static_cast<double>(j) * omega * eta);
      norm += std::abs(c[j]);
    }
    return norm > 0.0 ? s / norm : 0.0;
  }
};

Modulation draw_modulation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0), freq(0.3, 1.5);
  Modulation m;
  m.omega = freq(rng);
  for (auto& c : m.c) c = coef(rng);
  return m;
}

}  // namespace

InvarianceReport invariance_experiment(const InvarianceConfig& cfg) {
  const auto& b = cfg.bounds;
  validate(b, cfg.p);
  if (!(cfg.beta0 > 0.0 && cfg.beta0 < 1.0)) throw InvalidArgument("beta0 must lie in (0, 1)");
  for (double beta : cfg.betas)
    if (!(beta > cfg.beta0 && beta < 1.0))
      throw InvalidArgument(fmt::format("beta = {} is outside ({}, 1)", beta, cfg.beta0));
  InvarianceReport rep;
  rep.config = cfg;
  rep.mu0 = mu0_threshold(b.a, b.k, b.sigma, cfg.beta0);
  if (!(b.mu > rep.mu0))
    throw InvalidArgument(fmt::format("mu = {} does not exceed mu0 = {}", b.mu, rep.mu0));
  for (double beta : cfg.betas) {
    BetaTally t;
    t.beta = beta;
    t.worst_envelope_margin = std::numeric_limits<double>::infinity();
    t.worst_weighted_margin = std::numeric_limits<double>::infinity();
    rep.tallies.push_back(t);
  }
  if (cfg.n_samples == 0) return rep;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> depth(0.0, 0.5);
  const auto& g = cfg.grid;
  auto base = candidate_member(b.k, b.nu_exp, b.a, g);

  auto envelope_margin = [&](const EvenFn& Rf) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.n_points; ++i)
      worst = std::min(worst, b.k * std::exp(-b.a * g.node(i)) - std::abs(Rf.value(i)));
    return worst;
  };

  auto test_member = [&](const EvenFn& f, const std::string& family, std::size_t idx, bool weighted) {
    for (std::size_t j = 0; j < cfg.betas.size(); ++j) {
      auto& t = rep.tallies[j];
      auto Rf = apply_psi(f, {cfg.betas[j], 2.0});
      double em = envelope_margin(Rf);
      ++t.envelope_tested;
      t.worst_envelope_margin = std::min(t.worst_envelope_margin, em);
      if (em >= -kEnvelopeSlack) ++t.envelope_pass;
      else rep.failures.push_back({family, idx, cfg.betas[j], "envelope", em, Rf});
      if (check_holder(Rf, b, cfg.p).in_holder.value_or(false)) ++t.holder_pass;
      if (weighted) {
        double wm = weighted_integral_I(Rf, b.sigma, b.nu_exp) - b.mu;
        ++t.weighted_tested;
        t.worst_weighted_margin = std::min(t.worst_weighted_margin, wm);
        if (wm >= -kWeightedSlack) ++t.weighted_pass;
        else rep.failures.push_back({family, idx, cfg.betas[j], "weighted", wm, Rf});
      }
    }
  };

  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    auto m = draw_modulation(rng);
    auto f = sample(g, b.a, Repr::Psi, [&](double eta) { return b.k * std::exp(-b.a * eta) * m(eta); });
    test_member(f, "envelope", s, false);
  }
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    bool drawn = false;
    for (int attempt = 0; attempt < 100 && !drawn; ++attempt) {
      auto m = draw_modulation(rng);
      double eps = depth(rng);
      auto f = sample(g, b.a, Repr::Psi, [&](double eta) {
        return base(eta) * (1.0 - eps * 0.5 * (1.0 + m(eta)));
      });
      if (weighted_integral_I(f, b.sigma, b.nu_exp) < b.mu) continue;
      drawn = true;
      test_member(f, "weighted", s, true);
    }
    if (!drawn) rep.failures.push_back({"weighted", s, 0.0, "draw", 0.0, base});
  }
  return rep;
}

}  // namespace qgr
