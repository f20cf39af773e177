#include "qgr/qg_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "numerics.hpp"
#include "qgr/errors.hpp"

namespace qgr {

std::string to_string(Kernel k) {
  return k == Kernel::HalflineConv ? "halfline" : "fullline";
}

Kernel kernel_from_string(const std::string& s) {
  if (s == "halfline" || s == "HalflineConv") return Kernel::HalflineConv;
  if (s == "fullline" || s == "FulllineSgn") return Kernel::FulllineSgn;
  throw InvalidArgument(fmt::format("unknown kernel '{}'", s));
}

GridSpec default_sim_grid(double T) {
  if (!(T > 0.0)) throw InvalidArgument(fmt::format("blow-up time must be > 0, got {}", T));
  return make_grid(40.0 / std::sqrt(T), 4097);
}

SimState init_state(const EvenFn& psi, double T, const GridSpec& grid_y, Kernel kernel) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw InvalidArgument(fmt::format("blow-up time must be > 0, got {}", T));
  if (psi.repr() != Repr::Psi) throw InvalidArgument("init_state expects a Psi-representation profile");
  SimState s;
  s.grid_y = grid_y;
  s.T = T;
  s.kernel = kernel;
  s.seed = psi;
  s.v = self_similar_reference(psi, 0.0, T, grid_y);
  return s;
}

std::vector<double> self_similar_reference(const EvenFn& psi, double t, double T,
                                           const GridSpec& grid_y) {
  if (!(t >= 0.0) || !(t < T)) throw InvalidArgument(fmt::format("reference needs 0 <= t < T (t = {}, T = {})", t, T));
  const double tau = std::sqrt(T - t);
  std::vector<double> v(grid_y.n_points);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = psi(grid_y.node(i) * tau);
  return v;
}

namespace {

std::vector<double> halfline(const GridSpec& g, const std::vector<double>& v) {
  const std::size_t n = v.size();
  const double h = g.spacing;
  std::vector<double> out(n, 0.0);
  std::vector<double> w;
  for (std::size_t i = 1; i < n; ++i) {
    w = detail::simpson_weights(i);
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += w[j] * v[j] * v[i - j];
    out[i] = g.node(i) * acc * h;
  }
  return out;
}

std::vector<double> fullline(const GridSpec& g, const std::vector<double>& v) {
  const long n = static_cast<long>(v.size());
  const double h = g.spacing;
  std::vector<double> out(v.size(), 0.0);
  auto at = [&](long k) { k = std::abs(k); return k < n ? v[static_cast<std::size_t>(k)] : 0.0; };
  for (long i = 1; i < n; ++i) {
    // z below y (sgn = +1) over [i - n + 1, i], z above y (sgn = -1) over [i, n - 1].
    long lo = i - n + 1;
    auto wl = detail::simpson_weights(static_cast<std::size_t>(i - lo));
    double left = 0.0;
    for (long j = lo; j <= i; ++j) left += wl[static_cast<std::size_t>(j - lo)] * at(i - j) * at(j);
    double right = 0.0;
    if (i < n - 1) {
      auto wr = detail::simpson_weights(static_cast<std::size_t>(n - 1 - i));
      for (long j = i; j <= n - 1; ++j) right += wr[static_cast<std::size_t>(j - i)] * at(j - i) * at(j);
    }
    out[static_cast<std::size_t>(i)] = g.node(static_cast<std::size_t>(i)) * (left - right) * h;
  }
  return out;
}

}  // namespace

std::vector<double> nonlinear_term(const SimState& s) {
  if (!s.nonlinear) return std::vector<double>(s.v.size(), 0.0);
  return s.kernel == Kernel::HalflineConv ? halfline(s.grid_y, s.v) : fullline(s.grid_y, s.v);
}

double phi1(double x) {
  if (std::abs(x) < 1e-5) return 1.0 + x / 2.0 + x * x / 6.0;
  return std::expm1(x) / x;
}

double phi2(double x) {
  if (std::abs(x) < 0.1) {
    double s = 0.0, term = 0.5;
    for (int k = 0; k < 12; ++k) {
      s += term;
      term *= x / (k + 3.0);
    }
    return s;
  }
  return (std::expm1(x) - x) / (x * x);
}

SimState step(const SimState& s, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument(fmt::format("time step must be > 0, got {}", dt));
  if (!(s.t + dt < s.T)) throw InvalidArgument(fmt::format("step would reach the blow-up time ({} + {} >= {})", s.t, dt, s.T));
  const auto& g = s.grid_y;
  const std::size_t n = s.v.size();
  std::vector<double> E(n), P1(n), P2(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = g.node(i);
    double x = -y * y * dt;
    E[i] = std::exp(x);
    P1[i] = phi1(x);
    P2[i] = phi2(x);
  }
  auto N0 = nonlinear_term(s);
  SimState pred = s;
  for (std::size_t i = 0; i < n; ++i) pred.v[i] = E[i] * s.v[i] + dt * P1[i] * N0[i];
  SimState out = pred;
  if (s.nonlinear) {
    auto Na = nonlinear_term(pred);
    for (std::size_t i = 0; i < n; ++i) out.v[i] = pred.v[i] + dt * P2[i] * (Na[i] - N0[i]);
  }
  out.t = s.t + dt;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(out.v[i]))
      throw OverflowError(fmt::format("field overflowed at t = {}, y = {}", out.t, g.node(i)), out.t);
  return out;
}

namespace {

double moment(const GridSpec& g, const std::vector<double>& v, bool weighted) {
  const std::size_t n = v.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double yy = g.node(i);
    y[i] = v[i] * v[i] * (weighted ? yy * yy : 1.0);
  }
  double body = detail::simpson_sum(y, 0, n - 1, g.spacing);
  double tail = 0.0;
  double a = std::abs(v[n - 2]), b = std::abs(v[n - 1]);
  if (b > 0.0 && a > b) {
    double r = std::log(a / b) / g.spacing;
    double L = g.half_width;
    tail = b * b / (2.0 * r) * (weighted ? L * L : 1.0);
  }
  return 2.0 * (body + tail);
}

}  // namespace

double energy(const GridSpec& g, const std::vector<double>& v) { return moment(g, v, false); }
double enstrophy(const GridSpec& g, const std::vector<double>& v) { return moment(g, v, true); }
double energy(const SimState& s) { return energy(s.grid_y, s.v); }
double enstrophy(const SimState& s) { return enstrophy(s.grid_y, s.v); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  double den = m * sxx - sx * sx;
  return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (m * sxy - sx * sy) / den;
}

namespace {

double profile_error(const SimState& s, double window) {
  if (!s.seed) return std::numeric_limits<double>::quiet_NaN();
  const double tau = std::sqrt(s.T - s.t);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    double eta = s.grid_y.node(i) * tau;
    if (eta > window) break;
    double ref = (*s.seed)(eta);
    err = std::max(err, std::abs(s.v[i] - ref));
    scale = std::max(scale, std::abs(ref));
  }
  return scale > 0.0 ? err / scale : err;
}

}  // namespace

ScalingReport run_and_fit(const SimState& state0, double t_end_frac, std::size_t n_samples,
                          const RunOptions& opt) {
  if (!(t_end_frac > 0.0 && t_end_frac < 1.0))
    throw InvalidArgument(fmt::format("t_end_frac must lie in (0, 1), got {}", t_end_frac));
  if (n_samples < 2) throw InvalidArgument("run_and_fit needs at least 2 samples");
  if (!(opt.dt_max > 0.0)) throw InvalidArgument("dt_max must be > 0");
  const double T = state0.T;
  ScalingReport rep;
  std::vector<double> targets(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k)
    targets[k] = state0.t + (T - state0.t) *
                 (1.0 - std::pow(1.0 - t_end_frac, static_cast<double>(k) / static_cast<double>(n_samples - 1)));
  targets.back() = state0.t + (T - state0.t) * t_end_frac;
  SimState s = state0;
  auto record = [&](const SimState& x) {
    rep.sample_times.push_back(x.t);
    rep.T_minus_t.push_back(T - x.t);
    rep.energies.push_back(energy(x));
    rep.enstrophies.push_back(enstrophy(x));
    rep.profile_errors.push_back(profile_error(x, opt.profile_window));
  };
  record(s);
  try {
    for (std::size_t k = 1; k < n_samples; ++k) {
      while (s.t < targets[k]) {
        double dt = std::min({opt.dt_max, 0.01 * (T - s.t), targets[k] - s.t});
        if (targets[k] - s.t - dt < 1e-12 * T) dt = targets[k] - s.t;
        s = step(s, dt);
        ++rep.steps;
      }
      s.t = targets[k];
      record(s);
    }
  } catch (const OverflowError& e) {
    rep.failed = true;
    rep.failure_time = e.where();
    rep.failure_message = e.what();
  }
  rep.final_field = s.v;
  rep.max_profile_error = 0.0;
  for (double e : rep.profile_errors)
    if (std::isfinite(e)) rep.max_profile_error = std::max(rep.max_profile_error, e);
  bool all_zero = std::all_of(rep.energies.begin(), rep.energies.end(), [](double e) { return e == 0.0; });
  if (all_zero) {
    rep.degenerate = true;
    rep.energy_slope = rep.enstrophy_slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.energy_slope = loglog_slope(rep.T_minus_t, rep.energies);
    rep.enstrophy_slope = loglog_slope(rep.T_minus_t, rep.enstrophies);
  }
  rep.reference_energy_slope = rep.reference_enstrophy_slope = std::numeric_limits<double>::quiet_NaN();
  if (state0.seed && !rep.degenerate) {
    std::vector<double> re, ro;
    for (double t : rep.sample_times) {
      auto ref = self_similar_reference(*state0.seed, t, T, state0.grid_y);
      re.push_back(energy(state0.grid_y, ref));
      ro.push_back(enstrophy(state0.grid_y, ref));
    }
    rep.reference_energy_slope = loglog_slope(rep.T_minus_t, re);
    rep.reference_enstrophy_slope = loglog_slope(rep.T_minus_t, ro);
  }
  return rep;
}

}  // namespace qgr
