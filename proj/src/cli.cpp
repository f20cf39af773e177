#include "qgr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qgr/errors.hpp"
#include "qgr/fixed_point.hpp"
#include "qgr/io.hpp"
#include "qgr/laplace.hpp"
#include "qgr/renorm.hpp"
#include "qgr/special_fns.hpp"

namespace qgr::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using io::format_double;
using io::num;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("cannot parse '{}' as a number", item));
    }
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, v));
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a non-negative integer", key, v));
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("{}: cannot parse '{}' as a boolean", key, v));
}

Kernel parse_kernel(const std::string& v) {
  try {
    return kernel_from_string(v);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

using Setter = std::function<void(const std::string&)>;

std::map<std::string, Setter> ini_setters(RunConfig& c) {
  auto& g = c.global;
  auto& f = c.fixpoint;
  auto& s = c.simulate;
  auto& v = c.invariance;
  auto& b = v.bounds;
  auto dbl = [](double& dst, std::string key) {
    return Setter([&dst, key](const std::string& x) { dst = parse_double(key, x); });
  };
  auto odbl = [](std::optional<double>& dst, std::string key) {
    return Setter([&dst, key](const std::string& x) { dst = parse_double(key, x); });
  };
  auto sz = [](std::size_t& dst, std::string key) {
    return Setter([&dst, key](const std::string& x) { dst = parse_uint(key, x); });
  };
  auto osz = [](std::optional<std::size_t>& dst, std::string key) {
    return Setter([&dst, key](const std::string& x) { dst = parse_uint(key, x); });
  };
  auto flag = [](bool& dst, std::string key) {
    return Setter([&dst, key](const std::string& x) { dst = parse_bool(key, x); });
  };
  auto list = [](std::vector<double>& dst) {
    return Setter([&dst](const std::string& x) { dst = parse_list(x); });
  };
  return {
      {"global.out", [&g](const std::string& x) { g.out = x; }},
      {"global.seed", [&g](const std::string& x) { g.seed = parse_uint("global.seed", x); }},
      {"global.grid_L", odbl(g.grid_L, "global.grid_L")},
      {"global.grid_N", osz(g.grid_N, "global.grid_N")},
      {"fixpoint.bracket_lo", dbl(f.bracket_lo, "fixpoint.bracket_lo")},
      {"fixpoint.bracket_hi", dbl(f.bracket_hi, "fixpoint.bracket_hi")},
      {"fixpoint.tol", dbl(f.tol, "fixpoint.tol")},
      {"fixpoint.betas", list(f.betas)},
      {"fixpoint.nu", odbl(f.nu, "fixpoint.nu")},
      {"fixpoint.verify_only", flag(f.verify_only, "fixpoint.verify_only")},
      {"fixpoint.gamma", dbl(f.gamma, "fixpoint.gamma")},
      {"fixpoint.p", dbl(f.p, "fixpoint.p")},
      {"fixpoint.picard_beta", dbl(f.picard_beta, "fixpoint.picard_beta")},
      {"fixpoint.picard_damping", dbl(f.picard_damping, "fixpoint.picard_damping")},
      {"fixpoint.picard_max_iter",
       [&f](const std::string& x) { f.picard_max_iter = static_cast<int>(parse_uint("fixpoint.picard_max_iter", x)); }},
      {"simulate.T", dbl(s.T, "simulate.T")},
      {"simulate.t_end", dbl(s.t_end, "simulate.t_end")},
      {"simulate.n_samples", sz(s.n_samples, "simulate.n_samples")},
      {"simulate.kernel", [&s](const std::string& x) { s.kernel = parse_kernel(x); }},
      {"simulate.seed_profile", [&s](const std::string& x) { s.seed_profile = x; }},
      {"simulate.dt_max", dbl(s.dt_max, "simulate.dt_max")},
      {"simulate.nonlinear", flag(s.nonlinear, "simulate.nonlinear")},
      {"simulate.grid_y_L", odbl(s.grid_y_L, "simulate.grid_y_L")},
      {"simulate.grid_y_N", osz(s.grid_y_N, "simulate.grid_y_N")},
      {"invariance.a", dbl(b.a, "invariance.a")},
      {"invariance.k", dbl(b.k, "invariance.k")},
      {"invariance.K", dbl(b.K, "invariance.K")},
      {"invariance.A", dbl(b.A, "invariance.A")},
      {"invariance.alpha", dbl(b.alpha, "invariance.alpha")},
      {"invariance.delta0", dbl(b.delta0, "invariance.delta0")},
      {"invariance.sigma", dbl(b.sigma, "invariance.sigma")},
      {"invariance.nu_exp", dbl(b.nu_exp, "invariance.nu_exp")},
      {"invariance.mu", odbl(v.mu, "invariance.mu")},
      {"invariance.mu_factor", dbl(v.mu_factor, "invariance.mu_factor")},
      {"invariance.beta0", dbl(v.beta0, "invariance.beta0")},
      {"invariance.betas", list(v.betas)},
      {"invariance.n_samples", sz(v.n_samples, "invariance.n_samples")},
      {"invariance.p", dbl(v.p, "invariance.p")},
  };
}

}  // namespace

void load_ini(const fs::path& path, RunConfig& config) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  auto setters = ini_setters(config);
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(fmt::format("config '{}': key '{}' outside a section", path.string(), section));
    for (const auto& [key, value] : body) {
      std::string full = section + "." + key;
      auto it = setters.find(full);
      if (it == setters.end()) throw ConfigError(fmt::format("config '{}': unknown key '{}'", path.string(), full));
      it->second(value.get_value<std::string>());
    }
  }
}

GridSpec resolve_grid(const GlobalOptions& g) {
  GridSpec d = default_grid();
  return make_grid(g.grid_L.value_or(d.half_width), g.grid_N.value_or(d.n_points));
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_betas(const std::vector<double>& betas, const std::string& where) {
  for (double b : betas) require(b > 0.0 && b < 1.0, fmt::format("{}: beta = {} must lie in (0, 1)", where, b));
}

GridSpec sim_grid(const SimulateOptions& s) {
  GridSpec d = default_sim_grid(s.T);
  return make_grid(s.grid_y_L.value_or(d.half_width), s.grid_y_N.value_or(d.n_points));
}

}  // namespace

void validate(const RunConfig& c) {
  try {
    resolve_grid(c.global);
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("grid: {}", e.what()));
  }
  if (c.command == "fixpoint") {
    const auto& f = c.fixpoint;
    require(f.bracket_lo >= 0.0 && f.bracket_lo < f.bracket_hi,
            fmt::format("fixpoint: bracket ({}, {}) must satisfy 0 <= lo < hi", f.bracket_lo, f.bracket_hi));
    require(f.tol > 0.0, "fixpoint: tol must be > 0");
    require(!f.betas.empty(), "fixpoint: beta list is empty");
    check_betas(f.betas, "fixpoint");
    require(f.gamma > 0.0, fmt::format("fixpoint: gamma = {} must be > 0", f.gamma));
    require(f.p >= 1.0, "fixpoint: p must be >= 1");
    require(!f.nu || *f.nu >= 0.0, "fixpoint: nu must be >= 0");
    require(!f.verify_only || f.nu.has_value(), "fixpoint: --verify-only needs --nu");
    require(f.gamma == 2.0 || f.nu.has_value(), "fixpoint: gamma != 2 is evaluation-only and needs --nu");
    require(f.picard_beta > 0.0 && f.picard_beta < 1.0, "fixpoint: picard_beta must lie in (0, 1)");
    require(f.picard_damping > 0.0 && f.picard_damping <= 1.0, "fixpoint: picard_damping must lie in (0, 1]");
    require(f.picard_max_iter >= 0, "fixpoint: picard_max_iter must be >= 0");
  } else if (c.command == "simulate") {
    const auto& s = c.simulate;
    require(s.T > 0.0 && std::isfinite(s.T), fmt::format("simulate: T = {} must be > 0", s.T));
    require(s.t_end > 0.0 && s.t_end < 1.0, fmt::format("simulate: t_end = {} must lie in (0, 1)", s.t_end));
    require(s.n_samples >= 2, "simulate: n_samples must be >= 2");
    require(s.dt_max > 0.0, "simulate: dt_max must be > 0");
    require(s.seed_profile == "fixpoint" || s.seed_profile == "zero" ||
                s.seed_profile.rfind("nu:", 0) == 0 || s.seed_profile.rfind("file:", 0) == 0,
            fmt::format("simulate: unknown seed profile '{}'", s.seed_profile));
    if (s.seed_profile.rfind("nu:", 0) == 0) parse_double("simulate.seed_profile", s.seed_profile.substr(3));
    if (s.seed_profile.rfind("file:", 0) == 0)
      require(fs::exists(s.seed_profile.substr(5)), fmt::format("simulate: seed file '{}' not found", s.seed_profile.substr(5)));
    try {
      sim_grid(s);
    } catch (const InvalidArgument& e) {
      throw ConfigError(fmt::format("simulate grid: {}", e.what()));
    }
  } else if (c.command == "invariance") {
    const auto& v = c.invariance;
    try {
      auto b = v.bounds;
      b.mu = v.mu.value_or(1.0);
      validate(b, v.p);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    require(v.beta0 > 0.0 && v.beta0 < 1.0, "invariance: beta0 must lie in (0, 1)");
    check_betas(v.betas, "invariance");
    require(v.mu_factor > 0.0, "invariance: mu_factor must be > 0");
    double mu0 = mu0_threshold(v.bounds.a, v.bounds.k, v.bounds.sigma, v.beta0);
    double mu = v.mu.value_or(v.mu_factor * mu0);
    require(mu >= mu0, fmt::format("invariance: mu = {} is below the threshold mu0 = {}", mu, mu0));
  } else if (c.command == "specfun-selftest" || c.command == "report") {
  } else {
    throw ConfigError(fmt::format("unknown command '{}'", c.command));
  }
}

std::string canonical_json(const RunConfig& c) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  const auto& b = c.invariance.bounds;
  json j{
      {"command", c.command},
      {"global", {{"seed", c.global.seed}, {"grid_L", opt(c.global.grid_L)}, {"grid_N", opt(c.global.grid_N)}}},
  };
  if (c.command == "fixpoint") {
    const auto& f = c.fixpoint;
    j["fixpoint"] = {{"bracket_lo", f.bracket_lo}, {"bracket_hi", f.bracket_hi}, {"tol", f.tol},
                     {"betas", f.betas}, {"nu", opt(f.nu)}, {"verify_only", f.verify_only},
                     {"gamma", f.gamma}, {"p", f.p}, {"picard_beta", f.picard_beta},
                     {"picard_damping", f.picard_damping}, {"picard_max_iter", f.picard_max_iter}};
  } else if (c.command == "simulate") {
    const auto& s = c.simulate;
    j["simulate"] = {{"T", s.T}, {"t_end", s.t_end}, {"n_samples", s.n_samples},
                     {"kernel", to_string(s.kernel)}, {"seed_profile", s.seed_profile},
                     {"dt_max", s.dt_max}, {"nonlinear", s.nonlinear},
                     {"grid_y_L", opt(s.grid_y_L)}, {"grid_y_N", opt(s.grid_y_N)}};
    j["fixpoint"] = {{"bracket_lo", c.fixpoint.bracket_lo}, {"bracket_hi", c.fixpoint.bracket_hi},
                     {"tol", c.fixpoint.tol}};
  } else if (c.command == "invariance") {
    const auto& v = c.invariance;
    j["invariance"] = {{"a", b.a}, {"k", b.k}, {"K", b.K}, {"A", b.A}, {"alpha", b.alpha},
                       {"delta0", b.delta0}, {"sigma", b.sigma}, {"nu_exp", b.nu_exp},
                       {"mu", opt(v.mu)}, {"mu_factor", v.mu_factor}, {"beta0", v.beta0},
                       {"betas", v.betas}, {"n_samples", v.n_samples}, {"p", v.p}};
  }
  return j.dump();
}

namespace {

struct OutputDir {
  fs::path dir;
  std::vector<fs::path> files;

  fs::path add(const std::string& name) {
    files.emplace_back(name);
    return dir / name;
  }
};

OutputDir make_output(const RunConfig& c) {
  OutputDir o{c.global.out / c.command, {}};
  fs::create_directories(o.dir);
  return o;
}

void finish(const RunConfig& c, const OutputDir& o) {
  io::write_manifest(o.dir, c.command, canonical_json(c), o.files);
}

std::vector<std::vector<std::string>> residual_rows(const EvenFn& psi, const std::vector<double>& betas,
                                                    double gamma, double p, double* worst_sup) {
  std::vector<std::vector<std::string>> rows;
  *worst_sup = 0.0;
  for (double b : betas) {
    auto r = residual_norm(psi, {b, gamma}, p);
    *worst_sup = std::max(*worst_sup, r.sup);
    rows.push_back({format_double(b), format_double(r.lp), format_double(r.sup)});
  }
  return rows;
}

// Profile whose initial value is nu: the constant for nu = 1, zero for nu = 0,
// otherwise the marched limit-equation solution.
EvenFn exact_candidate(double nu, const GridSpec& grid) {
  if (nu == 0.0) return EvenFn(grid, std::vector<double>(grid.n_points, 0.0), 1.0);
  if (nu == 1.0) return EvenFn(grid, std::vector<double>(grid.n_points, 1.0), 0.0);
  return march_limit_ode(nu, grid, true).samples;
}

json method_agreement(const LimitOdeSolution& sol, const FixpointOptions& f, OutputDir& o) {
  const double nu = sol.nu;
  json j;
  std::vector<double> s_ref{5.0, 10.0}, targets;
  for (double s : s_ref) targets.push_back(numeric_laplace(sol, s));
  auto fit = fit_riccati_constants(nu, s_ref, targets);
  j["riccati"] = {{"c1", fit.c1}, {"c2", fit.c2}, {"fit_residual", fit.fit_residual}};
  double worst_ric = 0.0;
  auto hat = [&](double s) { return numeric_laplace(sol, s); };
  for (int i = 0; i <= 38; ++i) worst_ric = std::max(worst_ric, std::abs(riccati_residual(hat, nu, 1.0 + 0.5 * i)));
  j["riccati"]["max_residual_s_1_20"] = worst_ric;
  j["riccati"]["asymptotic_gap_s50"] = std::abs(50.0 * numeric_laplace(sol, 50.0) - nu);

  LaplaceTransform F;
  F.real = [=](double s) { return closed_form_hat(s, nu, fit.c1, fit.c2); };
  F.complex = [=](std::complex<double> s) { return closed_form_hat_complex(s, nu, fit.c1, fit.c2); };

  std::optional<EvenFn> picard;
  try {
    auto pr = picard_solve(sol.samples, {f.picard_beta, 2.0}, f.picard_damping, 1e-10, f.picard_max_iter);
    picard = pr.iterate;
    j["picard"] = {{"iterations", pr.iterations}, {"residual_sup", pr.residual.sup}};
  } catch (const DivergenceError& e) {
    j["picard"] = {{"error", e.what()}};
  }

  std::vector<std::vector<std::string>> rows;
  double d_ml = 0.0, d_mp = 0.0, d_lp = 0.0, d_ts = 0.0;
  bool inversion_failed = false;
  for (int i = 1; i <= 16; ++i) {
    double eta = 0.25 * i;
    double m = sol.samples(eta);
    double inv = std::numeric_limits<double>::quiet_NaN(), st = inv, rel = inv;
    try {
      auto ci = inverse_laplace_checked(F, eta);
      inv = ci.talbot;
      st = ci.stehfest;
      rel = ci.rel_diff;
      if (std::abs(ci.talbot) >= 0.01) d_ts = std::max(d_ts, ci.rel_diff);
    } catch (const NumericalError&) {
      inversion_failed = true;
    }
    double pc = picard ? (*picard)(eta) : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(inv)) d_ml = std::max(d_ml, std::abs(m - inv));
    if (picard) d_mp = std::max(d_mp, std::abs(m - pc));
    if (picard && std::isfinite(inv)) d_lp = std::max(d_lp, std::abs(inv - pc));
    rows.push_back({format_double(eta), format_double(m), format_double(inv), format_double(st),
                    format_double(pc), format_double(rel)});
  }
  io::write_csv(o.add("method_triangle.csv"), {"eta", "marched", "talbot", "stehfest", "picard", "inversion_rel_diff"}, rows);
  j["sup_diff"] = {{"marched_vs_inverse", num(d_ml)},
                   {"marched_vs_picard", picard ? num(d_mp) : json(nullptr)},
                   {"inverse_vs_picard", picard ? num(d_lp) : json(nullptr)},
                   {"talbot_vs_stehfest_rel", num(d_ts)}};
  j["inversion_failed"] = inversion_failed;
  return j;
}

void write_scan(const FixpointOptions& f, const GridSpec& grid, OutputDir& o) {
  auto scan = scan_nu(f.bracket_lo, f.bracket_hi, 50, grid);
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : scan.entries)
    rows.push_back({format_double(e.nu), to_string(e.tail_class), format_double(e.growth_indicator),
                    format_double(e.signed_log_tail)});
  io::write_csv(o.add("nu_scan.csv"), {"nu", "tail_class", "growth_indicator", "signed_log_tail"}, rows);
}

}  // namespace

int cmd_fixpoint(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto& f = c.fixpoint;
  const GridSpec grid = resolve_grid(c.global);
  auto o = make_output(c);

  if (f.nu && (f.verify_only || f.gamma != 2.0)) {
    EvenFn psi = exact_candidate(*f.nu, grid);
    double worst = 0.0;
    auto rows = residual_rows(psi, f.betas, f.gamma, f.p, &worst);
    io::write_csv(o.add("residuals.csv"), {"beta", "residual_lp", "residual_sup"}, rows);
    io::write_evenfn_csv(o.add("profile.csv"), psi);
    o.files.emplace_back("profile.csv.json");
    json v{{"nu", *f.nu}, {"gamma", f.gamma}, {"max_residual_sup", worst},
           {"within_1e-8", worst <= 1e-8}, {"evaluation_only", f.gamma != 2.0}};
    io::write_json(o.add("verify.json"), v);
    finish(c, o);
    out << fmt::format("nu = {}, gamma = {}: max sup residual {:.3e} over {} betas\n", *f.nu, f.gamma, worst,
                       f.betas.size());
    return kOk;
  }

  double nu_star = 0.0;
  if (f.nu) {
    nu_star = *f.nu;
  } else {
    try {
      nu_star = find_nu(f.bracket_lo, f.bracket_hi, f.tol, grid);
    } catch (const BracketError& e) {
      write_scan(f, grid, o);
      finish(c, o);
      err << "bracket error: " << e.what() << '\n';
      return kNumericalFailure;
    }
  }
  auto sol = march_limit_ode(nu_star, grid, f.nu.has_value());
  io::write_json(o.add("nu_star.json"), {{"nu_star", nu_star},
                                         {"tail_class", to_string(sol.tail_class)},
                                         {"tail_fit_rate", sol.tail_fit_rate},
                                         {"growth_indicator", sol.growth_indicator}});
  io::write_evenfn_csv(o.add("fixed_point.csv"), sol.samples);
  o.files.emplace_back("fixed_point.csv.json");
  double worst = 0.0;
  auto rows = residual_rows(sol.samples, f.betas, 2.0, f.p, &worst);
  io::write_csv(o.add("residuals.csv"), {"beta", "residual_lp", "residual_sup"}, rows);
  if (sol.tail_class != TailClass::Decaying) {
    finish(c, o);
    err << fmt::format("profile at nu = {} is {}; Laplace-side cross-validation needs a decaying profile\n",
                       nu_star, to_string(sol.tail_class));
    return kNumericalFailure;
  }
  auto agreement = method_agreement(sol, f, o);
  io::write_json(o.add("method_agreement.json"), agreement);
  finish(c, o);
  out << fmt::format("nu* = {:.12g}, max sup residual {:.3e}\n", nu_star, worst);
  return kOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto& s = c.simulate;
  const GridSpec grid = resolve_grid(c.global);
  auto o = make_output(c);
  std::optional<EvenFn> seed;
  if (s.seed_profile == "zero") {
    seed = EvenFn(grid, std::vector<double>(grid.n_points, 0.0), 1.0);
  } else if (s.seed_profile.rfind("file:", 0) == 0) {
    seed = io::read_evenfn_csv(s.seed_profile.substr(5));
  } else {
    double nu = 0.0;
    if (s.seed_profile == "fixpoint") {
      try {
        nu = find_nu(c.fixpoint.bracket_lo, c.fixpoint.bracket_hi, c.fixpoint.tol, grid);
      } catch (const BracketError& e) {
        finish(c, o);
        err << "no fixed-point seed: " << e.what() << '\n';
        return kNumericalFailure;
      }
    } else {
      nu = parse_double("seed_profile", s.seed_profile.substr(3));
    }
    auto sol = march_limit_ode(nu, grid, true);
    if (sol.tail_class != TailClass::Decaying) {
      finish(c, o);
      err << fmt::format("seed profile at nu = {} is {}, not decaying\n", nu, to_string(sol.tail_class));
      return kNumericalFailure;
    }
    seed = sol.samples;
  }
  if (!(seed->tail_rate() > 0.0)) {
    finish(c, o);
    err << "seed profile must decay (positive tail rate)\n";
    return kConfigError;
  }
  auto gy = sim_grid(s);
  auto st = init_state(*seed, s.T, gy, s.kernel);
  st.nonlinear = s.nonlinear;
  RunOptions ro;
  ro.dt_max = s.dt_max;
  auto rep = run_and_fit(st, s.t_end, s.n_samples, ro);
  io::write_scaling_csv(o.add("scaling.csv"), rep);
  io::write_json(o.add("scaling.json"), io::scaling_summary(rep));
  std::vector<double> last = rep.final_field;
  double r = 1.0;
  std::size_t n = last.size();
  if (n >= 2 && last[n - 1] > 0.0 && last[n - 2] > last[n - 1]) r = std::log(last[n - 2] / last[n - 1]) / gy.spacing;
  io::write_evenfn_csv(o.add("field_final.csv"), EvenFn(gy, std::move(last), r));
  o.files.emplace_back("field_final.csv.json");
  finish(c, o);
  if (rep.failed) {
    err << "simulation stopped early: " << rep.failure_message << '\n';
    return kNumericalFailure;
  }
  if (rep.degenerate)
    out << "degenerate run: zero field, slopes undefined\n";
  else
    out << fmt::format("energy slope {:.6f}, enstrophy slope {:.6f}, max profile error {:.3e}\n", rep.energy_slope,
                       rep.enstrophy_slope, rep.max_profile_error);
  return kOk;
}

int cmd_invariance(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto& v = c.invariance;
  InvarianceConfig ic;
  ic.bounds = v.bounds;
  ic.beta0 = v.beta0;
  ic.betas = v.betas;
  ic.n_samples = v.n_samples;
  ic.seed = c.global.seed;
  ic.p = v.p;
  ic.grid = resolve_grid(c.global);
  double mu0 = mu0_threshold(v.bounds.a, v.bounds.k, v.bounds.sigma, v.beta0);
  ic.bounds.mu = v.mu.value_or(v.mu_factor * mu0);
  auto o = make_output(c);
  auto rep = invariance_experiment(ic);
  json tallies = json::array();
  for (const auto& t : rep.tallies)
    tallies.push_back({{"beta", t.beta},
                       {"envelope_tested", t.envelope_tested},
                       {"envelope_pass", t.envelope_pass},
                       {"weighted_tested", t.weighted_tested},
                       {"weighted_pass", t.weighted_pass},
                       {"holder_pass", t.holder_pass},
                       {"worst_envelope_margin", num(t.worst_envelope_margin)},
                       {"worst_weighted_margin", num(t.worst_weighted_margin)}});
  json failures = json::array();
  for (std::size_t i = 0; i < rep.failures.size(); ++i) {
    const auto& fl = rep.failures[i];
    std::string name = fmt::format("counterexample_{:03d}.csv", i);
    io::write_evenfn_csv(o.add(name), fl.witness);
    o.files.emplace_back(name + ".json");
    failures.push_back({{"family", fl.family}, {"sample", fl.sample}, {"beta", fl.beta},
                        {"kind", fl.kind}, {"margin", num(fl.margin)}, {"witness", name}});
  }
  io::write_json(o.add("invariance.json"), {{"mu0", rep.mu0},
                                            {"mu", ic.bounds.mu},
                                            {"seed", ic.seed},
                                            {"n_samples", ic.n_samples},
                                            {"tallies", tallies},
                                            {"failures", failures},
                                            {"all_passed", rep.all_passed()}});
  finish(c, o);
  out << fmt::format("mu0 = {:.10g}, mu = {:.10g}, {} failures\n", rep.mu0, ic.bounds.mu, rep.failures.size());
  return rep.all_passed() ? kOk : kCounterexample;
}

namespace {

double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

// Integral representation of U for a > 0.
double u_integral(double a, double b, double z) {
  boost::math::quadrature::exp_sinh<double> q;
  double val = q.integrate([&](double t) { return std::exp(-z * t) * std::pow(t, a - 1.0) * std::pow(1.0 + t, b - a - 1.0); });
  return val / std::tgamma(a);
}

}  // namespace

int cmd_specfun_selftest(const RunConfig& c, std::ostream& out, std::ostream&) {
  auto o = make_output(c);
  struct Check {
    std::string name;
    double worst = 0.0;
    double tol;
  };
  std::vector<Check> checks{{"erf_abs", 0.0, 1e-12},       {"gamma_rel", 0.0, 1e-10},
                            {"lower_incomplete_gamma_rel", 0.0, 1e-10}, {"kummer_m_rel", 0.0, 1e-9},
                            {"tricomi_u_rel", 0.0, 1e-7},  {"kummer_contiguous_rel", 0.0, 1e-8}};
  for (int i = -60; i <= 60; ++i) {
    double x = 0.1 * i;
    checks[0].worst = std::max(checks[0].worst, std::abs(erf(x) - boost::math::erf(x)));
  }
  for (int i = 1; i <= 80; ++i) {
    double x = -7.95 + 0.2 * i;
    if (std::abs(x - std::round(x)) < 1e-9 && x <= 0) continue;
    checks[1].worst = std::max(checks[1].worst, rel_err(gamma_fn(x), boost::math::tgamma(x)));
  }
  for (double s : {0.2, 0.5, 1.0, 1.5, 2.5, 4.0})
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0})
      checks[2].worst = std::max(checks[2].worst, rel_err(lower_incomplete_gamma(s, x), boost::math::tgamma_lower(s, x)));
  for (double a : {0.5, 0.75, 1.0, 1.5, 2.0, 3.0})
    for (double b : {0.5, 1.5})
      for (double z : {0.0, 0.5, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0}) {
        checks[3].worst = std::max(checks[3].worst, rel_err(kummer_m({a, b, z}), boost::math::hypergeometric_1F1(a, b, z)));
        if (z > 0.0 && z <= 50.0)
          checks[4].worst = std::max(checks[4].worst, rel_err(tricomi_u({a, b, z}).value, u_integral(a, b, z)));
        if (z <= 20.0) {
          double mm = kummer_m({a - 1.0, b, z}), m0 = kummer_m({a, b, z}), mp = kummer_m({a + 1.0, b, z});
          double scale = std::abs((b - a) * mm) + std::abs((2 * a - b + z) * m0) + std::abs(a * mp);
          checks[5].worst = std::max(checks[5].worst, std::abs((b - a) * mm + (2 * a - b + z) * m0 - a * mp) / scale);
        }
      }
  json j = json::object();
  bool ok = true;
  for (const auto& ch : checks) {
    bool pass = ch.worst <= ch.tol;
    ok = ok && pass;
    j[ch.name] = {{"worst", ch.worst}, {"tolerance", ch.tol}, {"pass", pass}};
    out << fmt::format("{:<28} {:.3e} (tol {:.0e}) {}\n", ch.name, ch.worst, ch.tol, pass ? "ok" : "FAIL");
  }
  io::write_json(o.add("specfun.json"), j);
  finish(c, o);
  return ok ? kOk : kNumericalFailure;
}

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
  fs::path root = c.report.dir.value_or(c.global.out);
  if (!fs::is_directory(root)) {
    err << fmt::format("report: '{}' is not a directory\n", root.string());
    return kConfigError;
  }
  std::vector<fs::path> dirs;
  if (fs::exists(root / "manifest.json")) dirs.push_back(root);
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) {
    err << fmt::format("report: no manifest found under '{}'\n", root.string());
    return kConfigError;
  }
  bool intact = true;
  json summary = json::object();
  for (const auto& d : dirs) {
    auto m = io::read_json(d / "manifest.json");
    std::string cmd = m.value("command", "?");
    out << fmt::format("[{}] config {} version {}\n", cmd, m.value("config_hash", "?"), m.value("artifact_version", "?"));
    json entry{{"config_hash", m["config_hash"]}, {"files", json::array()}};
    for (const auto& f : m["files"]) {
      fs::path p = d / f["path"].get<std::string>();
      bool match = false;
      if (fs::exists(p)) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        match = io::hex64(io::fnv1a64(ss.str())) == f["fnv1a64"].get<std::string>();
      }
      intact = intact && match;
      entry["files"].push_back({{"path", f["path"]}, {"hash_ok", match}});
      out << fmt::format("  {:<28} {}\n", f["path"].get<std::string>(), match ? "ok" : "MODIFIED OR MISSING");
      if (p.extension() == ".json" && match && p.filename() != "manifest.json" &&
          p.filename().string().find(".csv.json") == std::string::npos)
        entry[p.stem().string()] = io::read_json(p);
    }
    summary[cmd] = entry;
  }
  io::write_json(root / "report.json", summary);
  return intact ? kOk : kNumericalFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-similar blow-up profiles of the 1D quasi-geostrophic model"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::string> config_path, out_dir, beta_list, kernel, seed_profile;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_L, nu, gamma, t_end, T, dt_max, mu, mu_factor, bracket_lo, bracket_hi, grid_y_L;
  std::optional<std::size_t> grid_N, n_samples, grid_y_N;
  std::optional<std::string> report_dir;
  bool verify_only = false, linear = false;

  app.add_option("--config", config_path, "INI config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--grid-L", grid_L, "eta-grid half width");
  app.add_option("--grid-N", grid_N, "eta-grid node count");
  app.add_option("--beta", beta_list, "comma-separated beta list");
  app.add_option("--nu", nu, "initial value theta(0)");
  app.add_option("--gamma", gamma, "dissipation exponent (evaluation only when != 2)");

  auto* fix = app.add_subcommand("fixpoint", "fixed point search and cross-validation");
  fix->add_flag("--verify-only", verify_only, "only evaluate residuals of the profile with the given nu");
  fix->add_option("--bracket-lo", bracket_lo, "lower end of the nu bracket");
  fix->add_option("--bracket-hi", bracket_hi, "upper end of the nu bracket");
  auto* sim = app.add_subcommand("simulate", "time-step the Fourier-side equation and fit scaling");
  sim->add_option("--t-end", t_end, "end time as a fraction of T");
  sim->add_option("--T", T, "blow-up time");
  sim->add_option("--n-samples", n_samples, "number of sample times");
  sim->add_option("--kernel", kernel, "halfline or fullline");
  sim->add_option("--seed-profile", seed_profile, "fixpoint, zero, nu:<x> or file:<path>");
  sim->add_option("--dt-max", dt_max, "largest time step");
  sim->add_option("--grid-y-L", grid_y_L, "y-grid half width (default 40/sqrt(T))");
  sim->add_option("--grid-y-N", grid_y_N, "y-grid node count (default 4097)");
  sim->add_flag("--linear", linear, "disable the nonlinearity");
  auto* inv = app.add_subcommand("invariance", "randomized invariance experiment");
  inv->add_option("--n-samples", n_samples, "members per family");
  inv->add_option("--mu", mu, "weighted-integral threshold");
  inv->add_option("--mu-factor", mu_factor, "threshold as a multiple of mu0");
  app.add_subcommand("specfun-selftest", "special functions against independent references");
  auto* rep = app.add_subcommand("report", "summarize and verify written artifacts");
  rep->add_option("--dir", report_dir, "directory holding command outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }

  RunConfig c;
  c.command = app.get_subcommands().front()->get_name();
  try {
    if (config_path) load_ini(*config_path, c);
    if (out_dir) c.global.out = *out_dir;
    if (seed) c.global.seed = *seed;
    if (grid_L) c.global.grid_L = grid_L;
    if (grid_N) c.global.grid_N = grid_N;
    if (beta_list) {
      auto betas = parse_list(*beta_list);
      if (c.command == "invariance")
        c.invariance.betas = betas;
      else
        c.fixpoint.betas = betas;
    }
    if (nu) c.fixpoint.nu = nu;
    if (gamma) c.fixpoint.gamma = *gamma;
    if (verify_only) c.fixpoint.verify_only = true;
    if (bracket_lo) c.fixpoint.bracket_lo = *bracket_lo;
    if (bracket_hi) c.fixpoint.bracket_hi = *bracket_hi;
    if (t_end) c.simulate.t_end = *t_end;
    if (T) c.simulate.T = *T;
    if (n_samples) (c.command == "invariance" ? c.invariance.n_samples : c.simulate.n_samples) = *n_samples;
    if (kernel) c.simulate.kernel = parse_kernel(*kernel);
    if (seed_profile) c.simulate.seed_profile = *seed_profile;
    if (dt_max) c.simulate.dt_max = *dt_max;
    if (grid_y_L) c.simulate.grid_y_L = grid_y_L;
    if (grid_y_N) c.simulate.grid_y_N = grid_y_N;
    if (linear) c.simulate.nonlinear = false;
    if (mu) c.invariance.mu = mu;
    if (mu_factor) c.invariance.mu_factor = *mu_factor;
    if (report_dir) c.report.dir = fs::path(*report_dir);
    validate(c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (c.command == "fixpoint") return cmd_fixpoint(c, out, err);
    if (c.command == "simulate") return cmd_simulate(c, out, err);
    if (c.command == "invariance") return cmd_invariance(c, out, err);
    if (c.command == "specfun-selftest") return cmd_specfun_selftest(c, out, err);
    return cmd_report(c, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace qgr::cli
