#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgr/grid_fn.hpp"

namespace qgr {

struct BoundsParams {
  double a = 2.0;
  double k = 0.5;
  double K = 10.0;
  double A = 10.0;
  double alpha = 0.45;
  double delta0 = 0.5;
  double mu = 1.0;
  double sigma = -1.5;
  double nu_exp = 0.6;
};

// Range checks, including alpha < 1/p.
void validate(const BoundsParams& b, double p);

struct MembershipReport {
  std::optional<bool> in_E_ak;
  double worst_envelope_ratio = 0.0;
  std::optional<bool> in_holder;
  double holder_norm = 0.0;
  std::optional<bool> modulus_envelope_ok;
  double min_envelope_A = 0.0;     // smallest A with omega <= A |eta| e^{-a|eta|}, |eta| > 1
  double modulus_growth = 1.0;     // sup of the modulus after refining the deltas by 4
  std::optional<bool> in_M;
  double I_value = 0.0;
};

EvenFn candidate_member(double k, double nu_exp, double a, const GridSpec& grid = default_grid());

MembershipReport check_E_ak(const EvenFn& f, double a, double k);
MembershipReport check_holder(const EvenFn& f, const BoundsParams& params, double p);
MembershipReport check_M(const EvenFn& f, double mu, double sigma, double local_order_hint);

// First a in the list where I[candidate_member(k, nu_exp, a)] > mu0(a, k, sigma, beta0);
// nullopt when none qualifies.
std::optional<double> locate_a0(double k, double nu_exp, double sigma, double beta0,
                                const std::vector<double>& as = {2.0, 4.0, 8.0, 16.0},
                                const GridSpec& grid = default_grid());

struct InvarianceConfig {
  BoundsParams bounds;
  double beta0 = 0.8;
  std::vector<double> betas{0.85, 0.9, 0.99};
  std::size_t n_samples = 50;
  std::uint64_t seed = 7;
  double p = 2.0;
  GridSpec grid = default_grid();
};

struct InvarianceFailure {
  std::string family;  // "envelope" or "weighted"
  std::size_t sample = 0;
  double beta = 0.0;
  std::string kind;    // "envelope", "weighted", "draw"
  double margin = 0.0;
  EvenFn witness;
};

struct BetaTally {
  double beta = 0.0;
  std::size_t envelope_tested = 0;
  std::size_t envelope_pass = 0;
  std::size_t weighted_tested = 0;
  std::size_t weighted_pass = 0;
  std::size_t holder_pass = 0;
  double worst_envelope_margin = 0.0;  // min over nodes of k e^{-a eta} - |R f|
  double worst_weighted_margin = 0.0;  // min of I[R f] - mu
};

struct InvarianceReport {
  InvarianceConfig config;
  double mu0 = 0.0;
  std::vector<BetaTally> tallies;
  std::vector<InvarianceFailure> failures;
  bool all_passed() const { return failures.empty(); }
};

InvarianceReport invariance_experiment(const InvarianceConfig& config);

}  // namespace qgr
