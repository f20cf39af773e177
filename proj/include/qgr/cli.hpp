#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgr/grid_fn.hpp"
#include "qgr/invariant_sets.hpp"
#include "qgr/qg_sim.hpp"

namespace qgr::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalFailure = 2, kCounterexample = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::filesystem::path out = "qgr_out";
  std::uint64_t seed = 7;
  std::optional<double> grid_L;
  std::optional<std::size_t> grid_N;
};

struct FixpointOptions {
  double bracket_lo = 0.01;
  double bracket_hi = 0.99;
  double tol = 1e-10;
  std::vector<double> betas{0.5, 0.7, 0.9};
  std::optional<double> nu;
  bool verify_only = false;
  double gamma = 2.0;
  double p = 2.0;
  double picard_beta = 0.9;
  double picard_damping = 0.5;
  int picard_max_iter = 100;
};

struct SimulateOptions {
  double T = 1.0;
  double t_end = 0.9;
  std::size_t n_samples = 20;
  Kernel kernel = Kernel::HalflineConv;
  // "fixpoint", "zero", "nu:<value>" or "file:<path>"
  std::string seed_profile = "fixpoint";
  double dt_max = 1e-2;
  bool nonlinear = true;
  std::optional<double> grid_y_L;
  std::optional<std::size_t> grid_y_N;
};

struct InvarianceOptions {
  BoundsParams bounds;
  std::optional<double> mu;  // absolute threshold; otherwise mu_factor * mu0
  double mu_factor = 1.05;
  double beta0 = 0.8;
  std::vector<double> betas{0.85, 0.9, 0.99};
  std::size_t n_samples = 50;
  double p = 2.0;
};

struct ReportOptions {
  std::optional<std::filesystem::path> dir;
};

struct RunConfig {
  std::string command;
  GlobalOptions global;
  FixpointOptions fixpoint;
  SimulateOptions simulate;
  InvarianceOptions invariance;
  ReportOptions report;
};

// Sections [global], [fixpoint], [simulate], [invariance]; unknown keys are
// rejected.
void load_ini(const std::filesystem::path& path, RunConfig& config);

// Throws ConfigError on the first violated precondition.
void validate(const RunConfig& config);

// Sorted-key JSON of every resolved option; hashed into the manifest.
std::string canonical_json(const RunConfig& config);

GridSpec resolve_grid(const GlobalOptions& g);

int cmd_fixpoint(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_invariance(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_specfun_selftest(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv, merges config file and flags (flags win), dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qgr::cli
