#include "qgr/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qgr/errors.hpp"

namespace qgr::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

void write_evenfn_csv(const fs::path& path, const EvenFn& f) {
  std::vector<std::vector<std::string>> rows;
  const auto& g = f.grid();
  rows.reserve(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i)
    rows.push_back({format_double(g.node(i)), format_double(f.value(i))});
  write_csv(path, {"eta", "value"}, rows);
  nlohmann::json side{{"half_width", g.half_width},
                      {"n_points", g.n_points},
                      {"tail_rate", f.tail_rate()},
                      {"repr", f.repr() == Repr::Psi ? "psi" : "phi"}};
  write_json(fs::path(path.string() + ".json"), side);
}

EvenFn read_evenfn_csv(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("eta,value", 0) != 0)
    throw InvalidArgument(fmt::format("'{}': expected header 'eta,value'", path.string()));
  std::vector<double> eta, val;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument(fmt::format("'{}': malformed row '{}'", path.string(), line));
    try {
      eta.push_back(std::stod(line.substr(0, comma)));
      val.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw InvalidArgument(fmt::format("'{}': malformed row '{}'", path.string(), line));
    }
  }
  if (eta.size() < 5) throw InvalidArgument(fmt::format("'{}': need at least 5 rows", path.string()));
  double tail = 0.0;
  Repr repr = Repr::Psi;
  fs::path side(path.string() + ".json");
  if (fs::exists(side)) {
    auto j = read_json(side);
    tail = j.value("tail_rate", 0.0);
    repr = j.value("repr", std::string("psi")) == "phi" ? Repr::Phi : Repr::Psi;
  } else {
    std::size_t n = val.size();
    if (val[n - 1] > 0.0 && val[n - 2] > val[n - 1])
      tail = std::log(val[n - 2] / val[n - 1]) / (eta[n - 1] - eta[n - 2]);
  }
  GridSpec g = make_grid(eta.back(), eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i)
    if (std::abs(eta[i] - g.node(i)) > 1e-9 * (1.0 + g.half_width))
      throw InvalidArgument(fmt::format("'{}': nodes are not uniform starting at 0", path.string()));
  return EvenFn(g, std::move(val), tail, repr);
}

void write_scaling_csv(const fs::path& path, const ScalingReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < r.sample_times.size(); ++i)
    rows.push_back({format_double(r.sample_times[i]), format_double(r.T_minus_t[i]),
                    format_double(r.energies[i]), format_double(r.enstrophies[i]),
                    format_double(r.profile_errors[i])});
  write_csv(path, {"t", "T_minus_t", "energy", "enstrophy", "profile_err"}, rows);
}

nlohmann::json scaling_summary(const ScalingReport& r) {
  nlohmann::json j{{"energy_slope", num(r.energy_slope)},
                   {"enstrophy_slope", num(r.enstrophy_slope)},
                   {"max_profile_err", num(r.max_profile_error)},
                   {"reference_energy_slope", num(r.reference_energy_slope)},
                   {"reference_enstrophy_slope", num(r.reference_enstrophy_slope)},
                   {"degenerate", r.degenerate},
                   {"failed", r.failed},
                   {"steps", r.steps}};
  if (r.failed) {
    j["failure_time"] = num(r.failure_time);
    j["failure_message"] = r.failure_message;
  }
  return j;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& canonical_config, const std::vector<fs::path>& artifacts) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : artifacts) {
    fs::path full = dir / p;
    files.push_back({{"path", p.generic_string()}, {"fnv1a64", hex64(fnv1a64(slurp(full)))}});
  }
  nlohmann::json m{{"command", command},
                   {"artifact_version", kArtifactVersion},
                   {"config_hash", hex64(fnv1a64(canonical_config))},
                   {"files", files}};
  write_json(dir / "manifest.json", m);
}

}  // namespace qgr::io
