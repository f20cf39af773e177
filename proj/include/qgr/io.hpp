#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgr/grid_fn.hpp"
#include "qgr/qg_sim.hpp"

namespace qgr::io {

inline constexpr const char* kArtifactVersion = "1.0.0";

// 17 significant digits, "nan"/"inf" spelled out.
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

// CSV with header `eta,value` over the stored nodes eta >= 0, plus a sidecar
// `<path>.json` holding the grid, tail rate and representation.
void write_evenfn_csv(const std::filesystem::path& path, const EvenFn& f);
EvenFn read_evenfn_csv(const std::filesystem::path& path);

// `t,T_minus_t,energy,enstrophy,profile_err`
void write_scaling_csv(const std::filesystem::path& path, const ScalingReport& r);
nlohmann::json scaling_summary(const ScalingReport& r);

// Table with a header row; every cell already formatted.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Writes manifest.json next to the artifacts: command, config hash, version
// and the hash of every listed file.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& canonical_config,
                    const std::vector<std::filesystem::path>& artifacts);

// Non-finite doubles become strings so that the output stays valid JSON.
nlohmann::json num(double x);

}  // namespace qgr::io
