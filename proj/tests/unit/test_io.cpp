#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "qgr/invariant_sets.hpp"
#include "qgr/io.hpp"

using namespace qgr;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("qgr_test_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0, -0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, 0.46034569556064664}) {
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
  CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("num keeps JSON valid") {
  CHECK(io::num(1.5).is_number());
  CHECK(io::num(std::numeric_limits<double>::quiet_NaN()).is_string());
  auto dumped = nlohmann::json{{"x", io::num(std::numeric_limits<double>::infinity())}}.dump();
  CHECK(nlohmann::json::parse(dumped)["x"] == "inf");
}

TEST_CASE("EvenFn CSV round trip") {
  auto d = scratch_dir("evenfn");
  auto c = candidate_member(0.5, 0.6, 2.0);
  io::write_evenfn_csv(d / "c.csv", c);
  CHECK(fs::exists(d / "c.csv.json"));
  auto back = io::read_evenfn_csv(d / "c.csv");
  REQUIRE(back.grid().n_points == c.grid().n_points);
  CHECK(back.grid().half_width == c.grid().half_width);
  CHECK(back.tail_rate() == c.tail_rate());
  CHECK(back.repr() == c.repr());
  for (std::size_t i = 0; i < c.grid().n_points; ++i) CHECK(back.value(i) == c.value(i));

  std::ifstream in(d / "c.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "eta,value");

  CHECK_THROWS(io::read_evenfn_csv(d / "missing.csv"));
}

TEST_CASE("scaling CSV and summary") {
  auto d = scratch_dir("scaling");
  ScalingReport r;
  r.sample_times = {0.1, 0.5};
  r.T_minus_t = {0.9, 0.5};
  r.energies = {1.0, 2.0};
  r.enstrophies = {3.0, 4.0};
  r.profile_errors = {0.0, 0.01};
  r.energy_slope = -0.5;
  r.enstrophy_slope = -1.5;
  r.max_profile_error = 0.01;
  io::write_scaling_csv(d / "s.csv", r);
  auto text = slurp(d / "s.csv");
  CHECK(text.rfind("t,T_minus_t,energy,enstrophy,profile_err\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  auto j = io::scaling_summary(r);
  CHECK(j["energy_slope"] == -0.5);
  CHECK(j["enstrophy_slope"] == -1.5);
  CHECK(j["max_profile_err"] == 0.01);
}

TEST_CASE("manifest records hashes") {
  auto d = scratch_dir("manifest");
  io::write_json(d / "a.json", nlohmann::json{{"k", 1}});
  io::write_csv(d / "b.csv", {"x", "y"}, {{"1", "2"}});
  io::write_manifest(d, "fixpoint", "{\"a\":1}", {"a.json", "b.csv"});
  auto m = io::read_json(d / "manifest.json");
  CHECK(m["command"] == "fixpoint");
  CHECK(m["artifact_version"] == io::kArtifactVersion);
  CHECK(m["config_hash"] == io::hex64(io::fnv1a64("{\"a\":1}")));
  REQUIRE(m["files"].size() == 2);
  CHECK(m["files"][1]["path"] == "b.csv");
  CHECK(m["files"][1]["fnv1a64"] == io::hex64(io::fnv1a64(slurp(d / "b.csv"))));
  CHECK(slurp(d / "b.csv") == "x,y\n1,2\n");
}
