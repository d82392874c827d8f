#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ehrlab/scalar_gauss.hpp"
#include "ehrlab/serialize.hpp"

namespace ehrlab::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchema = 1;

// Exit codes of the command-line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;   // a verified mathematical failure
inline constexpr int kExitUsage = 2;  // bad flags or configuration

// Every parameter of a run. Reports embed it, and --config reloads it, so a
// report is enough to reproduce itself.
struct RunConfig {
  std::string command;
  std::string kind = "ehrhard_time_varying";
  double rho = 0.5;
  double lambda = 0.5;
  double alpha = 0.45;
  double eps = 0.1;
  double R = 1.0;
  std::optional<double> r_hi;
  int grid = 33;
  int t_points = 17;
  std::string region = "xi_nonpositive";
  int order = kDefaultQuadOrder;
  std::uint64_t seed = 7;
  int count = 0;  // 0 picks the per-command default

  // trace-g / counterexample
  std::string preset = "halfline";
  std::string mode = "time_varying";
  std::string expect = "nonincreasing";
  double a = 0.0, b = 0.0, c = 1.0;
  double t = 12.0;
  double x0 = 0.0, y0 = 0.0;
  std::vector<double> s_grid;
  bool auto_r = false;  // take R from min_r on the standard scan domain
  double delta = 0.2;
  std::string f_file, g_file, h_file;

  // verify-ehrhard
  bool hull = false;

  // tolerances
  double tol = -1.0;  // negative picks the per-command default

  std::string out;
  std::string format = "json";
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

// Parses argv, runs the subcommand, writes the report to --out (or out) and
// diagnostics to err. Returns one of the exit codes above.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ehrlab::cli
