#ifndef UAPD_CLI_HPP
#define UAPD_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "uapd/problems.hpp"
#include "uapd/solver.hpp"

namespace uapd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // solver or integrator failure
inline constexpr int kExitConfig = 2;   // unreadable or malformed config

enum class Variant { Uapd, FixedTolerance };

std::string to_string(Variant v);

struct FlowSettings {
  double t_end = 5.0;
  double dt = 1e-3;
  double gamma0 = 1.0;
  double beta0 = 1.0;
};

struct BoundsSettings {
  double nu = 1.0;
  std::optional<double> M_nu;  // defaults to the instance's reference constant
  int fit_k_min = 10;
  int fit_k_max = 100;
};

struct RunConfig {
  std::filesystem::path base_dir;  // directory of the config file
  nlohmann::json instance_source;  // inline recipe, or a stored instance
  bool instance_is_stored = false;
  nlohmann::json solver;           // overrides applied on top of default_config
  std::vector<Variant> variants{Variant::Uapd};
  std::optional<double> eps;
  std::vector<GeometryKind> geometries;  // matrix-game ablation, empty = recipe's
  std::optional<int> reference_iterations;
  bool timing = true;
  FlowSettings flow;
  BoundsSettings bounds;
};

// Throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

ProblemInstance build_instance(const RunConfig& config,
                               std::optional<GeometryKind> geometry = std::nullopt);
SolverConfig build_solver_config(const RunConfig& config, const ProblemInstance& instance);

int cmd_solve(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
              std::ostream& log);
int cmd_compare(const std::filesystem::path& config_file,
                const std::filesystem::path& out_dir, std::ostream& log);
int cmd_flow(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
             std::ostream& log);
int cmd_bounds(const std::filesystem::path& config_file,
               const std::filesystem::path& out_dir, std::ostream& log);

// Full command line: solve|compare|flow|bounds <config.json> [--out DIR].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uapd::cli

#endif  // UAPD_CLI_HPP
