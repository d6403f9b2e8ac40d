#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uapd/cli.hpp"
#include "uapd/serialization.hpp"

using namespace uapd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uapd_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path file = dir / "config.json";
  std::ofstream(file) << text;
  return file;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

// Every cell parses as a finite number or is empty.
bool cells_finite(const std::string& csv) {
  const auto rows = lines(csv);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    for (std::string cell; std::getline(ss, cell, ',');) {
      if (cell.empty()) continue;
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size() || !std::isfinite(v)) return false;
    }
  }
  return true;
}

int run_cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("missing fields exit with code 2 and name the field") {
  const auto dir = scratch("missing");
  std::string err;
  auto cfg = write_config(dir, R"({"solver": {"max_iterations": 3}})");
  CHECK(run_cli({"solve", cfg.string(), "--out", (dir / "o").string()}, &err) == 2);
  CHECK(err.find("'instance'") != std::string::npos);

  cfg = write_config(dir, R"({"instance": {"kind": "matrix_game", "m": 3, "n": 4}, "solver": {}})");
  CHECK(run_cli({"solve", cfg.string()}, &err) == 2);
  CHECK(err.find("solver.max_iterations") != std::string::npos);

  cfg = write_config(dir, R"({"instance": {"kind": "matrix_game", "n": 4}, "solver": {"max_iterations": 1}})");
  CHECK(run_cli({"solve", cfg.string()}, &err) == 2);
  CHECK(err.find("instance.m") != std::string::npos);

  cfg = write_config(dir, R"({"instance": {"kind": "synthetic_qp", "m": 2, "n": 4}, "solver": {"max_iterations": 1}, "flow": {"dt": 0.1}})");
  CHECK(run_cli({"flow", cfg.string()}, &err) == 2);
  CHECK(err.find("flow.t_end") != std::string::npos);

  cfg = write_config(dir, R"({"instance": {"kind": "matrix_game", "m": 3, "n": 4}, "solver": {"max_iterations": 1}, "variants": ["fixed_tolerance"]})");
  CHECK(run_cli({"solve", cfg.string()}, &err) == 2);
  CHECK(err.find("'eps'") != std::string::npos);

  cfg = write_config(dir, "{ not json");
  CHECK(run_cli({"solve", cfg.string()}, &err) == 2);
  CHECK(run_cli({"solve", (dir / "absent.json").string()}, &err) == 2);
  CHECK(run_cli({"frobnicate", cfg.string()}, &err) == 2);
  CHECK(run_cli({}, &err) == 2);
}

TEST_CASE("empty iteration budget writes only the initial record") {
  const auto dir = scratch("k0");
  const auto cfg = write_config(dir, R"({"instance": {"kind": "matrix_game", "m": 5, "n": 6, "seed": 1}, "solver": {"max_iterations": 0}})");
  REQUIRE(run_cli({"solve", cfg.string(), "--out", (dir / "o").string()}) == 0);
  const auto rows = lines(slurp(dir / "o" / "trace_uapd.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "k,f_residual,feasibility,i_k,M_k,alpha_k,beta_k,delta_k,lyapunov,wall_time_s");
  CHECK(rows[1].rfind("0,", 0) == 0);
}

TEST_CASE("identical configs give byte-identical output") {
  const auto dir = scratch("determinism");
  const auto cfg = write_config(dir, R"({
    "instance": {"kind": "synthetic_qp", "m": 3, "n": 10, "seed": 5, "mu": 0.1},
    "solver": {"max_iterations": 200},
    "variants": ["uapd", "fixed_tolerance"], "eps": 1e-4, "timing": false})");
  REQUIRE(run_cli({"solve", cfg.string(), "--out", (dir / "a").string()}) == 0);
  REQUIRE(run_cli({"solve", cfg.string(), "--out", (dir / "b").string()}) == 0);
  for (const char* f : {"trace_uapd.csv", "trace_fixed_tolerance.csv", "summary.json", "instance.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  const std::string csv = slurp(dir / "a" / "trace_uapd.csv");
  CHECK(lines(csv).size() == 202);
  CHECK(cells_finite(csv));
}

TEST_CASE("stored instances replay exactly") {
  const auto dir = scratch("replay");
  const auto cfg = write_config(dir, R"({
    "instance": {"kind": "basis_pursuit", "m": 5, "n": 12, "seed": 3, "sparsity": 2},
    "solver": {"max_iterations": 100}, "timing": false})");
  REQUIRE(run_cli({"solve", cfg.string(), "--out", (dir / "a").string()}) == 0);
  const auto replay = write_config(dir, R"({"instance_file": "a/instance.json",
    "solver": {"max_iterations": 100}, "timing": false})");
  REQUIRE(run_cli({"solve", replay.string(), "--out", (dir / "b").string()}) == 0);
  CHECK(slurp(dir / "a" / "trace_uapd.csv") == slurp(dir / "b" / "trace_uapd.csv"));
}

TEST_CASE("basis pursuit with both variants") {
  const auto dir = scratch("bp");
  const auto cfg = write_config(dir, R"({
    "instance": {"kind": "basis_pursuit", "m": 10, "n": 50, "seed": 1, "sparsity": 2},
    "solver": {"max_iterations": 300}, "variants": ["uapd", "fixed_tolerance"], "eps": 1e-3,
    "reference_iterations": 600})");
  REQUIRE(run_cli({"solve", cfg.string(), "--out", (dir / "o").string()}) == 0);
  CHECK(fs::exists(dir / "o" / "trace_uapd.csv"));
  CHECK(fs::exists(dir / "o" / "trace_fixed_tolerance.csv"));
  const auto summary = nlohmann::json::parse(slurp(dir / "o" / "summary.json"));
  REQUIRE(summary["runs"].size() == 2);
  CHECK(summary["runs"][0]["reference_objective"].is_number());
  CHECK(cells_finite(slurp(dir / "o" / "trace_uapd.csv")));
}

TEST_CASE("compare writes the merged table") {
  const auto dir = scratch("compare");
  const auto cfg = write_config(dir, R"({
    "instance": {"kind": "matrix_game", "m": 10, "n": 40, "seed": 2},
    "solver": {"max_iterations": 50}, "eps": 1e-5})");
  REQUIRE(run_cli({"compare", cfg.string(), "--out", (dir / "o").string()}) == 0);
  const auto rows = lines(slurp(dir / "o" / "compare.csv"));
  REQUIRE(rows.size() == 52);
  CHECK(rows[0] == "k,f_UAPD,f_base,M_UAPD,M_base,ik_UAPD,ik_base");
  CHECK(cells_finite(slurp(dir / "o" / "compare.csv")));
}

TEST_CASE("flow and bounds commands") {
  const auto dir = scratch("flow");
  auto cfg = write_config(dir, R"({
    "instance": {"kind": "synthetic_qp", "m": 3, "n": 10, "seed": 2},
    "solver": {"max_iterations": 300},
    "flow": {"t_end": 1.0, "dt": 0.01},
    "bounds": {"nu": 1, "fit_k_min": 10, "fit_k_max": 100}})");
  REQUIRE(run_cli({"flow", cfg.string(), "--out", (dir / "f").string()}) == 0);
  auto rows = lines(slurp(dir / "f" / "flow.csv"));
  CHECK(rows.size() == 102);
  CHECK(rows[0] == "t,lyapunov,scaled_lyapunov,feasibility");
  CHECK(cells_finite(slurp(dir / "f" / "flow.csv")));

  REQUIRE(run_cli({"bounds", cfg.string(), "--out", (dir / "b").string()}) == 0);
  rows = lines(slurp(dir / "b" / "bounds.csv"));
  CHECK(rows[0] == "k,beta,envelope");
  CHECK(rows.size() == 301);
  CHECK(cells_finite(slurp(dir / "b" / "bounds.csv")));

  cfg = write_config(dir, R"({"instance": {"kind": "matrix_game", "m": 3, "n": 4},
    "solver": {"max_iterations": 3}, "flow": {"t_end": 1.0, "dt": 0.1}})");
  CHECK(run_cli({"flow", cfg.string(), "--out", (dir / "g").string()}) == 2);
}

TEST_CASE("prox-function ablation favours entropy") {
  const auto dir = scratch("ablation");
  const auto cfg = write_config(dir, R"({
    "instance": {"kind": "matrix_game", "m": 100, "n": 400, "seed": 1},
    "solver": {"max_iterations": 3000, "gamma0": 0.1},
    "geometries": ["entropy_simplex", "euclidean"], "timing": false})");
  REQUIRE(run_cli({"solve", cfg.string(), "--out", (dir / "o").string()}) == 0);
  CHECK(fs::exists(dir / "o" / "trace_uapd_entropy_simplex.csv"));
  CHECK(fs::exists(dir / "o" / "trace_uapd_euclidean.csv"));
  const auto summary = nlohmann::json::parse(slurp(dir / "o" / "summary.json"));
  const double entropy = summary["runs"][0]["final_f_residual"];
  const double euclid = summary["runs"][1]["final_f_residual"];
  CHECK(entropy < euclid);
}
