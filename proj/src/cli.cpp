#include "uapd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "uapd/analysis.hpp"
#include "uapd/flow.hpp"
#include "uapd/serialization.hpp"

namespace uapd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_as(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key, "field '" + path + "." + key + "' has the wrong type");
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_as<T>(j, key, path);
}

Variant variant_from(const std::string& name, const std::string& path) {
  if (name == "uapd") return Variant::Uapd;
  if (name == "fixed_tolerance") return Variant::FixedTolerance;
  throw ConfigError(path, "field '" + path + "': unknown variant '" + name + "'");
}

GeometryKind geometry_from(const std::string& name, const std::string& path) {
  if (name == "euclidean") return GeometryKind::Euclidean;
  if (name == "entropy_simplex" || name == "entropy") return GeometryKind::EntropySimplex;
  throw ConfigError(path, "field '" + path + "': unknown geometry '" + name + "'");
}

std::string geometry_label(GeometryKind g) {
  return g == GeometryKind::Euclidean ? "euclidean" : "entropy_simplex";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

struct Run {
  std::string label;
  Variant variant = Variant::Uapd;
  SolveResult result;
  std::optional<double> reference;
};

json run_summary(const Run& run) {
  const auto& last = run.result.trace.back();
  json j;
  j["label"] = run.label;
  j["variant"] = to_string(run.variant);
  j["iterations"] = last.k;
  j["final_objective"] = last.objective;
  j["final_f_residual"] = last.f_residual;
  j["final_feasibility"] = last.feasibility;
  j["total_line_search"] = last.cumulative_line_search;
  j["final_M"] = last.M;
  j["final_beta"] = last.beta;
  j["wall_time_s"] = last.wall_time_s;
  j["reference_objective"] = run.reference ? json(*run.reference) : json(nullptr);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Long UAPD run whose final objective stands in for an unknown optimum.
std::optional<double> reference_value(const RunConfig& config, const ProblemInstance& inst) {
  if (inst.known_optimum || !config.reference_iterations) return std::nullopt;
  SolverConfig sc = build_solver_config(config, inst);
  sc.max_iterations = *config.reference_iterations;
  sc.feasibility_target = 0.0;
  sc.gap_target = 0.0;
  sc.record_wall_time = false;
  return solve(inst, sc).trace.back().objective;
}

Run execute(const RunConfig& config, ProblemInstance inst, Variant variant,
            const std::string& label) {
  Run run;
  run.label = label;
  run.variant = variant;
  run.reference = reference_value(config, inst);
  if (run.reference) inst.known_optimum = run.reference;
  SolverConfig sc = build_solver_config(config, inst);
  if (variant == Variant::FixedTolerance) {
    if (!config.eps) throw ConfigError("eps", "missing field 'eps' (needed by fixed_tolerance)");
    run.result = solve_fixed_tolerance(inst, sc, *config.eps);
  } else {
    run.result = solve(inst, sc);
  }
  return run;
}

fs::path prepare_out(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  return out_dir;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const FlowDomainError& e) {
    log << "flow error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

std::string to_string(Variant v) {
  return v == Variant::Uapd ? "uapd" : "fixed_tolerance";
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  if (j.contains("instance")) {
    c.instance_source = j.at("instance");
    recipe_from_json(c.instance_source, "instance");
  } else if (j.contains("instance_file")) {
    const fs::path file = base_dir / get_as<std::string>(j, "instance_file", "");
    std::ifstream in(file);
    if (!in) throw ConfigError("instance_file", "cannot open instance_file " + file.string());
    c.instance_source = json::parse(in);
    c.instance_is_stored = true;
  } else {
    throw ConfigError("instance", "missing field 'instance' (or 'instance_file')");
  }

  c.solver = require(j, "solver", "");
  if (!c.solver.is_object()) throw ConfigError("solver", "field 'solver' must be an object");
  if (get_as<int>(c.solver, "max_iterations", "solver") < 0)
    throw ConfigError("solver.max_iterations", "solver.max_iterations must be >= 0");

  if (j.contains("variants")) {
    const json& vs = j.at("variants");
    if (!vs.is_array() || vs.empty())
      throw ConfigError("variants", "field 'variants' must be a non-empty array");
    c.variants.clear();
    for (const auto& v : vs) {
      if (!v.is_string()) throw ConfigError("variants", "field 'variants' must hold strings");
      c.variants.push_back(variant_from(v.get<std::string>(), "variants"));
    }
  } else if (j.contains("variant")) {
    c.variants = {variant_from(get_as<std::string>(j, "variant", ""), "variant")};
  }
  c.eps = get_opt<double>(j, "eps", "");
  if (c.eps && !(*c.eps > 0.0)) throw ConfigError("eps", "field 'eps' must be > 0");
  if (!c.eps && std::ranges::find(c.variants, Variant::FixedTolerance) != c.variants.end())
    throw ConfigError("eps", "missing field 'eps' (needed by fixed_tolerance)");

  if (j.contains("geometries")) {
    const json& gs = j.at("geometries");
    if (!gs.is_array()) throw ConfigError("geometries", "field 'geometries' must be an array");
    for (const auto& g : gs) {
      if (!g.is_string()) throw ConfigError("geometries", "field 'geometries' must hold strings");
      c.geometries.push_back(geometry_from(g.get<std::string>(), "geometries"));
    }
  }
  c.reference_iterations = get_opt<int>(j, "reference_iterations", "");
  if (c.reference_iterations && *c.reference_iterations < 1)
    throw ConfigError("reference_iterations", "field 'reference_iterations' must be >= 1");
  c.timing = get_opt<bool>(j, "timing", "").value_or(true);

  if (j.contains("flow")) {
    const json& f = j.at("flow");
    c.flow.t_end = get_as<double>(f, "t_end", "flow");
    c.flow.dt = get_as<double>(f, "dt", "flow");
    c.flow.gamma0 = get_opt<double>(f, "gamma0", "flow").value_or(c.flow.gamma0);
    c.flow.beta0 = get_opt<double>(f, "beta0", "flow").value_or(c.flow.beta0);
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    c.bounds.nu = get_as<double>(b, "nu", "bounds");
    c.bounds.M_nu = get_opt<double>(b, "M_nu", "bounds");
    c.bounds.fit_k_min = get_opt<int>(b, "fit_k_min", "bounds").value_or(c.bounds.fit_k_min);
    c.bounds.fit_k_max = get_opt<int>(b, "fit_k_max", "bounds").value_or(c.bounds.fit_k_max);
  }
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("<file>", "cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, file.parent_path());
}

ProblemInstance build_instance(const RunConfig& config, std::optional<GeometryKind> geometry) {
  if (config.instance_is_stored) {
    if (geometry) throw ConfigError("geometries", "geometries needs an inline instance recipe");
    return instance_from_json(config.instance_source, "instance");
  }
  InstanceRecipe r = recipe_from_json(config.instance_source, "instance");
  if (geometry) r.game_geometry = *geometry;
  return make_instance(r);
}

SolverConfig build_solver_config(const RunConfig& config, const ProblemInstance& instance) {
  SolverConfig sc = default_config(instance);
  const json& s = config.solver;
  sc.max_iterations = get_as<int>(s, "max_iterations", "solver");
  if (auto v = get_opt<double>(s, "gamma0", "solver")) sc.gamma0 = *v;
  if (auto v = get_opt<double>(s, "M0", "solver")) sc.M0 = *v;
  if (s.contains("delta_scale")) {
    const json& d = s.at("delta_scale");
    if (d.is_string() && d.get<std::string>() == "planned") {
      sc.delta_scale = planned_delta_scale(std::max(sc.max_iterations, 1));
    } else {
      sc.delta_scale = get_as<double>(s, "delta_scale", "solver");
    }
  }
  if (auto v = get_opt<int>(s, "line_search_cap", "solver")) sc.line_search_cap = *v;
  if (auto v = get_opt<double>(s, "feasibility_target", "solver")) sc.feasibility_target = *v;
  if (auto v = get_opt<double>(s, "gap_target", "solver")) sc.gap_target = *v;
  sc.record_wall_time = config.timing;
  sc.validate();
  return sc;
}

int cmd_solve(const fs::path& config_file, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig config = load_config(config_file);
    const fs::path out = prepare_out(out_dir);
    std::vector<std::optional<GeometryKind>> geoms;
    for (auto g : config.geometries) geoms.emplace_back(g);
    if (geoms.empty()) geoms.emplace_back(std::nullopt);

    json summary;
    summary["runs"] = json::array();
    bool instance_written = false;
    for (const auto& g : geoms) {
      const ProblemInstance inst = build_instance(config, g);
      if (!instance_written) {
        write_file(out / "instance.json", dump(instance_to_json(inst)));
        instance_written = true;
      }
      for (Variant v : config.variants) {
        std::string label = to_string(v);
        if (g) label += "_" + geometry_label(*g);
        const Run run = execute(config, inst, v, label);
        write_file(out / ("trace_" + label + ".csv"), trace_to_csv(run.result.trace));
        summary["runs"].push_back(run_summary(run));
        log << label << ": k=" << run.result.trace.back().k
            << " f_residual=" << format_number(run.result.trace.back().f_residual)
            << " feasibility=" << format_number(run.result.trace.back().feasibility) << "\n";
      }
    }
    write_file(out / "summary.json", dump(summary));
    return kExitOk;
  });
}

int cmd_compare(const fs::path& config_file, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig config = load_config(config_file);
    if (!config.eps) throw ConfigError("eps", "missing field 'eps' (needed by fixed_tolerance)");
    const fs::path out = prepare_out(out_dir);
    const ProblemInstance inst = build_instance(config);
    write_file(out / "instance.json", dump(instance_to_json(inst)));
    const Run a = execute(config, inst, Variant::Uapd, "uapd");
    const Run b = execute(config, inst, Variant::FixedTolerance, "fixed_tolerance");
    write_file(out / "trace_uapd.csv", trace_to_csv(a.result.trace));
    write_file(out / "trace_fixed_tolerance.csv", trace_to_csv(b.result.trace));

    std::string csv = "k,f_UAPD,f_base,M_UAPD,M_base,ik_UAPD,ik_base\n";
    const std::size_t rows = std::min(a.result.trace.size(), b.result.trace.size());
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& ra = a.result.trace[i];
      const auto& rb = b.result.trace[i];
      csv += std::to_string(ra.k) + ',' + format_number(ra.f_residual) + ',' +
             format_number(rb.f_residual) + ',' + format_number(ra.M) + ',' +
             format_number(rb.M) + ',' + std::to_string(ra.line_search_count) + ',' +
             std::to_string(rb.line_search_count) + '\n';
    }
    write_file(out / "compare.csv", csv);
    json summary;
    summary["runs"] = {run_summary(a), run_summary(b)};
    write_file(out / "summary.json", dump(summary));
    log << "compare: " << rows << " rows\n";
    return kExitOk;
  });
}

int cmd_flow(const fs::path& config_file, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig config = load_config(config_file);
    const fs::path out = prepare_out(out_dir);
    const ProblemInstance inst = build_instance(config);
    write_file(out / "instance.json", dump(instance_to_json(inst)));
    FlowParams params;
    params.gamma0 = config.flow.gamma0;
    params.beta0 = config.flow.beta0;
    params.mu = inst.mu;
    const Vector x0 = barycenter(inst.geometry);
    const Vector lambda0 = Vector::Zero(inst.num_constraints());
    const FlowTrajectory traj =
        integrate_flow(inst, params, x0, x0, lambda0, config.flow.t_end, config.flow.dt);
    write_file(out / "flow.csv", flow_to_csv(traj));

    json summary;
    summary["samples"] = traj.samples.size();
    summary["t_end"] = traj.final_state.t;
    summary["final_feasibility"] = traj.samples.back().feasibility;
    if (traj.samples.front().lyapunov) {
      const double e0 = *traj.samples.front().lyapunov;
      double worst = 0.0;
      for (const auto& s : traj.samples) worst = std::max(worst, *s.scaled_lyapunov + s.dissipation);
      summary["initial_lyapunov"] = e0;
      summary["max_scaled_lyapunov"] = worst;
    }
    write_file(out / "summary.json", dump(summary));
    log << "flow: " << traj.samples.size() << " samples\n";
    return kExitOk;
  });
}

int cmd_bounds(const fs::path& config_file, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig config = load_config(config_file);
    const fs::path out = prepare_out(out_dir);
    const ProblemInstance inst = build_instance(config);
    write_file(out / "instance.json", dump(instance_to_json(inst)));
    const SolverConfig sc = build_solver_config(config, inst);
    const SolveResult res = solve(inst, sc);
    write_file(out / "trace_uapd.csv", trace_to_csv(res.trace));

    const auto& b = config.bounds;
    double M_nu = 0.0;
    if (b.M_nu) {
      M_nu = *b.M_nu;
    } else if (b.nu == 1.0 && inst.meta.lipschitz) {
      M_nu = *inst.meta.lipschitz;
    } else if (b.nu == 1.0 && inst.meta.smoothed_lipschitz) {
      M_nu = *inst.meta.smoothed_lipschitz;
    } else if (inst.meta.holder_m0_bound) {
      M_nu = *inst.meta.holder_m0_bound;
    } else {
      throw ConfigError("bounds.M_nu", "missing field 'bounds.M_nu' (instance has no reference constant)");
    }
    const int K = res.trace.back().k;
    if (b.fit_k_min < 1 || b.fit_k_max <= b.fit_k_min || b.fit_k_max > K)
      throw ConfigError("bounds.fit_k_max",
                        "bounds fit window must satisfy 1 <= fit_k_min < fit_k_max <= iterations");
    double gamma_min = sc.gamma0;
    for (const auto& r : res.trace) gamma_min = std::min(gamma_min, r.gamma);
    const DecayBoundSpec spec =
        beta_decay_spec(b.nu, sc.mu, sc.gamma0, gamma_min, sc.a_norm, M_nu);

    std::vector<double> fit_obs, fit_env;
    for (const auto& r : res.trace) {
      if (r.k < b.fit_k_min || r.k > b.fit_k_max) continue;
      fit_obs.push_back(r.beta);
      fit_env.push_back(envelope(spec, r.k));
    }
    const double C = fit_constant(fit_obs, fit_env);

    std::vector<double> ks, env, beta;
    bool dominated = true;
    for (const auto& r : res.trace) {
      if (r.k < 1) continue;
      ks.push_back(r.k);
      beta.push_back(r.beta);
      env.push_back(C * envelope(spec, r.k));
      if (r.k > b.fit_k_max && r.beta > env.back()) dominated = false;
    }
    std::string csv = "k,beta,envelope\n";
    for (std::size_t i = 0; i < ks.size(); ++i)
      csv += format_number(ks[i]) + ',' + format_number(beta[i]) + ',' + format_number(env[i]) + '\n';
    write_file(out / "bounds.csv", csv);

    const RateAssumptions assumptions =
        check_rate_assumptions(b.nu, M_nu, sc.M0, sc.gamma0, sc.mu, sc.a_norm);
    json summary;
    summary["nu"] = b.nu;
    summary["M_nu"] = M_nu;
    summary["gamma_min"] = gamma_min;
    summary["fitted_constant"] = C;
    summary["dominated_after_fit_window"] = dominated;
    summary["beta_slope"] = fit_rate(res.trace, TraceColumn::Beta, b.fit_k_max, K);
    summary["assumptions"] = {{"m0_small", assumptions.m0_small},
                              {"gamma_below_norm", assumptions.gamma_below_norm}};
    write_file(out / "summary.json", dump(summary));
    log << "bounds: C=" << format_number(C) << (dominated ? " dominated" : " not dominated")
        << "\n";
    return kExitOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"UAPD solver benchmark harness"};
  app.require_subcommand(1);
  std::string config_file;
  std::string out_dir = ".";
  std::string chosen;
  for (const char* name : {"solve", "compare", "flow", "bounds"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config_file, "JSON run config")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->callback([&chosen, name] { chosen = name; });
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitConfig;
  }
  if (chosen == "solve") return cmd_solve(config_file, out_dir, err);
  if (chosen == "compare") return cmd_compare(config_file, out_dir, err);
  if (chosen == "flow") return cmd_flow(config_file, out_dir, err);
  return cmd_bounds(config_file, out_dir, err);
}

}  // namespace uapd::cli
