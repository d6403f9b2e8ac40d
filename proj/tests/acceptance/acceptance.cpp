// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "uapd/analysis.hpp"
#include "uapd/flow.hpp"
#include "uapd/geometry.hpp"
#include "uapd/problems.hpp"
#include "uapd/solver.hpp"

using namespace uapd;
using oracle::Random;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0 = none stated
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome three_term_identity() {
  Random rng(101);
  double worst = 0.0;
  for (const auto& g : {BregmanGeometry::euclidean(8), BregmanGeometry::entropy_simplex(8)}) {
    for (int t = 0; t < 1000; ++t) {
      const Vector x = rng.domain_point(g), y = rng.domain_point(g), z = rng.domain_point(g);
      const double scale = 1.0 + std::abs((prox_gradient(g, x) - prox_gradient(g, y)).dot(y - z)) +
                           divergence(g, z, x) + divergence(g, z, y) + divergence(g, y, x);
      worst = std::max(worst, std::abs(three_term_residual(g, x, y, z)) / scale);
    }
  }
  return {worst <= 1e-10, "max relative residual " + fmt(worst)};
}

Outcome composite_prox_oracles() {
  Random rng(202);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index n = rng.integer(1, 10);
    CompositeProxQuery q;
    q.linear_term = rng.normal_vector(n, 2.0);
    q.weight_v = rng.uniform(0.1, 5.0);
    q.weight_y = (t % 3 == 0) ? 0.0 : rng.uniform(0.0, 3.0);
    BregmanGeometry g = BregmanGeometry::euclidean(n);
    Vector expected;
    switch (t % 4) {
      case 0:
        g = BregmanGeometry::entropy_simplex(n);
        q.anchor_v = rng.simplex_point(n);
        q.anchor_y = rng.simplex_point(n);
        expected = oracle::entropy_prox_bisection(q.linear_term, q.anchor_y, q.weight_y,
                                                  q.anchor_v, q.weight_v);
        break;
      case 1:
        g = BregmanGeometry::euclidean(n, DomainKind::Nonnegative);
        q.anchor_v = rng.nonnegative_vector(n);
        q.anchor_y = rng.nonnegative_vector(n);
        expected = oracle::euclidean_prox_projected_gradient(
            DomainKind::Nonnegative, q.linear_term, q.anchor_y, q.weight_y, q.anchor_v, q.weight_v);
        break;
      case 2:
        g = BregmanGeometry::euclidean(n, DomainKind::Simplex);
        q.anchor_v = rng.simplex_point(n);
        q.anchor_y = rng.simplex_point(n);
        expected = oracle::euclidean_prox_projected_gradient(
            DomainKind::Simplex, q.linear_term, q.anchor_y, q.weight_y, q.anchor_v, q.weight_v);
        break;
      default: {
        q.anchor_v = rng.normal_vector(n);
        q.anchor_y = rng.normal_vector(n);
        q.nonsmooth = NonsmoothTerm::SquaredL1Half;
        const double s = q.weight_y + q.weight_v;
        const Vector z = (q.weight_y * q.anchor_y + q.weight_v * q.anchor_v - q.linear_term) / s;
        expected = oracle::squared_l1_threshold_search(z, 1.0 / s);
        break;
      }
    }
    worst = std::max(worst, (composite_prox(g, q) - expected).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-6, "max l-inf gap to oracles " + fmt(worst) + " over 200 queries"};
}

// The four experiment instances at desk scale plus a quadratic program.
std::vector<std::pair<std::string, ProblemInstance>> benchmark_instances() {
  return {{"matrix game 100x400", make_matrix_game(100, 400, 1)},
          {"regularized game 100x400", make_regularized_matrix_game(100, 400, 1, 1e-5)},
          {"steiner 800x400", make_steiner(800, 400, 1)},
          {"basis pursuit 100x500", make_basis_pursuit(100, 500, 1, 10)},
          {"synthetic qp 50x10", make_synthetic_qp(50, 10, 0.0, 1)}};
}

struct TrajectoryChecks {
  double worst_step_identity = 0.0;  // relative
  double worst_descent_slack = 1e300;
};

TrajectoryChecks run_benchmark_trajectories() {
  TrajectoryChecks out;
  for (const auto& [name, inst] : benchmark_instances()) {
    SolverConfig cfg = default_config(inst);
    cfg.max_iterations = 1000;
    cfg.record_wall_time = false;
    solve(inst, cfg, [&](const StepReport& rep) {
      const SolverState& a = *rep.before;
      const SolverState& b = *rep.after;
      const double lhs = b.alpha * b.alpha * (a.beta * b.M + cfg.a_norm * cfg.a_norm);
      const double rhs = a.gamma * a.beta;
      out.worst_step_identity = std::max(out.worst_step_identity, std::abs(lhs - rhs) / rhs);
      const auto& acc = rep.line_search->accepted;
      out.worst_descent_slack =
          std::min(out.worst_descent_slack, b.delta / 2.0 - (acc.h_x - acc.model));
    });
  }
  return out;
}

const TrajectoryChecks& benchmark_checks() {
  static const TrajectoryChecks checks = run_benchmark_trajectories();
  return checks;
}

Outcome step_size_identity() {
  const double w = benchmark_checks().worst_step_identity;
  return {w <= 1e-12, "max relative defect " + fmt(w) + " on 5 trajectories x 1000 iterations"};
}

Outcome accepted_descent() {
  const double s = benchmark_checks().worst_descent_slack;
  return {s >= -1e-9, "min slack " + fmt(s) + " on 5 trajectories x 1000 iterations"};
}

Outcome lyapunov_contraction() {
  double worst_step = 1e300, worst_cum = 1e300;
  for (double mu : {0.0, 0.5}) {
    const auto inst = make_synthetic_qp(50, 10, mu, 5);
    SolverConfig cfg = default_config(inst);
    cfg.max_iterations = 5000;
    cfg.record_wall_time = false;
    const double E0 = lyapunov(initial_state(inst, cfg), inst);
    solve(inst, cfg, [&](const StepReport& rep) {
      const double Ek = lyapunov(*rep.before, inst);
      const double Ek1 = lyapunov(*rep.after, inst);
      const SolverState& b = *rep.after;
      const double step = (Ek / (1.0 + b.alpha) + b.delta / 2.0 - Ek1) / (1.0 + Ek);
      worst_step = std::min(worst_step, step);
      const double cum = b.beta * (E0 + cfg.delta_scale * std::log(b.k + 1.0)) - Ek1;
      worst_cum = std::min(worst_cum, cum);
    });
  }
  const bool pass = worst_step >= -1e-9 && worst_cum >= 0.0;
  return {pass, "min scaled contraction slack " + fmt(worst_step) + ", min cumulative slack " +
                    fmt(worst_cum) + " (mu = 0 and 0.5, 5000 iterations each)"};
}

Outcome rate_exponents() {
  const auto flat = make_synthetic_qp(50, 10, 0.0, 7);
  SolverConfig cfg = default_config(flat);
  cfg.max_iterations = 10000;
  cfg.record_wall_time = false;
  const auto res0 = solve(flat, cfg);
  const double slope = fit_rate(res0.trace, TraceColumn::Beta, 100, 10000);

  const double mu = 0.5;
  const auto strong = make_synthetic_qp(50, 10, mu, 7);
  SolverConfig sc = default_config(strong);
  sc.max_iterations = 10000;
  sc.record_wall_time = false;
  const auto res1 = solve(strong, sc);
  double gamma_min = sc.gamma0;
  for (const auto& r : res1.trace) gamma_min = std::min(gamma_min, r.gamma);
  const auto spec = beta_decay_spec(1.0, mu, sc.gamma0, gamma_min, sc.a_norm, *strong.meta.lipschitz);
  std::vector<double> obs, env;
  for (const auto& r : res1.trace) {
    if (r.k < 10 || r.k > 100) continue;
    obs.push_back(r.beta);
    env.push_back(envelope(spec, r.k));
  }
  const double C = fit_constant(obs, env);
  double worst = 0.0;
  for (const auto& r : res1.trace)
    if (r.k >= 100) worst = std::max(worst, r.beta / (C * envelope(spec, r.k)));
  const bool pass = slope <= -0.9 && worst <= 1.0;
  return {pass, "mu=0 slope " + fmt(slope) + "; mu>0 fitted C " + fmt(C) +
                    ", max beta/(C envelope) on [1e2,1e4] " + fmt(worst)};
}

Outcome line_search_bounds() {
  const auto inst = make_matrix_game(100, 400, 1);
  SolverConfig cfg = default_config(inst);
  cfg.max_iterations = 1000;
  cfg.record_wall_time = false;
  const double M_nu = *inst.meta.holder_m0_bound;
  const auto res = solve(inst, cfg);
  double worst_M = 0.0, worst_count = -1e300;
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    const auto& r = res.trace[i];  // r.M = M_{k+1}, r.delta = delta_{k+1}
    const int k = r.k - 1;
    worst_M = std::max(worst_M, r.M / mk_bound(0.0, M_nu, cfg.M0, r.delta));
    worst_count = std::max(worst_count, static_cast<double>(r.cumulative_line_search) -
                                            line_search_count_bound(k, 0.0, M_nu, cfg.M0, r.delta));
  }
  const bool pass = worst_M <= 1.0 && worst_count <= 0.0;
  return {pass, "max M_k / bound " + fmt(worst_M) + ", max (sum i_j - bound) " + fmt(worst_count) +
                    " with M_0(h) <= " + fmt(M_nu)};
}

Outcome over_estimation() {
  const auto inst = make_matrix_game(100, 400, 1);
  const double eps = 1e-5;
  SolverConfig cfg = default_config(inst);
  cfg.max_iterations = 1000;
  cfg.record_wall_time = false;
  const double M_nu = *inst.meta.holder_m0_bound;
  const auto uapd = solve(inst, cfg);
  const auto base = solve_fixed_tolerance(inst, cfg, eps);
  bool exact = true;
  int compared = 0;
  for (std::size_t i = 1; i < uapd.trace.size(); ++i) {
    const auto& r = uapd.trace[i];
    if (!(r.beta > eps)) continue;
    const double ours = mk_bound(0.0, M_nu, cfg.M0, r.delta);
    const double theirs = mk_bound(0.0, M_nu, cfg.M0, eps / r.k);
    exact = exact && theirs > ours;
    ++compared;
  }
  double ratio = 0.0;
  int n = 0;
  for (int k = 100; k <= 1000; ++k, ++n) ratio += base.trace[k].M / uapd.trace[k].M;
  ratio /= n;
  return {exact && compared > 0, "analytic bound larger at all " + std::to_string(compared) +
                                     " iterations with beta_k > eps; mean accepted M ratio "
                                     "(baseline/UAPD) on [1e2,1e3] = " + fmt(ratio) +
                                     (ratio > 1.0 ? " (> 1)" : " (not > 1, logged only)")};
}

double max_scaled_lyapunov(const FlowTrajectory& traj) {
  const double e0 = *traj.samples.front().lyapunov;
  double worst = 0.0;
  for (const auto& s : traj.samples) worst = std::max(worst, *s.scaled_lyapunov / e0);
  return worst;
}

Outcome flow_decay() {
  const auto inst = make_synthetic_qp(50, 10, 0.0, 9);
  FlowParams p;
  const Vector x0 = Vector::Zero(50), l0 = Vector::Zero(10);
  const double a = max_scaled_lyapunov(integrate_flow(inst, p, x0, x0, l0, 5.0, 1e-3));
  const double b = max_scaled_lyapunov(integrate_flow(inst, p, x0, x0, l0, 5.0, 5e-4));
  return {a <= 1.01 && b <= a, "max e^t E(t)/E(0): " + fmt(a) + " (dt=1e-3), " + fmt(b) +
                                   " (dt=5e-4)"};
}

Outcome end_to_end() {
  std::ostringstream detail;
  bool pass = true;

  // Matrix game under both prox-functions with a shared configuration.
  double f_entropy = 0.0, f_euclid = 0.0;
  for (auto geom : {GeometryKind::EntropySimplex, GeometryKind::Euclidean}) {
    const auto inst = make_matrix_game(100, 400, 1, geom);
    SolverConfig cfg = default_config(inst);
    cfg.gamma0 = 0.1;
    cfg.max_iterations = 50000;
    cfg.record_wall_time = false;
    const double f = solve(inst, cfg).trace.back().f_residual;
    (geom == GeometryKind::EntropySimplex ? f_entropy : f_euclid) = f;
  }
  pass = pass && f_entropy <= 1e-2 && f_entropy < f_euclid;
  detail << "matrix game f=" << fmt(f_entropy) << " (entropy) vs " << fmt(f_euclid)
         << " (euclidean)";

  // Basis pursuit against a 2e4-iteration reference run.
  const auto bp = make_basis_pursuit(100, 500, 1, 10);
  SolverConfig cfg = default_config(bp);
  cfg.gamma0 = bp.a_norm * bp.a_norm;
  cfg.record_wall_time = false;
  SolverConfig ref_cfg = cfg;
  ref_cfg.max_iterations = 20000;
  const double f_ref = solve(bp, ref_cfg).trace.back().objective;
  cfg.max_iterations = 100000;
  cfg.feasibility_target = 1e-3;
  const auto last = solve(bp, cfg).trace.back();
  const double rel = std::abs(last.objective - f_ref) / std::abs(f_ref);
  pass = pass && last.feasibility <= 1e-3 && rel <= 1e-2;
  detail << "; basis pursuit k=" << last.k << " feasibility " << fmt(last.feasibility)
         << ", objective " << fmt(last.objective) << " vs reference " << fmt(f_ref)
         << " (rel " << fmt(rel) << ")";
  return {pass, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "three-term identity", 1.0, three_term_identity},
      {2, "composite prox optimality", 30.0, composite_prox_oracles},
      {3, "step-size identity", 0.0, step_size_identity},
      {4, "accepted descent inequality", 0.0, accepted_descent},
      {5, "Lyapunov contraction", 60.0, lyapunov_contraction},
      {6, "rate exponents", 120.0, rate_exponents},
      {7, "line-search bounds", 0.0, line_search_bounds},
      {8, "over-estimation of M", 0.0, over_estimation},
      {9, "flow decay", 30.0, flow_decay},
      {10, "end-to-end reproduction", 600.0, end_to_end},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass;
    std::string timing = fmt(secs) + " s";
    if (c.time_limit_s > 0.0) {
      timing += " / limit " + fmt(c.time_limit_s) + " s";
      if (secs >= c.time_limit_s) pass = false;
    }
    if (!pass) ++failures;
    std::printf("criterion %2d %s  %s: %s [%s]\n", c.id, pass ? "PASS" : "FAIL", c.name.c_str(),
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
