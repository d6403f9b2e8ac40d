#include "uapd/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace uapd {

namespace {

bool finite_result(const InnerResult& r) {
  return std::isfinite(r.model) && std::isfinite(r.h_x) && std::isfinite(r.alpha) &&
         r.x.allFinite() && r.v.allFinite();
}

void append_number(std::string& out, double value) { out += format_number(value); }

}  // namespace

SolverError::SolverError(Reason reason, int k, int trial, double M,
                         std::vector<LineSearchTrial> history,
                         const std::string& what)
    : std::runtime_error(what),
      reason_(reason),
      k_(k),
      trial_(trial),
      M_(M),
      history_(std::move(history)) {}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("solver config: " + msg); };
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) fail("gamma0 must be > 0");
  if (!(M0 > 0.0) || !std::isfinite(M0)) fail("M0 must be > 0");
  if (beta0 != 1.0) fail("beta0 is fixed at 1");
  if (!(mu >= 0.0)) fail("mu must be >= 0");
  if (!(a_norm >= 0.0)) fail("a_norm must be >= 0");
  if (!(delta_scale > 0.0) || !std::isfinite(delta_scale)) fail("delta_scale must be > 0");
  if (tolerance == ToleranceRule::Fixed && !(fixed_eps > 0.0))
    fail("fixed tolerance needs eps > 0");
  if (max_iterations < 0) fail("max_iterations must be >= 0");
  if (line_search_cap < 0) fail("line_search_cap must be >= 0");
  if (feasibility_target < 0.0 || gap_target < 0.0) fail("targets must be >= 0");
}

SolverConfig default_config(const ProblemInstance& instance) {
  SolverConfig c;
  c.mu = instance.mu;
  c.a_norm = instance.constraint ? instance.a_norm : 0.0;
  c.gamma0 = c.a_norm > 0.0 ? std::min(1.0, c.a_norm * c.a_norm) : 1.0;
  return c;
}

double planned_delta_scale(int planned_iterations) {
  if (planned_iterations < 1)
    throw std::invalid_argument("planned_delta_scale: need K >= 1");
  return 1.0 / std::log(static_cast<double>(planned_iterations) + 1.0);
}

SolverState initial_state(const ProblemInstance& instance, const SolverConfig& config) {
  SolverState s;
  s.x = barycenter(instance.geometry);
  s.v = s.x;
  s.lambda = Vector::Zero(instance.num_constraints());
  s.beta = config.beta0;
  s.gamma = config.gamma0;
  s.M = config.M0;
  return s;
}

InnerResult inner_step(int k, const SolverState& state, double M_trial,
                       const ProblemInstance& instance, const SolverConfig& config) {
  if (!(M_trial > 0.0)) throw std::invalid_argument("inner_step: M_trial must be > 0");
  InnerResult r;
  const double a2 = config.a_norm * config.a_norm;
  r.alpha = std::sqrt(state.beta * state.gamma) / std::sqrt(state.beta * M_trial + a2);
  r.beta = state.beta / (1.0 + r.alpha);
  const double kk = static_cast<double>(k) + 1.0;
  r.delta = config.tolerance == ToleranceRule::Dynamic
                ? config.delta_scale * r.beta / kk
                : config.fixed_eps / kk;

  const double w = 1.0 / (1.0 + r.alpha);
  r.y = w * (state.x + r.alpha * state.v);

  const OracleValue hy = instance.h(r.y);
  Vector linear = hy.gradient;
  if (instance.constraint) {
    r.lambda_tilde = state.lambda + (r.alpha / state.beta) *
                                        (instance.constraint->A * state.v -
                                         instance.constraint->b);
    linear += instance.constraint->A.transpose() * r.lambda_tilde;
  } else {
    r.lambda_tilde = state.lambda;
  }
  if (!std::isfinite(hy.value) || !linear.allFinite()) {
    r.model = std::numeric_limits<double>::quiet_NaN();
    return r;
  }

  CompositeProxQuery q;
  q.linear_term = std::move(linear);
  q.anchor_y = r.y;
  q.weight_y = config.mu;
  q.anchor_v = state.v;
  q.weight_v = state.gamma / r.alpha;
  q.nonsmooth = instance.g;
  r.v = composite_prox(instance.geometry, q);
  r.x = w * (state.x + r.alpha * r.v);

  const Vector step = r.x - r.y;
  r.model = hy.value + hy.gradient.dot(step) + 0.5 * M_trial * step.squaredNorm();
  r.h_x = instance.h_value(r.x);
  return r;
}

LineSearchResult line_search(int k, const SolverState& state,
                             const ProblemInstance& instance,
                             const SolverConfig& config) {
  LineSearchResult out;
  for (int i = 0;; ++i) {
    const double M_trial = std::ldexp(state.M, i);
    InnerResult r;
    try {
      r = inner_step(k, state, M_trial, instance, config);
    } catch (const DomainError& e) {
      throw SolverError(SolverError::Reason::NonFinite, k, i, M_trial, out.history,
                        std::string("prox failure: ") + e.what());
    }
    out.history.push_back({M_trial, r.alpha, r.h_x, r.model, r.delta});
    if (!finite_result(r)) {
      std::ostringstream msg;
      msg << "non-finite oracle output at k=" << k << ", trial " << i
          << ", M=" << M_trial;
      throw SolverError(SolverError::Reason::NonFinite, k, i, M_trial, out.history,
                        msg.str());
    }
    if (r.h_x - r.model <= r.delta / 2.0) {
      out.accepted = std::move(r);
      out.count = i;
      out.M_accepted = M_trial;
      return out;
    }
    if (i >= config.line_search_cap) {
      std::ostringstream msg;
      msg << "line search exceeded " << config.line_search_cap
          << " doublings at k=" << k << " (last M=" << M_trial << ")";
      throw SolverError(SolverError::Reason::LineSearchCap, k, i, M_trial,
                        out.history, msg.str());
    }
  }
}

SolverState outer_update(const SolverState& state, const InnerResult& accepted,
                         double M_accepted, int line_search_count,
                         const ProblemInstance& instance,
                         const SolverConfig& config) {
  SolverState next;
  const double alpha = accepted.alpha;
  next.alpha = alpha;
  next.M = M_accepted;
  next.delta = accepted.delta;
  next.gamma = (state.gamma + config.mu * alpha) / (1.0 + alpha);
  next.beta = state.beta / (1.0 + alpha);
  next.x = accepted.x;
  next.v = accepted.v;
  if (instance.constraint) {
    next.lambda = state.lambda + (alpha / state.beta) *
                                     (instance.constraint->A * next.v -
                                      instance.constraint->b);
  } else {
    next.lambda = state.lambda;
  }
  next.k = state.k + 1;
  next.total_line_search = state.total_line_search + line_search_count;
  return next;
}

double lyapunov(const SolverState& state, const ProblemInstance& instance) {
  if (!instance.known_saddle)
    throw std::invalid_argument("lyapunov: instance has no known saddle point");
  const auto& sp = *instance.known_saddle;
  double gap = instance.objective(state.x) - instance.objective(sp.x);
  double dual = 0.0;
  if (instance.constraint) {
    const auto& A = instance.constraint->A;
    const auto& b = instance.constraint->b;
    gap += sp.lambda.dot(A * state.x - b) - state.lambda.dot(A * sp.x - b);
    dual = 0.5 * state.beta * (state.lambda - sp.lambda).squaredNorm();
  }
  return gap + state.gamma * divergence(instance.geometry, sp.x, state.v) + dual;
}

namespace {

IterationRecord make_record(const SolverState& s, int line_search_count,
                            const ProblemInstance& instance, double elapsed) {
  IterationRecord rec;
  rec.k = s.k;
  rec.objective = instance.objective(s.x);
  rec.f_residual = instance.known_optimum ? rec.objective - *instance.known_optimum
                                          : rec.objective;
  rec.feasibility = instance.feasibility(s.x);
  rec.line_search_count = line_search_count;
  rec.cumulative_line_search = s.total_line_search;
  rec.M = s.M;
  rec.alpha = s.alpha;
  rec.beta = s.beta;
  rec.gamma = s.gamma;
  rec.delta = s.delta;
  if (instance.known_saddle) rec.lyapunov = lyapunov(s, instance);
  rec.wall_time_s = elapsed;
  return rec;
}

bool targets_met(const IterationRecord& rec, const ProblemInstance& instance,
                 const SolverConfig& config) {
  const bool feas = config.feasibility_target > 0.0;
  const bool gap = config.gap_target > 0.0 && instance.known_optimum.has_value();
  if (!feas && !gap) return false;
  if (feas && rec.feasibility > config.feasibility_target) return false;
  if (gap && std::abs(rec.f_residual) > config.gap_target) return false;
  return true;
}

}  // namespace

SolveResult solve(const ProblemInstance& instance, const SolverConfig& config,
                  const StepObserver& observer) {
  config.validate();
  if (config.a_norm == 0.0 && instance.constraint && instance.a_norm > 0.0)
    throw std::invalid_argument("solve: constrained instance needs a_norm > 0");
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&]() -> double {
    if (!config.record_wall_time) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  SolveResult result;
  result.state = initial_state(instance, config);
  result.trace.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
  result.trace.push_back(make_record(result.state, 0, instance, elapsed()));
  if (targets_met(result.trace.back(), instance, config)) return result;

  for (int k = 0; k < config.max_iterations; ++k) {
    const LineSearchResult ls = line_search(k, result.state, instance, config);
    SolverState next = outer_update(result.state, ls.accepted, ls.M_accepted,
                                    ls.count, instance, config);
    if (observer) observer(StepReport{k, &result.state, &ls, &next});
    result.state = std::move(next);
    result.trace.push_back(make_record(result.state, ls.count, instance, elapsed()));
    if (targets_met(result.trace.back(), instance, config)) break;
  }
  return result;
}

SolveResult solve_fixed_tolerance(const ProblemInstance& instance,
                                  SolverConfig config, double eps,
                                  const StepObserver& observer) {
  if (!(eps > 0.0)) throw std::invalid_argument("solve_fixed_tolerance: eps must be > 0");
  config.tolerance = ToleranceRule::Fixed;
  config.fixed_eps = eps;
  return solve(instance, config, observer);
}

std::string trace_csv_header() {
  return "k,f_residual,feasibility,i_k,M_k,alpha_k,beta_k,delta_k,lyapunov,wall_time_s";
}

std::string trace_to_csv(const std::vector<IterationRecord>& trace) {
  std::string out = trace_csv_header();
  out += '\n';
  for (const auto& r : trace) {
    out += std::to_string(r.k);
    out += ',';
    append_number(out, r.f_residual);
    out += ',';
    append_number(out, r.feasibility);
    out += ',';
    out += std::to_string(r.line_search_count);
    out += ',';
    append_number(out, r.M);
    out += ',';
    append_number(out, r.alpha);
    out += ',';
    append_number(out, r.beta);
    out += ',';
    append_number(out, r.delta);
    out += ',';
    if (r.lyapunov) append_number(out, *r.lyapunov);
    out += ',';
    append_number(out, r.wall_time_s);
    out += '\n';
  }
  return out;
}

}  // namespace uapd
