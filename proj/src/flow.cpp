#include "uapd/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "uapd/solver.hpp"

namespace uapd {

namespace {

void check_flow_instance(const ProblemInstance& instance) {
  if (!instance.is_differentiable())
    throw std::invalid_argument("flow: instance must be differentiable with g = 0");
  for (const auto& b : instance.geometry.blocks()) {
    const bool ok = b.kind == GeometryKind::EntropySimplex ||
                    (b.kind == GeometryKind::Euclidean && b.domain == DomainKind::Full);
    if (!ok)
      throw std::invalid_argument("flow: Euclidean blocks must be unconstrained");
  }
}

FlowState advance(const FlowState& s, const FlowDerivative& d, double h) {
  FlowState out;
  out.x = s.x + h * d.dx;
  out.w = s.w + h * d.dw;
  out.lambda = s.lambda + h * d.dlambda;
  out.t = s.t + h;
  return out;
}

}  // namespace

double FlowParams::gamma(double t) const { return mu + (gamma0 - mu) * std::exp(-t); }

double FlowParams::beta(double t) const { return beta0 * std::exp(-t); }

FlowDerivative flow_rhs(const FlowState& state, const ProblemInstance& instance,
                        const FlowParams& params) {
  check_flow_instance(instance);
  const auto& geom = instance.geometry;
  const Vector v = mirror_inverse(geom, state.w);
  FlowDerivative d;
  d.dx = v - state.x;
  Vector force = -instance.h(state.x).gradient - instance.apply_At(state.lambda);
  if (params.mu > 0.0) force += params.mu * (prox_gradient(geom, state.x) - state.w);
  d.dw = force / params.gamma(state.t);
  if (instance.constraint) {
    d.dlambda = (instance.constraint->A * v - instance.constraint->b) / params.beta(state.t);
  } else {
    d.dlambda = Vector::Zero(state.lambda.size());
  }
  return d;
}

double flow_lyapunov(const FlowState& state, const ProblemInstance& instance,
                     const FlowParams& params) {
  SolverState s;
  s.x = state.x;
  s.v = mirror_inverse(instance.geometry, state.w);
  s.lambda = state.lambda;
  s.beta = params.beta(state.t);
  s.gamma = params.gamma(state.t);
  return lyapunov(s, instance);
}

FlowTrajectory integrate_flow(const ProblemInstance& instance,
                              const FlowParams& params, const Vector& x0,
                              const Vector& v0, const Vector& lambda0,
                              double t_end, double dt) {
  check_flow_instance(instance);
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw std::invalid_argument("flow: need dt > 0, t_end >= 0");
  if (!(params.gamma0 > 0.0) || !(params.beta0 > 0.0) || !(params.mu >= 0.0))
    throw std::invalid_argument("flow: need gamma0, beta0 > 0 and mu >= 0");
  if (lambda0.size() != instance.num_constraints())
    throw std::invalid_argument("flow: lambda0 has the wrong size");
  const auto& geom = instance.geometry;
  check_domain(geom, x0);
  check_domain(geom, v0);

  FlowTrajectory traj;
  FlowState s{x0, prox_gradient(geom, v0), lambda0, 0.0};
  const bool track = instance.known_saddle.has_value();

  double previous_integrand = 0.0;
  auto record = [&](const FlowState& st) {
    FlowSample sample;
    sample.t = st.t;
    if (track) {
      sample.lyapunov = flow_lyapunov(st, instance, params);
      sample.scaled_lyapunov = std::exp(st.t) * *sample.lyapunov;
    }
    sample.feasibility = instance.feasibility(st.x);
    double integrand = 0.0;
    if (params.mu > 0.0)
      integrand = params.mu * std::exp(st.t) *
                  divergence(geom, mirror_inverse(geom, st.w), st.x);
    if (!traj.samples.empty()) {
      const double h = st.t - traj.samples.back().t;
      sample.dissipation = traj.samples.back().dissipation +
                           0.5 * h * (previous_integrand + integrand);
    }
    previous_integrand = integrand;
    traj.samples.push_back(sample);
  };

  record(s);
  const auto steps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
  for (long long i = 0; i < steps; ++i) {
    const double h = std::min(dt, t_end - s.t);
    FlowState next;
    try {
      const FlowDerivative k1 = flow_rhs(s, instance, params);
      const FlowDerivative k2 = flow_rhs(advance(s, k1, h / 2), instance, params);
      const FlowDerivative k3 = flow_rhs(advance(s, k2, h / 2), instance, params);
      const FlowDerivative k4 = flow_rhs(advance(s, k3, h), instance, params);
      next.x = s.x + (h / 6) * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
      next.w = s.w + (h / 6) * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
      next.lambda =
          s.lambda + (h / 6) * (k1.dlambda + 2 * k2.dlambda + 2 * k3.dlambda + k4.dlambda);
      next.t = (i + 1 == steps) ? t_end : s.t + h;
      check_domain(geom, next.x);
      if (!next.w.allFinite() || !next.lambda.allFinite())
        throw DomainError("non-finite flow state");
    } catch (const DomainError& e) {
      traj.final_state = s;
      throw FlowDomainError(std::string("flow left the domain at t=") +
                                format_number(s.t) + ": " + e.what(),
                            std::move(traj));
    }
    s = std::move(next);
    record(s);
  }
  traj.final_state = s;
  return traj;
}

std::string flow_to_csv(const FlowTrajectory& trajectory) {
  std::string out = "t,lyapunov,scaled_lyapunov,feasibility\n";
  for (const auto& s : trajectory.samples) {
    out += format_number(s.t);
    out += ',';
    if (s.lyapunov) out += format_number(*s.lyapunov);
    out += ',';
    if (s.scaled_lyapunov) out += format_number(*s.scaled_lyapunov);
    out += ',';
    out += format_number(s.feasibility);
    out += '\n';
  }
  return out;
}

}  // namespace uapd
