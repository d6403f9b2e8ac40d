#ifndef UAPD_FLOW_HPP
#define UAPD_FLOW_HPP

#include <optional>
#include <string>
#include <vector>

#include "uapd/common.hpp"
#include "uapd/problems.hpp"

namespace uapd {

// Continuous accelerated Bregman primal-dual flow in mirror coordinates
// w = grad phi(v):
//   x'           = grad phi*(w) - x
//   gamma(t) w'  = mu (grad phi(x) - w) - grad f(x) - A^T lambda
//   beta(t) lam' = A grad phi*(w) - b
// with beta(t) = beta0 e^-t and gamma(t) = mu + (gamma0 - mu) e^-t.
struct FlowParams {
  double gamma0 = 1.0;
  double beta0 = 1.0;
  double mu = 0.0;

  double gamma(double t) const;
  double beta(double t) const;
};

struct FlowState {
  Vector x;
  Vector w;
  Vector lambda;
  double t = 0.0;
};

struct FlowDerivative {
  Vector dx;
  Vector dw;
  Vector dlambda;
};

FlowDerivative flow_rhs(const FlowState& state, const ProblemInstance& instance,
                        const FlowParams& params);

// E(x, v, lambda) at time t with v = grad phi*(w).
double flow_lyapunov(const FlowState& state, const ProblemInstance& instance,
                     const FlowParams& params);

struct FlowSample {
  double t = 0.0;
  // Present when the instance has a known saddle point.
  std::optional<double> lyapunov;
  std::optional<double> scaled_lyapunov;  // e^t E(t)
  double feasibility = 0.0;
  // mu * int_0^t e^s D(v, x) ds by the trapezoid rule on the samples.
  double dissipation = 0.0;
};

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  FlowState final_state;
};

// Raised when an entropy iterate leaves the interior of the simplex. Holds the
// trajectory up to the last valid state.
class FlowDomainError : public DomainError {
 public:
  FlowDomainError(const std::string& what, FlowTrajectory partial)
      : DomainError(what), partial_(std::move(partial)) {}
  const FlowTrajectory& partial() const { return partial_; }

 private:
  FlowTrajectory partial_;
};

// Classical fixed-step RK4 in (x, w, lambda) from (x0, v0, lambda0) over
// [0, t_end]. Needs a differentiable instance on R^n or on simplices with the
// entropy geometry.
FlowTrajectory integrate_flow(const ProblemInstance& instance,
                              const FlowParams& params, const Vector& x0,
                              const Vector& v0, const Vector& lambda0,
                              double t_end, double dt);

// CSV columns: t,lyapunov,scaled_lyapunov,feasibility
std::string flow_to_csv(const FlowTrajectory& trajectory);

}  // namespace uapd

#endif  // UAPD_FLOW_HPP
