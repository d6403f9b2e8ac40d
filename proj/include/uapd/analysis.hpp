#ifndef UAPD_ANALYSIS_HPP
#define UAPD_ANALYSIS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "uapd/solver.hpp"

namespace uapd {

// M(nu, delta) = delta^((nu-1)/(nu+1)) * M_nu^(2/(nu+1)), the quadratic
// constant that upper-bounds a Hoelder-smooth function up to slack delta/2.
double holder_constant(double nu, double delta, double M_nu);

// max{2 sqrt(2) M(nu, delta), M0}: bound on the accepted line-search constant.
double mk_bound(double nu, double M_nu, double M0, double delta);

// k + 1 + max{1, log2(M(nu, delta_next) / (M0 / (2 sqrt 2)))}: bound on
// the cumulative line-search count after iteration k.
double line_search_count_bound(int k, double nu, double M_nu, double M0,
                               double delta_next);

// The logarithm above written out for delta_next = beta_next / (k + 1):
// log2(M_nu^(2/(1+nu)) / (M0 / 2 sqrt 2))
//   + (1-nu)/(1+nu) (log2(k+1) + |log2 beta_next|).
// beta_next may be replaced by a target accuracy.
double line_search_log_term(int k, double nu, double M_nu, double M0,
                            double beta_next);

// Differential inequality
//   y' <= -sigma(t) y^theta / sqrt(varphi(t) y^(2 eta) + R^2),  y(0) = 1,
// with Sigma(t) the integral of sigma over [0, t].
struct DecayBoundSpec {
  double theta = 2.0;
  double eta = 0.0;
  double R = 0.0;
  std::function<double(double)> varphi;
  std::function<double(double)> Sigma;

  void validate() const;
};

// Closed-form majorant of y(t):
//   eta <  theta - 1: Y2 + Y3
//   eta == theta - 1: Y1 + Y2
// where Y1 = exp(-Sigma / (2 sqrt varphi)),
//       Y2 = (1 + (theta-1) Sigma / (2R))^(1/(1-theta)),
//       Y3 = (1 + (theta-eta-1) Sigma / (2 sqrt varphi))^(1/(eta+1-theta)).
// R = 0 drops Y2.
double envelope(const DecayBoundSpec& spec, double t);

// The inequality satisfied by the piecewise-linear interpolation of beta_k:
// theta = 2 (mu = 0) or 3/2 (mu > 0), eta = nu/(1+nu),
// varphi(t) = 8 sqrt 2 (t+1)^((1-nu)/(1+nu)) M_nu^(2/(1+nu)),
// sigma = sqrt(gamma)/2 with gamma = gamma0 (mu = 0) or gamma_min.
DecayBoundSpec beta_decay_spec(double nu, double mu, double gamma0,
                               double gamma_min, double A_norm, double M_nu);

struct RateBound {
  double value = 0.0;     // the bracketed rate expression, constant set to 1
  double constant = 1.0;  // C_nu, unknown in closed form
};

// Structural decay rate of beta_k for k >= 1.
//   mu = 0: |A| / (sqrt(gamma0) k) + M_nu / (gamma0^((1+nu)/2) k^((1+3nu)/2))
//   mu > 0, nu < 1: |A|^2/(gamma_min k^2)
//                   + M_nu^(2/(1-nu)) / (gamma_min^((1+nu)/(1-nu)) k^((1+3nu)/(1-nu)))
//   mu > 0, nu = 1: |A|^2/(gamma_min k^2) + exp(-k/(8 sqrt 3) sqrt(gamma_min / L))
RateBound beta_rate_bound(double nu, double mu, double gamma0, double gamma_min,
                          double A_norm, double M_nu, int k);

// Assumptions under which the rate bound is proven. Reported, never enforced.
struct RateAssumptions {
  bool m0_small = true;         // M0 <= M_nu^(2/(1+nu))
  bool gamma_below_norm = true; // max{gamma0, mu} <= |A|^2
  bool all() const { return m0_small && gamma_below_norm; }
};

RateAssumptions check_rate_assumptions(double nu, double M_nu, double M0,
                                       double gamma0, double mu, double A_norm);

enum class TraceColumn { FResidual, Feasibility, Beta, M, Alpha, Delta, Lyapunov };

double column_value(const IterationRecord& rec, TraceColumn column);

// Least-squares slope of log(value) against log(k) over k in [k_min, k_max].
double fit_rate(const std::vector<IterationRecord>& trace, TraceColumn column,
                int k_min, int k_max);
double fit_rate(std::span<const double> k, std::span<const double> values);

// Smallest C with observed <= C * bound on every point.
double fit_constant(std::span<const double> observed, std::span<const double> bound);

// y(t) = beta_k (k + 1 - t) + beta_{k+1} (t - k) on [k, k + 1).
double interpolate_sequence(std::span<const double> beta, double t);

// CSV with columns k,bound,observed.
std::string bounds_to_csv(std::span<const double> k, std::span<const double> bound,
                          std::span<const double> observed);

}  // namespace uapd

#endif  // UAPD_ANALYSIS_HPP
