#ifndef UAPD_SOLVER_HPP
#define UAPD_SOLVER_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uapd/common.hpp"
#include "uapd/problems.hpp"

namespace uapd {

// How the line-search tolerance of iteration k is chosen.
//   Dynamic: delta = delta_scale * beta_tilde / (k + 1)
//   Fixed:   delta = eps / (k + 1), the fixed-accuracy baseline.
enum class ToleranceRule { Dynamic, Fixed };

struct SolverConfig {
  double gamma0 = 1.0;
  double M0 = 1.0;
  double mu = 0.0;
  double beta0 = 1.0;
  double a_norm = 0.0;
  double delta_scale = 1.0;
  ToleranceRule tolerance = ToleranceRule::Dynamic;
  double fixed_eps = 0.0;
  int max_iterations = 1000;
  // Stop once every positive target is met. Zero disables a target.
  double feasibility_target = 0.0;
  double gap_target = 0.0;
  int line_search_cap = 60;
  bool record_wall_time = true;

  // Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

// gamma0 = min(1, |A|^2) for constrained instances and 1 otherwise;
// mu and |A| are copied from the instance.
SolverConfig default_config(const ProblemInstance& instance);

// delta = 1 / ln(K + 1), which cancels the log factor of the rate bounds
// for a budget of K iterations.
double planned_delta_scale(int planned_iterations);

struct SolverState {
  Vector x;
  Vector v;
  Vector lambda;
  double beta = 1.0;
  double gamma = 1.0;
  double M = 1.0;
  double alpha = 0.0;  // step that produced this state
  double delta = 0.0;  // tolerance that produced this state
  int k = 0;
  long long total_line_search = 0;
};

SolverState initial_state(const ProblemInstance& instance, const SolverConfig& config);

// Output of one trial of the inner predictor-corrector step.
struct InnerResult {
  Vector y;
  Vector x;
  Vector v;
  Vector lambda_tilde;
  double alpha = 0.0;
  double beta = 0.0;  // beta_k / (1 + alpha)
  double delta = 0.0;
  double model = 0.0;  // h(y) + <grad h(y), x - y> + M/2 |x - y|^2
  double h_x = 0.0;    // h at the new x
};

struct LineSearchTrial {
  double M = 0.0;
  double alpha = 0.0;
  double h_x = 0.0;
  double model = 0.0;
  double delta = 0.0;
};

struct LineSearchResult {
  InnerResult accepted;
  int count = 0;  // i_k
  double M_accepted = 0.0;
  std::vector<LineSearchTrial> history;
};

// Raised when the solver cannot continue: non-finite oracle output or a line
// search that exceeded its cap. Carries the iteration, trial index and the
// trial history.
class SolverError : public std::runtime_error {
 public:
  enum class Reason { NonFinite, LineSearchCap };

  SolverError(Reason reason, int k, int trial, double M,
              std::vector<LineSearchTrial> history, const std::string& what);

  Reason reason() const { return reason_; }
  int iteration() const { return k_; }
  int trial() const { return trial_; }
  double trial_M() const { return M_; }
  const std::vector<LineSearchTrial>& history() const { return history_; }

 private:
  Reason reason_;
  int k_;
  int trial_;
  double M_;
  std::vector<LineSearchTrial> history_;
};

// One pass of the inner step with trial constant M_trial.
InnerResult inner_step(int k, const SolverState& state, double M_trial,
                       const ProblemInstance& instance, const SolverConfig& config);

// Doubles M from state.M until h(x) <= model + delta / 2.
LineSearchResult line_search(int k, const SolverState& state,
                             const ProblemInstance& instance,
                             const SolverConfig& config);

SolverState outer_update(const SolverState& state, const InnerResult& accepted,
                         double M_accepted, int line_search_count,
                         const ProblemInstance& instance,
                         const SolverConfig& config);

// L(x_k, lambda*) - L(x*, lambda_k) + gamma_k D(x*, v_k) + beta_k/2 |lambda_k - lambda*|^2
// with L(x, lambda) = f(x) + <lambda, Ax - b>. Requires a known saddle point.
double lyapunov(const SolverState& state, const ProblemInstance& instance);

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  // f(x_k) - f* when f* is known, f(x_k) otherwise.
  double f_residual = 0.0;
  double feasibility = 0.0;
  int line_search_count = 0;  // i_{k-1}, the trials spent producing x_k
  long long cumulative_line_search = 0;
  double M = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  std::optional<double> lyapunov;
  double wall_time_s = 0.0;
};

// Everything observed during one outer iteration, for diagnostics.
struct StepReport {
  int k = 0;
  const SolverState* before = nullptr;
  const LineSearchResult* line_search = nullptr;
  const SolverState* after = nullptr;
};

using StepObserver = std::function<void(const StepReport&)>;

struct SolveResult {
  SolverState state;
  std::vector<IterationRecord> trace;
};

// The universal accelerated primal-dual method. x0 = v0 = barycenter of Q,
// lambda0 = 0. The trace holds one record per state, including the initial one.
SolveResult solve(const ProblemInstance& instance, const SolverConfig& config,
                  const StepObserver& observer = {});

// Same iteration with the fixed-accuracy tolerance eps / (k + 1).
SolveResult solve_fixed_tolerance(const ProblemInstance& instance,
                                  SolverConfig config, double eps,
                                  const StepObserver& observer = {});

// CSV columns: k,f_residual,feasibility,i_k,M_k,alpha_k,beta_k,delta_k,lyapunov,wall_time_s
std::string trace_csv_header();
std::string trace_to_csv(const std::vector<IterationRecord>& trace);

}  // namespace uapd

#endif  // UAPD_SOLVER_HPP
