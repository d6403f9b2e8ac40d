#ifndef UAPD_PROBLEMS_HPP
#define UAPD_PROBLEMS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "uapd/common.hpp"
#include "uapd/geometry.hpp"

namespace uapd {

enum class InstanceKind {
  MatrixGame,
  RegularizedMatrixGame,
  Steiner,
  BasisPursuit,
  SyntheticQP,
};

std::string to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(const std::string& name);

// Everything needed to regenerate an instance from scratch.
struct InstanceRecipe {
  InstanceKind kind = InstanceKind::SyntheticQP;
  Index m = 1;
  Index n = 1;
  std::uint64_t seed = 0;
  double eps = 0.0;       // regularized matrix game accuracy
  Index sparsity = 0;     // basis pursuit
  double mu = 0.0;        // synthetic QP convexity
  // Prox geometry of the matrix games (entropy by default, Euclidean for the
  // prox-function ablation).
  GeometryKind game_geometry = GeometryKind::EntropySimplex;
};

// Smooth part h. The variable of a matrix game is the pair (x, y) in
// simplex(n) x simplex(m) and P is n-by-m with columns p_j.

// h(x, y) = max_j <p_j, x> - min_i (P y)_i
struct MaxPayoff {
  Matrix payoff;
};

// h(x) = sigma ln sum_j exp(<p_j, x> / sigma)
struct SmoothedMaxPayoff {
  Matrix payoff;
  double sigma = 1.0;
};

// h(x) = sum_j |x - a_j|, anchors stored as columns.
struct SteinerDistance {
  Matrix anchors;
};

struct ZeroFunction {};

// h(x) = 1/2 <x, H x> + <c, x>
struct Quadratic {
  Matrix hessian;
  Vector linear;
};

using SmoothPart =
    std::variant<MaxPayoff, SmoothedMaxPayoff, SteinerDistance, ZeroFunction, Quadratic>;

struct AffineConstraint {
  Matrix A;
  Vector b;
};

struct SaddlePoint {
  Vector x;
  Vector lambda;
};

struct InstanceMetadata {
  std::optional<double> sigma;
  std::optional<double> smoothed_lipschitz;  // L_sigma reference constant
  std::optional<double> holder_m0_bound;     // upper estimate of M_0(h)
  std::optional<double> lipschitz;           // L_h for quadratics
  std::optional<Vector> ground_truth;        // planted basis pursuit signal
};

struct OracleValue {
  double value = 0.0;
  Vector gradient;
};

// min { h(x) + g(x) : Ax = b, x in Q }.
struct ProblemInstance {
  InstanceRecipe recipe;
  SmoothPart smooth = ZeroFunction{};
  NonsmoothTerm g = NonsmoothTerm::Zero;
  std::optional<AffineConstraint> constraint;
  double mu = 0.0;
  BregmanGeometry geometry = BregmanGeometry::euclidean(1);
  std::optional<SaddlePoint> known_saddle;
  std::optional<double> known_optimum;
  double a_norm = 0.0;
  InstanceMetadata meta;

  Index dimension() const { return geometry.dimension(); }
  Index num_constraints() const { return constraint ? constraint->A.rows() : 0; }

  // Value and a (sub)gradient of h. Ties in max terms pick the smallest index.
  OracleValue h(const Vector& x) const;
  double h_value(const Vector& x) const;
  double objective(const Vector& x) const;  // h + g
  double feasibility(const Vector& x) const;  // |Ax - b|, 0 if unconstrained
  Vector apply_A(const Vector& x) const;
  Vector apply_At(const Vector& lambda) const;
  bool is_differentiable() const;
};

ProblemInstance make_matrix_game(Index m, Index n, std::uint64_t seed,
                                 GeometryKind geometry = GeometryKind::EntropySimplex);
ProblemInstance make_matrix_game_from(const Matrix& payoff,
                                      GeometryKind geometry = GeometryKind::EntropySimplex);

ProblemInstance make_regularized_matrix_game(
    Index m, Index n, std::uint64_t seed, double eps,
    GeometryKind geometry = GeometryKind::EntropySimplex);
ProblemInstance make_regularized_matrix_game_from(
    const Matrix& payoff, double eps,
    GeometryKind geometry = GeometryKind::EntropySimplex);

ProblemInstance make_steiner(Index m, Index n, std::uint64_t seed);
ProblemInstance make_steiner_from(const Matrix& anchors);

ProblemInstance make_basis_pursuit(Index m, Index n, std::uint64_t seed,
                                   Index sparsity);
ProblemInstance make_basis_pursuit_from(const Matrix& A, const Vector& b);

// Random quadratic program with a planted spectrum in [mu, mu + 4] and
// full-row-rank A. Throws std::runtime_error if the KKT system is singular.
ProblemInstance make_synthetic_qp(Index n, Index m, double mu, std::uint64_t seed);
// Quadratic program from explicit data; the saddle point solves the KKT
// system [H A^T; A 0] [x; lambda] = [-c; b].
ProblemInstance make_quadratic_program(const Matrix& H, const Vector& c,
                                       const Matrix& A, const Vector& b,
                                       double mu);

ProblemInstance make_instance(const InstanceRecipe& recipe);

// Spectral norm by power iteration on A^T A from the normalized all-ones
// vector, stopping when the relative change drops below tol.
double operator_norm(const Matrix& A, double tol = 1e-10);

}  // namespace uapd

#endif  // UAPD_PROBLEMS_HPP
