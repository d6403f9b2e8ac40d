#include "uapd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace uapd {

namespace {

// Argmax with ties broken toward the smallest index.
Index first_argmax(const Vector& v, double* max_value) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  if (max_value) *max_value = v[best];
  return best;
}

Matrix standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  // Fill row by row so the draw order matches the row-major serialization.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

double log_sum_exp(const Vector& v) {
  const double shift = v.maxCoeff();
  return shift + std::log((v.array() - shift).exp().sum());
}

struct SmoothEvaluator {
  const Vector& x;
  bool want_gradient;

  OracleValue operator()(const MaxPayoff& d) const {
    const Index n = d.payoff.rows();
    const Index m = d.payoff.cols();
    const Vector px = d.payoff.transpose() * x.head(n);
    const Vector neg_py = -(d.payoff * x.tail(m));
    OracleValue out;
    double hx = 0.0;
    double gy = 0.0;
    const Index j = first_argmax(px, &hx);
    const Index i = first_argmax(neg_py, &gy);
    out.value = hx + gy;
    if (want_gradient) {
      out.gradient.resize(n + m);
      out.gradient.head(n) = d.payoff.col(j);
      out.gradient.tail(m) = -d.payoff.row(i).transpose();
    }
    return out;
  }

  OracleValue operator()(const SmoothedMaxPayoff& d) const {
    const Vector scaled = (d.payoff.transpose() * x) / d.sigma;
    OracleValue out;
    const double lse = log_sum_exp(scaled);
    out.value = d.sigma * lse;
    if (want_gradient) {
      const Vector weights = (scaled.array() - lse).exp().matrix();
      out.gradient = d.payoff * weights;
    }
    return out;
  }

  OracleValue operator()(const SteinerDistance& d) const {
    OracleValue out;
    if (want_gradient) out.gradient = Vector::Zero(x.size());
    for (Index j = 0; j < d.anchors.cols(); ++j) {
      const Vector diff = x - d.anchors.col(j);
      const double dist = diff.norm();
      out.value += dist;
      // A term at its kink contributes the zero subgradient.
      if (want_gradient && dist > 1e-12) out.gradient += diff / dist;
    }
    return out;
  }

  OracleValue operator()(const ZeroFunction&) const {
    OracleValue out;
    if (want_gradient) out.gradient = Vector::Zero(x.size());
    return out;
  }

  OracleValue operator()(const Quadratic& d) const {
    const Vector hx = d.hessian * x;
    OracleValue out;
    out.value = 0.5 * x.dot(hx) + d.linear.dot(x);
    if (want_gradient) out.gradient = hx + d.linear;
    return out;
  }
};

BregmanGeometry simplex_geometry(Index n, GeometryKind kind) {
  return kind == GeometryKind::EntropySimplex
             ? BregmanGeometry::entropy_simplex(n)
             : BregmanGeometry::euclidean(n, DomainKind::Simplex);
}

// Dense KKT solve for min 1/2 x'Hx + c'x s.t. Ax = b.
SaddlePoint solve_kkt(const Matrix& H, const Vector& c, const Matrix& A,
                      const Vector& b) {
  const Index n = H.rows();
  const Index m = A.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = A.transpose();
  K.bottomLeftCorner(m, n) = A;
  Vector rhs(n + m);
  rhs << -c, b;
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("singular KKT system");
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
    throw std::runtime_error("singular KKT system");
  return {sol.head(n), sol.tail(m)};
}

}  // namespace

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::MatrixGame: return "matrix_game";
    case InstanceKind::RegularizedMatrixGame: return "regularized_matrix_game";
    case InstanceKind::Steiner: return "steiner";
    case InstanceKind::BasisPursuit: return "basis_pursuit";
    case InstanceKind::SyntheticQP: return "synthetic_qp";
  }
  return "unknown";
}

InstanceKind instance_kind_from_string(const std::string& name) {
  for (auto k : {InstanceKind::MatrixGame, InstanceKind::RegularizedMatrixGame,
                 InstanceKind::Steiner, InstanceKind::BasisPursuit,
                 InstanceKind::SyntheticQP})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown instance kind '" + name + "'");
}

OracleValue ProblemInstance::h(const Vector& x) const {
  if (x.size() != dimension()) throw DomainError("oracle: dimension mismatch");
  return std::visit(SmoothEvaluator{x, true}, smooth);
}

double ProblemInstance::h_value(const Vector& x) const {
  if (x.size() != dimension()) throw DomainError("oracle: dimension mismatch");
  return std::visit(SmoothEvaluator{x, false}, smooth).value;
}

double ProblemInstance::objective(const Vector& x) const {
  return h_value(x) + nonsmooth_value(g, x);
}

Vector ProblemInstance::apply_A(const Vector& x) const {
  if (!constraint) return Vector();
  return constraint->A * x;
}

Vector ProblemInstance::apply_At(const Vector& lambda) const {
  if (!constraint) return Vector::Zero(dimension());
  return constraint->A.transpose() * lambda;
}

double ProblemInstance::feasibility(const Vector& x) const {
  if (!constraint) return 0.0;
  return (constraint->A * x - constraint->b).norm();
}

bool ProblemInstance::is_differentiable() const {
  if (g != NonsmoothTerm::Zero) return false;
  return std::holds_alternative<SmoothedMaxPayoff>(smooth) ||
         std::holds_alternative<Quadratic>(smooth) ||
         std::holds_alternative<ZeroFunction>(smooth);
}

ProblemInstance make_matrix_game_from(const Matrix& payoff, GeometryKind geometry) {
  const Index n = payoff.rows();
  const Index m = payoff.cols();
  if (n < 1 || m < 1) throw std::invalid_argument("matrix game: m, n must be >= 1");
  ProblemInstance inst;
  inst.recipe.kind = InstanceKind::MatrixGame;
  inst.recipe.m = m;
  inst.recipe.n = n;
  inst.recipe.game_geometry = geometry;
  inst.smooth = MaxPayoff{payoff};
  inst.geometry = BregmanGeometry::product(
      {simplex_geometry(n, geometry), simplex_geometry(m, geometry)});
  inst.known_optimum = 0.0;
  // Every subgradient is (p_j, q_i), so |xi - xi'| <= 2 max |xi|.
  const double col_sq = payoff.colwise().squaredNorm().maxCoeff();
  const double row_sq = payoff.rowwise().squaredNorm().maxCoeff();
  inst.meta.holder_m0_bound = 2.0 * std::sqrt(col_sq + row_sq);
  return inst;
}

ProblemInstance make_matrix_game(Index m, Index n, std::uint64_t seed,
                                 GeometryKind geometry) {
  if (m < 1 || n < 1) throw std::invalid_argument("matrix game: m, n must be >= 1");
  std::mt19937_64 rng(seed);
  auto inst = make_matrix_game_from(standard_normal(n, m, rng), geometry);
  inst.recipe.seed = seed;
  return inst;
}

ProblemInstance make_regularized_matrix_game_from(const Matrix& payoff, double eps,
                                                  GeometryKind geometry) {
  const Index n = payoff.rows();
  const Index m = payoff.cols();
  if (!(eps > 0.0)) throw std::invalid_argument("regularized matrix game: eps must be > 0");
  if (m < 2) throw std::invalid_argument("regularized matrix game: m must be >= 2");
  if (n < 1) throw std::invalid_argument("regularized matrix game: n must be >= 1");
  const double sigma = eps / (2.0 * std::log(static_cast<double>(m)));
  ProblemInstance inst;
  inst.recipe.kind = InstanceKind::RegularizedMatrixGame;
  inst.recipe.m = m;
  inst.recipe.n = n;
  inst.recipe.eps = eps;
  inst.recipe.game_geometry = geometry;
  inst.smooth = SmoothedMaxPayoff{payoff, sigma};
  inst.geometry = simplex_geometry(n, geometry);
  inst.meta.sigma = sigma;
  const double pmax = payoff.cwiseAbs().maxCoeff();
  inst.meta.smoothed_lipschitz = pmax * pmax / (4.0 * sigma);
  return inst;
}

ProblemInstance make_regularized_matrix_game(Index m, Index n, std::uint64_t seed,
                                             double eps, GeometryKind geometry) {
  if (m < 2 || n < 1)
    throw std::invalid_argument("regularized matrix game: need m >= 2, n >= 1");
  std::mt19937_64 rng(seed);
  auto inst = make_regularized_matrix_game_from(standard_normal(n, m, rng), eps, geometry);
  inst.recipe.seed = seed;
  return inst;
}

ProblemInstance make_steiner_from(const Matrix& anchors) {
  if (anchors.rows() < 1 || anchors.cols() < 1)
    throw std::invalid_argument("steiner: m, n must be >= 1");
  ProblemInstance inst;
  inst.recipe.kind = InstanceKind::Steiner;
  inst.recipe.n = anchors.rows();
  inst.recipe.m = anchors.cols();
  inst.smooth = SteinerDistance{anchors};
  inst.geometry = BregmanGeometry::euclidean(anchors.rows(), DomainKind::Nonnegative);
  return inst;
}

ProblemInstance make_steiner(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("steiner: m, n must be >= 1");
  std::mt19937_64 rng(seed);
  auto inst = make_steiner_from(standard_normal(n, m, rng));
  inst.recipe.seed = seed;
  return inst;
}

ProblemInstance make_basis_pursuit_from(const Matrix& A, const Vector& b) {
  if (A.rows() < 1 || A.cols() < 1 || A.rows() != b.size())
    throw std::invalid_argument("basis pursuit: inconsistent A, b");
  ProblemInstance inst;
  inst.recipe.kind = InstanceKind::BasisPursuit;
  inst.recipe.m = A.rows();
  inst.recipe.n = A.cols();
  inst.smooth = ZeroFunction{};
  inst.g = NonsmoothTerm::SquaredL1Half;
  inst.geometry = BregmanGeometry::euclidean(A.cols());
  inst.constraint = AffineConstraint{A, b};
  inst.a_norm = operator_norm(A, 1e-10);
  return inst;
}

ProblemInstance make_basis_pursuit(Index m, Index n, std::uint64_t seed,
                                   Index sparsity) {
  if (m < 1 || m >= n) throw std::invalid_argument("basis pursuit: need 1 <= m < n");
  if (sparsity < 1 || sparsity > m)
    throw std::invalid_argument("basis pursuit: need 1 <= sparsity <= m");
  std::mt19937_64 rng(seed);
  const Matrix A = standard_normal(m, n, rng);
  std::vector<Index> support(static_cast<std::size_t>(n));
  std::iota(support.begin(), support.end(), Index{0});
  std::shuffle(support.begin(), support.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector truth = Vector::Zero(n);
  for (Index s = 0; s < sparsity; ++s) truth[support[s]] = normal(rng);
  const Vector b = A * truth;
  auto inst = make_basis_pursuit_from(A, b);
  inst.recipe.seed = seed;
  inst.recipe.sparsity = sparsity;
  inst.meta.ground_truth = truth;
  return inst;
}

ProblemInstance make_quadratic_program(const Matrix& H, const Vector& c,
                                       const Matrix& A, const Vector& b,
                                       double mu) {
  const Index n = H.rows();
  if (H.cols() != n || c.size() != n || A.cols() != n || A.rows() != b.size() ||
      A.rows() < 1)
    throw std::invalid_argument("quadratic program: inconsistent dimensions");
  if (!(mu >= 0.0)) throw std::invalid_argument("quadratic program: mu must be >= 0");
  ProblemInstance inst;
  inst.recipe.kind = InstanceKind::SyntheticQP;
  inst.recipe.n = n;
  inst.recipe.m = A.rows();
  inst.recipe.mu = mu;
  inst.smooth = Quadratic{H, c};
  inst.mu = mu;
  inst.geometry = BregmanGeometry::euclidean(n);
  inst.constraint = AffineConstraint{A, b};
  inst.a_norm = operator_norm(A, 1e-10);
  inst.known_saddle = solve_kkt(H, c, A, b);
  inst.known_optimum = inst.h_value(inst.known_saddle->x);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  inst.meta.lipschitz = eig.eigenvalues().maxCoeff();
  return inst;
}

ProblemInstance make_synthetic_qp(Index n, Index m, double mu, std::uint64_t seed) {
  if (m < 1 || n < m) throw std::invalid_argument("synthetic qp: need n >= m >= 1");
  if (!(mu >= 0.0)) throw std::invalid_argument("synthetic qp: mu must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  const Matrix G = standard_normal(n, n, rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  Vector spectrum(n);
  for (Index i = 0; i < n; ++i) spectrum[i] = mu + unif(rng);
  Matrix H = Q * spectrum.asDiagonal() * Q.transpose();
  H = 0.5 * (H + H.transpose()).eval();
  const Matrix A = standard_normal(m, n, rng) / std::sqrt(static_cast<double>(n));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector c(n), b(m);
  for (Index i = 0; i < n; ++i) c[i] = normal(rng);
  for (Index i = 0; i < m; ++i) b[i] = normal(rng);
  auto inst = make_quadratic_program(H, c, A, b, mu);
  inst.recipe.seed = seed;
  return inst;
}

ProblemInstance make_instance(const InstanceRecipe& r) {
  switch (r.kind) {
    case InstanceKind::MatrixGame:
      return make_matrix_game(r.m, r.n, r.seed, r.game_geometry);
    case InstanceKind::RegularizedMatrixGame:
      return make_regularized_matrix_game(r.m, r.n, r.seed, r.eps, r.game_geometry);
    case InstanceKind::Steiner:
      return make_steiner(r.m, r.n, r.seed);
    case InstanceKind::BasisPursuit:
      return make_basis_pursuit(r.m, r.n, r.seed, r.sparsity);
    case InstanceKind::SyntheticQP:
      return make_synthetic_qp(r.n, r.m, r.mu, r.seed);
  }
  throw std::invalid_argument("unknown instance kind");
}

double operator_norm(const Matrix& A, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("operator_norm: tol must be > 0");
  if (A.size() == 0 || A.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Vector v = Vector::Ones(A.cols()).normalized();
  double estimate = 0.0;
  constexpr int kMaxIterations = 100000;
  for (int it = 0; it < kMaxIterations; ++it) {
    Vector w = A.transpose() * (A * v);
    const double wn = w.norm();
    if (wn == 0.0) {
      // Start vector in the null space; restart from a coordinate direction.
      v = Vector::Unit(A.cols(), (it + 1) % A.cols());
      continue;
    }
    const double next = std::sqrt(v.dot(w));
    v = w / wn;
    if (it > 0 && std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace uapd
