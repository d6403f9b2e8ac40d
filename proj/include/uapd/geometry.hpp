#ifndef UAPD_GEOMETRY_HPP
#define UAPD_GEOMETRY_HPP

#include <string>
#include <vector>

#include "uapd/common.hpp"

namespace uapd {

// Prox-function family of a geometry block.
//   Euclidean:      phi(x) = 1/2 |x|^2 on R^n, R^n_+ or the simplex.
//   EntropySimplex: phi(x) = <x, ln x> on the standard simplex.
enum class GeometryKind { Euclidean, EntropySimplex };

enum class DomainKind { Full, Nonnegative, Simplex };

struct GeometryBlock {
  GeometryKind kind = GeometryKind::Euclidean;
  DomainKind domain = DomainKind::Full;
  Index offset = 0;
  Index size = 0;
};

// A Bregman geometry on a product of blocks. Most problems use a single
// block; the matrix game lives on a product of two simplices. The feasible
// set Q is the product of the block domains.
class BregmanGeometry {
 public:
  static BregmanGeometry euclidean(Index n, DomainKind domain = DomainKind::Full);
  static BregmanGeometry entropy_simplex(Index n);
  static BregmanGeometry product(const std::vector<BregmanGeometry>& factors);

  Index dimension() const { return dimension_; }
  const std::vector<GeometryBlock>& blocks() const { return blocks_; }

  // True for a single Euclidean block over all of R^n.
  bool is_euclidean_full_space() const;
  bool is_euclidean() const;

  std::string describe() const;

  friend bool operator==(const BregmanGeometry&, const BregmanGeometry&);

 private:
  std::vector<GeometryBlock> blocks_;
  Index dimension_ = 0;
};

bool operator==(const GeometryBlock& a, const GeometryBlock& b);

// Iterates on the simplex are floored here before any logarithm is taken.
inline constexpr double kEntropyFloor = 1e-300;
// Allowed deviation of a simplex block sum from 1.
inline constexpr double kSimplexSumTolerance = 1e-9;

// Throws DomainError when x has the wrong size or lies outside Q.
void check_domain(const BregmanGeometry& geom, const Vector& x);
bool in_domain(const BregmanGeometry& geom, const Vector& x);

// Uniform point on every simplex block, zero elsewhere.
Vector barycenter(const BregmanGeometry& geom);

double prox_function(const BregmanGeometry& geom, const Vector& x);
Vector prox_gradient(const BregmanGeometry& geom, const Vector& x);

// Gradient of the conjugate of phi + indicator(Q), the inverse mirror map:
// argmax_{x in Q} <w, x> - phi(x). Euclidean blocks project w onto their
// domain; entropy blocks return softmax(w).
Vector mirror_inverse(const BregmanGeometry& geom, const Vector& w);

/// D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
double divergence(const BregmanGeometry& geom, const Vector& x,
                  const Vector& y);

/// <grad phi(x) - grad phi(y), y - z> - [D(z,x) - D(z,y) - D(y,x)].
/// Zero up to roundoff; exists as a check of the three-term identity.
double three_term_residual(const BregmanGeometry& geom, const Vector& x,
                           const Vector& y, const Vector& z);

enum class NonsmoothTerm { Zero, SquaredL1Half };

// argmin_v g(v) + <c, v> + weight_y D(v, anchor_y) + weight_v D(v, anchor_v)
struct CompositeProxQuery {
  Vector linear_term;
  Vector anchor_y;
  double weight_y = 0.0;
  Vector anchor_v;
  double weight_v = 1.0;
  NonsmoothTerm nonsmooth = NonsmoothTerm::Zero;
};

double nonsmooth_value(NonsmoothTerm term, const Vector& v);

// Objective of the composite prox subproblem evaluated at v.
double composite_objective(const BregmanGeometry& geom,
                           const CompositeProxQuery& q, const Vector& v);

Vector composite_prox(const BregmanGeometry& geom, const CompositeProxQuery& q);

// argmin_v 1/2 |v - z|^2 + (weight / 2) |v|_1^2.
Vector prox_squared_l1(const Vector& z, double weight);

// Euclidean projection onto the standard simplex.
Vector project_simplex(const Vector& z);

}  // namespace uapd

#endif  // UAPD_GEOMETRY_HPP
