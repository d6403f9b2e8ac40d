#include "uapd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace uapd {

namespace {

double safe_log(double v) { return std::log(std::max(v, kEntropyFloor)); }

bool simplex_domain(const GeometryBlock& b) {
  return b.kind == GeometryKind::EntropySimplex ||
         b.domain == DomainKind::Simplex;
}

void check_size(const BregmanGeometry& geom, const Vector& x,
                const char* what) {
  if (x.size() != geom.dimension()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (expected " << geom.dimension()
        << ", got " << x.size() << ")";
    throw DomainError(msg.str());
  }
}

void check_block(const GeometryBlock& b, const Eigen::Ref<const Vector>& x) {
  if (!x.allFinite()) throw DomainError("point has non-finite entries");
  if (b.kind == GeometryKind::Euclidean && b.domain == DomainKind::Full) return;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) {
      std::ostringstream msg;
      msg << "negative entry " << x[i] << " at index " << (b.offset + i)
          << " of a nonnegative domain";
      throw DomainError(msg.str());
    }
  }
  if (simplex_domain(b)) {
    const double sum = x.sum();
    if (std::abs(sum - 1.0) > kSimplexSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "simplex block at offset " << b.offset << " sums to " << sum;
      throw DomainError(msg.str());
    }
  }
}

template <typename Fn>
double sum_over_blocks(const BregmanGeometry& geom, Fn&& fn) {
  double total = 0.0;
  for (const auto& b : geom.blocks()) total += fn(b);
  return total;
}

double block_phi(const GeometryBlock& b, const Eigen::Ref<const Vector>& x) {
  if (b.kind == GeometryKind::Euclidean) return 0.5 * x.squaredNorm();
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] > 0.0) s += x[i] * std::log(x[i]);
  return s;
}

double block_divergence(const GeometryBlock& b,
                        const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y) {
  if (b.kind == GeometryKind::Euclidean) return 0.5 * (x - y).squaredNorm();
  // sum x ln(x/y) - x + y, with 0 ln 0 = 0
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double yi = std::max(y[i], kEntropyFloor);
    if (x[i] > 0.0) {
      s += x[i] * (std::log(x[i]) - std::log(yi)) - x[i] + yi;
    } else {
      s += yi;
    }
  }
  return std::max(s, 0.0);
}

// Softmax computed with a max shift.
Vector softmax(const Eigen::Ref<const Vector>& logits) {
  const double shift = logits.maxCoeff();
  Vector e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

}  // namespace

bool operator==(const GeometryBlock& a, const GeometryBlock& b) {
  return a.kind == b.kind && a.domain == b.domain && a.offset == b.offset &&
         a.size == b.size;
}

bool operator==(const BregmanGeometry& a, const BregmanGeometry& b) {
  return a.dimension_ == b.dimension_ && a.blocks_ == b.blocks_;
}

BregmanGeometry BregmanGeometry::euclidean(Index n, DomainKind domain) {
  if (n < 1) throw std::invalid_argument("geometry dimension must be positive");
  BregmanGeometry g;
  g.blocks_.push_back({GeometryKind::Euclidean, domain, 0, n});
  g.dimension_ = n;
  return g;
}

BregmanGeometry BregmanGeometry::entropy_simplex(Index n) {
  if (n < 1) throw std::invalid_argument("geometry dimension must be positive");
  BregmanGeometry g;
  g.blocks_.push_back({GeometryKind::EntropySimplex, DomainKind::Simplex, 0, n});
  g.dimension_ = n;
  return g;
}

BregmanGeometry BregmanGeometry::product(
    const std::vector<BregmanGeometry>& factors) {
  if (factors.empty()) throw std::invalid_argument("empty product geometry");
  BregmanGeometry g;
  for (const auto& f : factors) {
    for (auto b : f.blocks_) {
      b.offset += g.dimension_;
      g.blocks_.push_back(b);
    }
    g.dimension_ += f.dimension_;
  }
  return g;
}

bool BregmanGeometry::is_euclidean_full_space() const {
  return blocks_.size() == 1 && blocks_[0].kind == GeometryKind::Euclidean &&
         blocks_[0].domain == DomainKind::Full;
}

bool BregmanGeometry::is_euclidean() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const auto& b) {
    return b.kind == GeometryKind::Euclidean;
  });
}

std::string BregmanGeometry::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (i) out << " x ";
    if (b.kind == GeometryKind::EntropySimplex) {
      out << "entropy-simplex(" << b.size << ")";
    } else {
      const char* dom = b.domain == DomainKind::Full          ? "R"
                        : b.domain == DomainKind::Nonnegative ? "R+"
                                                              : "simplex";
      out << "euclidean-" << dom << "(" << b.size << ")";
    }
  }
  return out.str();
}

void check_domain(const BregmanGeometry& geom, const Vector& x) {
  check_size(geom, x, "check_domain");
  for (const auto& b : geom.blocks()) check_block(b, x.segment(b.offset, b.size));
}

bool in_domain(const BregmanGeometry& geom, const Vector& x) {
  try {
    check_domain(geom, x);
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

Vector barycenter(const BregmanGeometry& geom) {
  Vector x = Vector::Zero(geom.dimension());
  for (const auto& b : geom.blocks())
    if (simplex_domain(b))
      x.segment(b.offset, b.size).setConstant(1.0 / static_cast<double>(b.size));
  return x;
}

double prox_function(const BregmanGeometry& geom, const Vector& x) {
  check_domain(geom, x);
  return sum_over_blocks(geom, [&](const GeometryBlock& b) {
    return block_phi(b, x.segment(b.offset, b.size));
  });
}

Vector prox_gradient(const BregmanGeometry& geom, const Vector& x) {
  check_domain(geom, x);
  Vector g(x.size());
  for (const auto& b : geom.blocks()) {
    auto xs = x.segment(b.offset, b.size);
    if (b.kind == GeometryKind::Euclidean) {
      g.segment(b.offset, b.size) = xs;
    } else {
      for (Index i = 0; i < b.size; ++i) g[b.offset + i] = 1.0 + safe_log(xs[i]);
    }
  }
  return g;
}

Vector mirror_inverse(const BregmanGeometry& geom, const Vector& w) {
  check_size(geom, w, "mirror_inverse");
  if (!w.allFinite()) throw DomainError("mirror_inverse: non-finite input");
  Vector x(w.size());
  for (const auto& b : geom.blocks()) {
    auto ws = w.segment(b.offset, b.size);
    auto xs = x.segment(b.offset, b.size);
    if (b.kind == GeometryKind::EntropySimplex) {
      xs = softmax(ws);
    } else if (b.domain == DomainKind::Full) {
      xs = ws;
    } else if (b.domain == DomainKind::Nonnegative) {
      xs = ws.cwiseMax(0.0);
    } else {
      xs = project_simplex(ws);
    }
  }
  return x;
}

double divergence(const BregmanGeometry& geom, const Vector& x,
                  const Vector& y) {
  check_domain(geom, x);
  check_domain(geom, y);
  return sum_over_blocks(geom, [&](const GeometryBlock& b) {
    return block_divergence(b, x.segment(b.offset, b.size),
                            y.segment(b.offset, b.size));
  });
}

double three_term_residual(const BregmanGeometry& geom, const Vector& x,
                           const Vector& y, const Vector& z) {
  const Vector gx = prox_gradient(geom, x);
  const Vector gy = prox_gradient(geom, y);
  check_domain(geom, z);
  const double lhs = (gx - gy).dot(y - z);
  const double rhs =
      divergence(geom, z, x) - divergence(geom, z, y) - divergence(geom, y, x);
  return lhs - rhs;
}

double nonsmooth_value(NonsmoothTerm term, const Vector& v) {
  if (term == NonsmoothTerm::Zero) return 0.0;
  const double l1 = v.lpNorm<1>();
  return 0.5 * l1 * l1;
}

double composite_objective(const BregmanGeometry& geom,
                           const CompositeProxQuery& q, const Vector& v) {
  double value = nonsmooth_value(q.nonsmooth, v) + q.linear_term.dot(v) +
                 q.weight_v * divergence(geom, v, q.anchor_v);
  if (q.weight_y > 0.0) value += q.weight_y * divergence(geom, v, q.anchor_y);
  return value;
}

Vector prox_squared_l1(const Vector& z, double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("prox_squared_l1: weight < 0");
  const Index n = z.size();
  std::vector<double> a(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) a[i] = std::abs(z[i]);
  std::sort(a.begin(), a.end(), std::greater<>());

  // With k active coordinates the threshold solves tau = w * sum (a_i - tau),
  // giving tau_k = w S_k / (1 + w k). The active count is the largest k
  // with a_k > tau_k.
  double tau = 0.0;
  double partial = 0.0;
  for (Index k = 1; k <= n; ++k) {
    partial += a[k - 1];
    const double tau_k = weight * partial / (1.0 + weight * static_cast<double>(k));
    if (a[k - 1] > tau_k) {
      tau = tau_k;
    } else {
      break;
    }
  }
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const double mag = std::abs(z[i]) - tau;
    v[i] = mag > 0.0 ? std::copysign(mag, z[i]) : 0.0;
  }
  return v;
}

Vector project_simplex(const Vector& z) {
  const Index n = z.size();
  std::vector<double> u(z.data(), z.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (z.array() - theta).cwiseMax(0.0).matrix();
}

Vector composite_prox(const BregmanGeometry& geom, const CompositeProxQuery& q) {
  const Index n = geom.dimension();
  if (q.linear_term.size() != n || q.anchor_y.size() != n ||
      q.anchor_v.size() != n)
    throw DomainError("composite_prox: dimension mismatch");
  if (!(q.weight_v > 0.0) || !std::isfinite(q.weight_v))
    throw std::invalid_argument("composite_prox: anchor_v weight must be positive");
  if (!(q.weight_y >= 0.0) || !std::isfinite(q.weight_y))
    throw std::invalid_argument("composite_prox: anchor_y weight must be >= 0");
  if (!q.linear_term.allFinite())
    throw DomainError("composite_prox: non-finite linear term");
  check_domain(geom, q.anchor_v);
  if (q.weight_y > 0.0) check_domain(geom, q.anchor_y);
  if (q.nonsmooth == NonsmoothTerm::SquaredL1Half && !geom.is_euclidean_full_space())
    throw std::invalid_argument(
        "composite_prox: squared l1 term requires a full-space Euclidean geometry");

  const double s = q.weight_y + q.weight_v;
  Vector v(n);
  for (const auto& b : geom.blocks()) {
    auto c = q.linear_term.segment(b.offset, b.size);
    auto ay = q.anchor_y.segment(b.offset, b.size);
    auto av = q.anchor_v.segment(b.offset, b.size);
    auto out = v.segment(b.offset, b.size);
    if (b.kind == GeometryKind::EntropySimplex) {
      // Stationarity in log coordinates:
      // s ln v_i = weight_y ln y_i + weight_v ln v_k,i - c_i + const.
      Vector logits(b.size);
      for (Index i = 0; i < b.size; ++i) {
        double l = q.weight_v * safe_log(av[i]) - c[i];
        if (q.weight_y > 0.0) l += q.weight_y * safe_log(ay[i]);
        logits[i] = l / s;
      }
      out = softmax(logits);
      out /= out.sum();
      continue;
    }
    Vector z = (q.weight_v * av - c) / s;
    if (q.weight_y > 0.0) z += (q.weight_y / s) * ay;
    switch (b.domain) {
      case DomainKind::Full:
        out = q.nonsmooth == NonsmoothTerm::SquaredL1Half
                  ? prox_squared_l1(z, 1.0 / s)
                  : z;
        break;
      case DomainKind::Nonnegative:
        out = z.cwiseMax(0.0);
        break;
      case DomainKind::Simplex:
        out = project_simplex(z);
        break;
    }
  }
  if (!v.allFinite()) throw DomainError("composite_prox: non-finite result");
  return v;
}

}  // namespace uapd
