#include "uapd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uapd {

namespace {

void check_nu(double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must lie in [0, 1]");
}

}  // namespace

double holder_constant(double nu, double delta, double M_nu) {
  check_nu(nu);
  if (!(delta > 0.0)) throw std::invalid_argument("holder_constant: delta must be > 0");
  if (!(M_nu > 0.0)) throw std::invalid_argument("holder_constant: M_nu must be > 0");
  if (nu == 1.0) return M_nu;
  return std::pow(delta, (nu - 1.0) / (nu + 1.0)) * std::pow(M_nu, 2.0 / (nu + 1.0));
}

double mk_bound(double nu, double M_nu, double M0, double delta) {
  return std::max(2.0 * std::sqrt(2.0) * holder_constant(nu, delta, M_nu), M0);
}

double line_search_count_bound(int k, double nu, double M_nu, double M0,
                               double delta_next) {
  if (k < 0) throw std::invalid_argument("line_search_count_bound: k must be >= 0");
  const double ratio = holder_constant(nu, delta_next, M_nu) / (M0 / (2.0 * std::sqrt(2.0)));
  return static_cast<double>(k) + 1.0 + std::max(1.0, std::log2(ratio));
}

double line_search_log_term(int k, double nu, double M_nu, double M0,
                            double beta_next) {
  check_nu(nu);
  if (k < 0 || !(beta_next > 0.0) || !(M0 > 0.0) || !(M_nu > 0.0))
    throw std::invalid_argument("line_search_log_term: invalid arguments");
  const double base =
      std::log2(std::pow(M_nu, 2.0 / (1.0 + nu)) / (M0 / (2.0 * std::sqrt(2.0))));
  const double slope = (1.0 - nu) / (1.0 + nu);
  return base + slope * (std::log2(static_cast<double>(k) + 1.0) +
                         std::abs(std::log2(beta_next)));
}

void DecayBoundSpec::validate() const {
  if (!(theta > 1.0)) throw std::invalid_argument("decay spec: theta must be > 1");
  if (!(eta >= 0.0) || eta > theta - 1.0 + 1e-15)
    throw std::invalid_argument("decay spec: need 0 <= eta <= theta - 1");
  if (!(R >= 0.0)) throw std::invalid_argument("decay spec: R must be >= 0");
  if (!varphi || !Sigma) throw std::invalid_argument("decay spec: varphi and Sigma required");
}

double envelope(const DecayBoundSpec& spec, double t) {
  spec.validate();
  if (!(t > 0.0)) throw std::invalid_argument("envelope: t must be > 0");
  const double Sigma = spec.Sigma(t);
  const double phi = spec.varphi(t);
  if (!(phi > 0.0)) throw std::invalid_argument("envelope: varphi must be positive");
  if (!(Sigma >= 0.0)) throw std::invalid_argument("envelope: Sigma must be >= 0");
  const double th = spec.theta;
  const double root_phi = std::sqrt(phi);

  double y2 = 0.0;
  if (spec.R > 0.0) y2 = std::pow(1.0 + (th - 1.0) * Sigma / (2.0 * spec.R), 1.0 / (1.0 - th));

  const double gap = th - 1.0 - spec.eta;
  if (std::abs(gap) <= 1e-15) {
    return std::exp(-Sigma / (2.0 * root_phi)) + y2;
  }
  const double y3 = std::pow(1.0 + gap * Sigma / (2.0 * root_phi), -1.0 / gap);
  return y2 + y3;
}

DecayBoundSpec beta_decay_spec(double nu, double mu, double gamma0,
                               double gamma_min, double A_norm, double M_nu) {
  check_nu(nu);
  if (!(M_nu > 0.0)) throw std::invalid_argument("beta_decay_spec: M_nu must be > 0");
  DecayBoundSpec spec;
  spec.theta = mu > 0.0 ? 1.5 : 2.0;
  spec.eta = nu / (1.0 + nu);
  spec.R = A_norm;
  const double scale = 8.0 * std::sqrt(2.0) * std::pow(M_nu, 2.0 / (1.0 + nu));
  const double power = (1.0 - nu) / (1.0 + nu);
  spec.varphi = [scale, power](double t) { return scale * std::pow(t + 1.0, power); };
  const double sigma = 0.5 * std::sqrt(mu > 0.0 ? gamma_min : gamma0);
  spec.Sigma = [sigma](double t) { return sigma * t; };
  return spec;
}

RateBound beta_rate_bound(double nu, double mu, double gamma0, double gamma_min,
                          double A_norm, double M_nu, int k) {
  check_nu(nu);
  if (k < 1) throw std::invalid_argument("beta_rate_bound: k must be >= 1");
  const double kd = static_cast<double>(k);
  RateBound out;
  if (mu == 0.0) {
    out.value = A_norm / (std::sqrt(gamma0) * kd) +
                M_nu / (std::pow(gamma0, (1.0 + nu) / 2.0) *
                        std::pow(kd, (1.0 + 3.0 * nu) / 2.0));
    return out;
  }
  const double constraint_term = A_norm * A_norm / (gamma_min * kd * kd);
  if (nu < 1.0) {
    out.value = constraint_term +
                std::pow(M_nu, 2.0 / (1.0 - nu)) /
                    (std::pow(gamma_min, (1.0 + nu) / (1.0 - nu)) *
                     std::pow(kd, (1.0 + 3.0 * nu) / (1.0 - nu)));
  } else {
    out.value = constraint_term +
                std::exp(-kd / (8.0 * std::sqrt(3.0)) * std::sqrt(gamma_min / M_nu));
  }
  return out;
}

RateAssumptions check_rate_assumptions(double nu, double M_nu, double M0,
                                       double gamma0, double mu, double A_norm) {
  check_nu(nu);
  RateAssumptions a;
  a.m0_small = M0 <= std::pow(M_nu, 2.0 / (1.0 + nu));
  a.gamma_below_norm = std::max(gamma0, mu) <= A_norm * A_norm;
  return a;
}

double column_value(const IterationRecord& rec, TraceColumn column) {
  switch (column) {
    case TraceColumn::FResidual: return rec.f_residual;
    case TraceColumn::Feasibility: return rec.feasibility;
    case TraceColumn::Beta: return rec.beta;
    case TraceColumn::M: return rec.M;
    case TraceColumn::Alpha: return rec.alpha;
    case TraceColumn::Delta: return rec.delta;
    case TraceColumn::Lyapunov:
      if (!rec.lyapunov) throw std::invalid_argument("trace has no Lyapunov values");
      return *rec.lyapunov;
  }
  return 0.0;
}

double fit_rate(std::span<const double> k, std::span<const double> values) {
  if (k.size() != values.size() || k.size() < 2)
    throw std::invalid_argument("fit_rate: need at least two paired samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0) || !(values[i] > 0.0))
      throw std::invalid_argument("fit_rate: values in the window must be positive");
    const double lx = std::log(k[i]);
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_rate: degenerate window");
  return (n * sxy - sx * sy) / denom;
}

double fit_rate(const std::vector<IterationRecord>& trace, TraceColumn column,
                int k_min, int k_max) {
  if (k_min < 1 || k_max <= k_min) throw std::invalid_argument("fit_rate: bad window");
  std::vector<double> ks, vs;
  for (const auto& rec : trace) {
    if (rec.k < k_min || rec.k > k_max) continue;
    ks.push_back(static_cast<double>(rec.k));
    vs.push_back(column_value(rec, column));
  }
  if (ks.empty() || ks.front() != k_min || ks.back() != k_max)
    throw std::invalid_argument("fit_rate: trace does not cover the window");
  return fit_rate(ks, vs);
}

double fit_constant(std::span<const double> observed, std::span<const double> bound) {
  if (observed.size() != bound.size() || observed.empty())
    throw std::invalid_argument("fit_constant: size mismatch");
  double c = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(bound[i] > 0.0)) throw std::invalid_argument("fit_constant: bound must be > 0");
    c = std::max(c, observed[i] / bound[i]);
  }
  return c;
}

double interpolate_sequence(std::span<const double> beta, double t) {
  if (beta.empty() || t < 0.0) throw std::invalid_argument("interpolate_sequence: bad input");
  const double last = static_cast<double>(beta.size() - 1);
  if (t >= last) {
    if (t > last) throw std::invalid_argument("interpolate_sequence: t beyond data");
    return beta.back();
  }
  const auto k = static_cast<std::size_t>(std::floor(t));
  const double s = t - static_cast<double>(k);
  return beta[k] * (1.0 - s) + beta[k + 1] * s;
}

std::string bounds_to_csv(std::span<const double> k, std::span<const double> bound,
                          std::span<const double> observed) {
  if (k.size() != bound.size() || k.size() != observed.size())
    throw std::invalid_argument("bounds_to_csv: size mismatch");
  std::string out = "k,bound,observed\n";
  for (std::size_t i = 0; i < k.size(); ++i) {
    out += format_number(k[i]);
    out += ',';
    out += format_number(bound[i]);
    out += ',';
    out += format_number(observed[i]);
    out += '\n';
  }
  return out;
}

}  // namespace uapd
