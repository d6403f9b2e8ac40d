#include "uapd/serialization.hpp"

#include <type_traits>

namespace uapd {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class T>
T read(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(join(path, key), "field '" + join(path, key) + "' has the wrong type");
  }
}

template <class T>
T read_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return read<T>(j, key, path);
}

std::string geometry_kind_name(GeometryKind k) {
  return k == GeometryKind::Euclidean ? "euclidean" : "entropy_simplex";
}

GeometryKind geometry_kind_from(const std::string& name, const std::string& path) {
  if (name == "euclidean") return GeometryKind::Euclidean;
  if (name == "entropy_simplex" || name == "entropy") return GeometryKind::EntropySimplex;
  throw ConfigError(path, "field '" + path + "': unknown geometry '" + name + "'");
}

std::string domain_name(DomainKind d) {
  switch (d) {
    case DomainKind::Full: return "full";
    case DomainKind::Nonnegative: return "nonnegative";
    case DomainKind::Simplex: return "simplex";
  }
  return "full";
}

DomainKind domain_from(const std::string& name, const std::string& path) {
  if (name == "full") return DomainKind::Full;
  if (name == "nonnegative") return DomainKind::Nonnegative;
  if (name == "simplex") return DomainKind::Simplex;
  throw ConfigError(path, "field '" + path + "': unknown domain '" + name + "'");
}

json smooth_to_json(const SmoothPart& part) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, MaxPayoff>) {
          return {{"type", "max_payoff"}, {"payoff", matrix_to_json(d.payoff)}};
        } else if constexpr (std::is_same_v<T, SmoothedMaxPayoff>) {
          return {{"type", "smoothed_max_payoff"},
                  {"payoff", matrix_to_json(d.payoff)},
                  {"sigma", d.sigma}};
        } else if constexpr (std::is_same_v<T, SteinerDistance>) {
          return {{"type", "steiner"}, {"anchors", matrix_to_json(d.anchors)}};
        } else if constexpr (std::is_same_v<T, ZeroFunction>) {
          return {{"type", "zero"}};
        } else {
          return {{"type", "quadratic"},
                  {"hessian", matrix_to_json(d.hessian)},
                  {"linear", vector_to_json(d.linear)}};
        }
      },
      part);
}

SmoothPart smooth_from_json(const json& j, const std::string& path) {
  const auto type = read<std::string>(j, "type", path);
  if (type == "max_payoff")
    return MaxPayoff{matrix_from_json(require(j, "payoff", path), join(path, "payoff"))};
  if (type == "smoothed_max_payoff")
    return SmoothedMaxPayoff{
        matrix_from_json(require(j, "payoff", path), join(path, "payoff")),
        read<double>(j, "sigma", path)};
  if (type == "steiner")
    return SteinerDistance{matrix_from_json(require(j, "anchors", path), join(path, "anchors"))};
  if (type == "zero") return ZeroFunction{};
  if (type == "quadratic")
    return Quadratic{matrix_from_json(require(j, "hessian", path), join(path, "hessian")),
                     vector_from_json(require(j, "linear", path), join(path, "linear"))};
  throw ConfigError(join(path, "type"), "unknown smooth part '" + type + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_number_from(const json& j, const std::string& key,
                                           const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return read<double>(j, key, path);
}

}  // namespace

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object())
    throw ConfigError(path, "field '" + (path.empty() ? std::string("<root>") : path) +
                                "' must be an object");
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(join(path, key), "missing field '" + join(path, key) + "'");
  return *it;
}

json matrix_to_json(const Matrix& M) {
  json data = json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  const auto rows = read<Index>(j, "rows", path);
  const auto cols = read<Index>(j, "cols", path);
  const json& data = require(j, "data", path);
  if (rows < 0 || cols < 0 || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols))
    throw ConfigError(path, "field '" + path + "': data does not match rows x cols");
  Matrix M(rows, cols);
  std::size_t t = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) {
      if (!data[t].is_number())
        throw ConfigError(join(path, "data"), "field '" + join(path, "data") + "' must hold numbers");
      M(i, k) = data[t++].get<double>();
    }
  return M;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "field '" + path + "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path, "field '" + path + "' must hold numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

json recipe_to_json(const InstanceRecipe& r) {
  return {{"kind", to_string(r.kind)},
          {"m", r.m},
          {"n", r.n},
          {"seed", r.seed},
          {"eps", r.eps},
          {"sparsity", r.sparsity},
          {"mu", r.mu},
          {"geometry", geometry_kind_name(r.game_geometry)}};
}

InstanceRecipe recipe_from_json(const json& j, const std::string& path) {
  InstanceRecipe r;
  const auto kind = read<std::string>(j, "kind", path);
  try {
    r.kind = instance_kind_from_string(kind);
  } catch (const std::invalid_argument&) {
    throw ConfigError(join(path, "kind"), "unknown instance kind '" + kind + "'");
  }
  r.m = read<Index>(j, "m", path);
  r.n = read<Index>(j, "n", path);
  r.seed = read_or<std::uint64_t>(j, "seed", path, r.seed);
  r.eps = read_or<double>(j, "eps", path, r.eps);
  r.sparsity = read_or<Index>(j, "sparsity", path, r.sparsity);
  r.mu = read_or<double>(j, "mu", path, r.mu);
  if (j.contains("geometry"))
    r.game_geometry = geometry_kind_from(read<std::string>(j, "geometry", path),
                                         join(path, "geometry"));
  return r;
}

json instance_to_json(const ProblemInstance& inst) {
  json out;
  out["kind"] = to_string(inst.recipe.kind);
  out["recipe"] = recipe_to_json(inst.recipe);
  out["smooth"] = smooth_to_json(inst.smooth);
  out["g"] = inst.g == NonsmoothTerm::Zero ? "zero" : "squared_l1_half";
  if (inst.constraint) {
    out["constraint"] = {{"A", matrix_to_json(inst.constraint->A)},
                         {"b", vector_to_json(inst.constraint->b)}};
  } else {
    out["constraint"] = nullptr;
  }
  out["mu"] = inst.mu;
  json blocks = json::array();
  for (const auto& b : inst.geometry.blocks())
    blocks.push_back({{"kind", geometry_kind_name(b.kind)},
                      {"domain", domain_name(b.domain)},
                      {"size", b.size}});
  out["geometry"] = std::move(blocks);
  if (inst.known_saddle) {
    out["known_saddle"] = {{"x", vector_to_json(inst.known_saddle->x)},
                           {"lambda", vector_to_json(inst.known_saddle->lambda)}};
  } else {
    out["known_saddle"] = nullptr;
  }
  out["known_optimum"] = optional_number(inst.known_optimum);
  out["a_norm"] = inst.a_norm;
  json meta;
  meta["sigma"] = optional_number(inst.meta.sigma);
  meta["smoothed_lipschitz"] = optional_number(inst.meta.smoothed_lipschitz);
  meta["holder_m0_bound"] = optional_number(inst.meta.holder_m0_bound);
  meta["lipschitz"] = optional_number(inst.meta.lipschitz);
  meta["ground_truth"] =
      inst.meta.ground_truth ? vector_to_json(*inst.meta.ground_truth) : json(nullptr);
  out["meta"] = std::move(meta);
  return out;
}

ProblemInstance instance_from_json(const json& j, const std::string& path) {
  ProblemInstance inst;
  inst.recipe = recipe_from_json(require(j, "recipe", path), join(path, "recipe"));
  inst.smooth = smooth_from_json(require(j, "smooth", path), join(path, "smooth"));
  const auto g = read<std::string>(j, "g", path);
  if (g == "zero") {
    inst.g = NonsmoothTerm::Zero;
  } else if (g == "squared_l1_half") {
    inst.g = NonsmoothTerm::SquaredL1Half;
  } else {
    throw ConfigError(join(path, "g"), "unknown nonsmooth term '" + g + "'");
  }
  const json& c = require(j, "constraint", path);
  if (!c.is_null()) {
    const auto cp = join(path, "constraint");
    AffineConstraint ac{matrix_from_json(require(c, "A", cp), join(cp, "A")),
                        vector_from_json(require(c, "b", cp), join(cp, "b"))};
    if (ac.A.rows() != ac.b.size())
      throw ConfigError(cp, "field '" + cp + "': A and b disagree in size");
    inst.constraint = std::move(ac);
  }
  inst.mu = read<double>(j, "mu", path);

  const json& blocks = require(j, "geometry", path);
  const auto gp = join(path, "geometry");
  if (!blocks.is_array() || blocks.empty())
    throw ConfigError(gp, "field '" + gp + "' must be a non-empty array");
  std::vector<BregmanGeometry> factors;
  for (const auto& b : blocks) {
    const auto kind = geometry_kind_from(read<std::string>(b, "kind", gp), join(gp, "kind"));
    const auto domain = domain_from(read<std::string>(b, "domain", gp), join(gp, "domain"));
    const auto size = read<Index>(b, "size", gp);
    if (size < 1) throw ConfigError(join(gp, "size"), "geometry block size must be >= 1");
    factors.push_back(kind == GeometryKind::EntropySimplex
                          ? BregmanGeometry::entropy_simplex(size)
                          : BregmanGeometry::euclidean(size, domain));
  }
  inst.geometry = factors.size() == 1 ? factors.front() : BregmanGeometry::product(factors);

  const json& sp = require(j, "known_saddle", path);
  if (!sp.is_null()) {
    const auto p = join(path, "known_saddle");
    inst.known_saddle = SaddlePoint{vector_from_json(require(sp, "x", p), join(p, "x")),
                                    vector_from_json(require(sp, "lambda", p), join(p, "lambda"))};
  }
  inst.known_optimum = optional_number_from(j, "known_optimum", path);
  inst.a_norm = read<double>(j, "a_norm", path);
  if (j.contains("meta") && j.at("meta").is_object()) {
    const json& m = j.at("meta");
    const auto mp = join(path, "meta");
    inst.meta.sigma = optional_number_from(m, "sigma", mp);
    inst.meta.smoothed_lipschitz = optional_number_from(m, "smoothed_lipschitz", mp);
    inst.meta.holder_m0_bound = optional_number_from(m, "holder_m0_bound", mp);
    inst.meta.lipschitz = optional_number_from(m, "lipschitz", mp);
    if (m.contains("ground_truth") && !m.at("ground_truth").is_null())
      inst.meta.ground_truth = vector_from_json(m.at("ground_truth"), join(mp, "ground_truth"));
  }
  return inst;
}

}  // namespace uapd
