#ifndef UAPD_SERIALIZATION_HPP
#define UAPD_SERIALIZATION_HPP

#include <string>

#include <json.hpp>

#include "uapd/problems.hpp"

namespace uapd {

// Raised on a malformed document. field() names the offending key with its
// path, e.g. "instance.smooth.payoff".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Dense matrices are {"rows": r, "cols": c, "data": [row-major values]}.
nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json recipe_to_json(const InstanceRecipe& recipe);
// Fields other than kind, m and n default to the recipe defaults.
InstanceRecipe recipe_from_json(const nlohmann::json& j, const std::string& path);

// Complete instance data. Reading back yields identical doubles.
nlohmann::json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& j,
                                   const std::string& path = "instance");

// Looks up a required key, throwing ConfigError naming path.key if absent.
const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                              const std::string& path);

}  // namespace uapd

#endif  // UAPD_SERIALIZATION_HPP
