#ifndef UAPD_COMMON_HPP
#define UAPD_COMMON_HPP

#include <charconv>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace uapd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Raised when a point is outside the domain of a Bregman geometry or the
// dimensions of the arguments do not agree.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shortest round-trip decimal form, independent of the locale.
inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

}  // namespace uapd

#endif  // UAPD_COMMON_HPP
