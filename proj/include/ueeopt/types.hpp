#ifndef UEEOPT_TYPES_HPP
#define UEEOPT_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ueeopt {

using Real = double;
using ArrayX = Eigen::ArrayXd;
using ArrayXb = Eigen::Array<bool, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

/// Invalid argument or value outside a function's mathematical domain.
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed to produce a result within its contract
/// (bracket not found, iteration cap hit, non-finite intermediate).
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ueeopt

#endif
