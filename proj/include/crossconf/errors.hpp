#pragma once

#include <stdexcept>
#include <string>

namespace crossconf {

/// Parameters that cannot describe a valid procedure (K > n, tau outside (0,1), ...).
class InvalidConfiguration : public std::invalid_argument {
 public:
  explicit InvalidConfiguration(const std::string& what) : std::invalid_argument(what) {}
};

/// Input data that violates a container invariant (non-finite entries, shape mismatch,
/// non-numeric CSV column, missing target).
class InvalidData : public std::runtime_error {
 public:
  explicit InvalidData(const std::string& what) : std::runtime_error(what) {}
};

/// A fit or decomposition that did not produce finite output.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crossconf
