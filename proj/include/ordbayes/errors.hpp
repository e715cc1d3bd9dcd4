#pragma once

#include <stdexcept>
#include <string>

namespace ordbayes {

/// Bad input data: missing files, header mismatches, out-of-range cells,
/// unknown item or covariate identifiers, incompatible run artifacts.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad run configuration: invalid iteration counts, domain violations on
/// arguments, unusable flag combinations.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numeric breakdown: non-finite posterior values, overflow that the
/// log-sum-exp guards could not prevent.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ordbayes
