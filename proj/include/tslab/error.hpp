#pragma once

#include <stdexcept>
#include <string>

namespace tslab {

/// Malformed or invariant-violating market data (CSV rows, prices, lengths).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally invalid pipeline configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tslab
