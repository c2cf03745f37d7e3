#pragma once

#include <stdexcept>
#include <string>

namespace protonet {

/// Vectors of different dimension were combined.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A prototype id that is not (or no longer) part of the graph.
class UnknownPrototype : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// An experiment or protocol configuration failed validation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data could not be read or parsed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace protonet
