#pragma once

#include <stdexcept>
#include <string>

namespace clgbn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input data (bad files, schema violations, unknown names).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid graph or constraint set (cycles, whitelist/blacklist conflicts).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: collinear designs, insufficient rows, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace clgbn
