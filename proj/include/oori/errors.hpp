#pragma once

#include <stdexcept>
#include <string>

namespace oori {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class AmbiguousIntersection : public Error {
 public:
  using Error::Error;
};

/// Two lines whose normalized determinant is below the parallel tolerance.
class ParallelLines : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace oori
