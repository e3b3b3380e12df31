#pragma once

#include <stdexcept>
#include <string>

namespace cps {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedFile : Error {
  using Error::Error;
};
struct MissingField : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct Unstabilizable : Error {
  using Error::Error;
};
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct InfeasibleStep : Error {
  using Error::Error;
};

}  // namespace cps
