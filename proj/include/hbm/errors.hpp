#pragma once

#include <stdexcept>
#include <string>

namespace hbm {

// Every library failure derives from Error so callers (and the CLI) can
// catch at one level and still tell the kinds apart.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
  using Error::Error;
};

class ParameterError : public Error {
public:
  using Error::Error;
};

class ConstraintError : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// Raised when an iterative numeric routine (quadrature, eigen solve) cannot
// reach its tolerance.
class NumericalFailure : public Error {
public:
  using Error::Error;
};

class IllConditioned : public Error {
public:
  using Error::Error;
};

class DegenerateSpectrum : public Error {
public:
  using Error::Error;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

// lambda_min of the average Hessian is not positive at the queried point.
class AvgViolated : public Error {
public:
  using Error::Error;
};

class Inapplicable : public Error {
public:
  using Error::Error;
};

class Inconclusive : public Error {
public:
  using Error::Error;
};

class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace hbm
