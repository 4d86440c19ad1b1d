#pragma once

#include <stdexcept>
#include <string>

namespace mpgreen {

// Base of every error raised by the library. Domain errors map to CLI exit
// code 2, everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid indices, negative radii and similar caller mistakes.
class DomainError : public Error {
 public:
  using Error::Error;
};

class RegimeError : public Error {
 public:
  using Error::Error;
};

class ZeroWaveVector : public DomainError {
 public:
  ZeroWaveVector() : DomainError("wave vector must be nonzero (1/k^2 singularity)") {}
};

// Laurent-series machinery.
class PoleWithoutRegularizer : public Error {
 public:
  using Error::Error;
};

class WindowOverflow : public Error {
 public:
  using Error::Error;
};

class PoleResidueError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class NotPolynomial : public Error {
 public:
  using Error::Error;
};

class NotDiagonal : public Error {
 public:
  using Error::Error;
};

// Quadrature oracles.
class SingularConfiguration : public Error {
 public:
  SingularConfiguration(const std::string& what, double achieved)
      : Error(what), achieved_error(achieved) {}
  double achieved_error;
};

class TailTooLarge : public Error {
 public:
  TailTooLarge(const std::string& what, double estimate)
      : Error(what), tail_estimate(estimate) {}
  double tail_estimate;
};

}  // namespace mpgreen
