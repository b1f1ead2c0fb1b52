#pragma once

#include <stdexcept>
#include <string>

namespace mtgbn {

// Base class for all library errors so callers can catch mtgbn failures wholesale.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix expected to be symmetric positive definite failed its Cholesky factorization.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

// Matrix failed the symmetry tolerance check.
struct NotSymmetric : Error {
  using Error::Error;
};

// Undirected graph is not chordal, so no clique/separator decomposition exists.
struct NotDecomposable : Error {
  using Error::Error;
};

// A computation left the representable range (e.g. exp of a huge log-diagonal).
struct Overflow : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of the function (e.g. degrees of freedom too small).
struct DomainError : Error {
  using Error::Error;
};

// Inputs whose dimensions must agree do not.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Non-finite intermediate inside a leapfrog integration step; callers treat it as a rejection.
struct NonFinite : Error {
  using Error::Error;
};

// HMC acceptance collapsed (windowed acceptance below threshold); carries the EM iteration when known.
struct ChainDiverged : Error {
  explicit ChainDiverged(const std::string& msg, int em_iteration = -1)
      : Error(msg), em_iteration(em_iteration) {}
  int em_iteration;  // -1 when the chain was not running inside an EM loop
};

// A rejection-style sampler hit its retry cap without producing a valid draw.
struct RetriesExhausted : Error {
  using Error::Error;
};

// File or stream I/O failure (missing file, malformed content, failed write).
struct IoError : Error {
  using Error::Error;
};

// Invalid configuration (bad flag values, inconsistent config file).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace mtgbn
