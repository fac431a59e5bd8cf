#pragma once

#include <stdexcept>
#include <string>

namespace sparseq {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Thrown when an operation requires at least one nonzero matrix entry.
class ZeroMatrix : public Error {
 public:
  using Error::Error;
};

// Cholesky factorization hit a nonpositive pivot; the caller is expected to
// increase its regularization shift and retry.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// A subspace evaluation was requested at a point with a (numerically) zero
// coordinate, where the restricted objective is not smooth.
class ZeroOnSupport : public Error {
 public:
  using Error::Error;
};

class ZeroGradient : public Error {
 public:
  using Error::Error;
};

class BacktrackExhausted : public Error {
 public:
  using Error::Error;
};

class ArmijoExhausted : public Error {
 public:
  using Error::Error;
};

class SolveFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateScale : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(long line, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace sparseq
