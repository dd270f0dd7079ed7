#pragma once

#include <stdexcept>
#include <string>

namespace horserace {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value lies outside the mathematical domain of an operation (e.g. log of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series is too short for the requested operation.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A statistic needs nonzero variance and the input is constant.
class VarianceError : public Error {
 public:
  using Error::Error;
};

class CollinearityError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// CSV ingestion failure. `row` is 1-based and counts the header line.
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t row = 0) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Optimizer did not converge. Carries the best objective seen so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_loglik, int iterations)
      : Error(what), best_loglik_(best_loglik), iterations_(iterations) {}
  double best_loglik() const noexcept { return best_loglik_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_loglik_;
  int iterations_;
};

}  // namespace horserace
