#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nfde {

/// Root of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// A query outside the domain of a history, e.g. s > 0.
class DomainError : public Error {
  public:
    using Error::Error;
};

class HorizonTooShort : public Error {
  public:
    using Error::Error;
};

/// Violated structural precondition (lag relations, sign constraints, invalid spec).
class StructuralError : public Error {
  public:
    using Error::Error;
};

class SingularB : public StructuralError {
  public:
    SingularB(const std::string& msg, std::vector<double> witness)
        : StructuralError(msg), witness_(std::move(witness)) {}
    const std::vector<double>& witness() const { return witness_; }

  private:
    std::vector<double> witness_;
};

class UnstableMargin : public StructuralError {
  public:
    UnstableMargin(const std::string& msg, double lambda)
        : StructuralError(msg), lambda_(lambda) {}
    double lambda() const { return lambda_; }

  private:
    double lambda_;
};

class NotHurwitz : public StructuralError {
  public:
    using StructuralError::StructuralError;
};

class UnorderedInitialData : public StructuralError {
  public:
    using StructuralError::StructuralError;
};

class DivergenceError : public Error {
  public:
    DivergenceError(const std::string& msg, double t) : Error(msg), t_(t) {}
    double time() const { return t_; }

  private:
    double t_;
};

class NoReturnTimes : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace nfde
