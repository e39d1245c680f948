#pragma once

#include <stdexcept>
#include <string>

namespace vfpk {

// Base for every library error; catch this at the CLI boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration; `path` is the dotted key that was rejected.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Input outside the domain of an operation (box too small, wrong dimension...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Overflow, non-finite values, failed factorizations.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class CflError : public Error {
 public:
  CflError(double dt, double dt_max)
      : Error("time step " + std::to_string(dt) + " exceeds CFL limit " + std::to_string(dt_max)),
        dt_(dt), dt_max_(dt_max) {}
  double dt() const noexcept { return dt_; }
  double dt_max() const noexcept { return dt_max_; }

 private:
  double dt_;
  double dt_max_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vfpk
