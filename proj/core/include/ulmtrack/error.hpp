#pragma once

#include <stdexcept>
#include <string>

namespace ulmtrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or command-line arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, link sets, tracks).
class DataError : public Error {
 public:
  using Error::Error;
};

// Innovation covariance is singular or too badly conditioned to evaluate.
class DegenerateCovariance : public Error {
 public:
  using Error::Error;
};

}  // namespace ulmtrack
