#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ldpr {

// Root of every exception thrown by the library. Callers that only need to
// distinguish "bad input data" from "programming error" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a numerical routine (sigma <= 0, shape mismatch, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class DegenerateClimatologyError : public Error {
 public:
  using Error::Error;
};

class InsufficientTrainingError : public Error {
 public:
  InsufficientTrainingError(std::size_t available, std::size_t required);
  std::size_t available() const { return available_; }
  std::size_t required() const { return required_; }

 private:
  std::size_t available_;
  std::size_t required_;
};

class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class DegeneratePredictiveError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ExperimentError : public Error {
 public:
  using Error::Error;
};

}  // namespace ldpr
