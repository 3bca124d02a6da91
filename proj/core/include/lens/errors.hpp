#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lens {

// Root of every exception the library throws. Callers that only care about
// "something in lens failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range user input: genomes, architecture JSON, config files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Layer shapes that do not chain (e.g. a conv layer after a flattened FC output).
class ShapeError : public ValidationError {
 public:
  ShapeError(std::size_t layer_index, const std::string& what)
      : ValidationError("layer " + std::to_string(layer_index) + ": " + what),
        layer_index_(layer_index) {}

  std::size_t layer_index() const noexcept { return layer_index_; }

 private:
  std::size_t layer_index_;
};

// Device or wireless profile that cannot produce a valid cost.
class ProfileError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Kernel matrix could not be factored even after the maximum jitter.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

// An accuracy evaluation did not produce a usable error value.
class EvaluationFailed : public Error {
 public:
  EvaluationFailed(const std::string& what, std::string raw_output = {})
      : Error(what), raw_output_(std::move(raw_output)) {}

  const std::string& raw_output() const noexcept { return raw_output_; }

 private:
  std::string raw_output_;
};

// The trainer answered, but not with a schema-valid, in-range response.
class ProtocolError : public EvaluationFailed {
 public:
  using EvaluationFailed::EvaluationFailed;
};

// Malformed throughput trace; line numbers are 1-based and count the header.
class TraceError : public ValidationError {
 public:
  TraceError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lens
