#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apit {

/// Argument outside the domain of an operation (bad length, out-of-range value).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data that carries no information for the requested statistic,
/// e.g. a constant margin.
class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative numerical procedure failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid power-study configuration. `path()` names the offending field,
/// e.g. "scenarios[1].rho".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed delimited-text or serialized input. `line()` is 1-based, 0 when
/// not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace apit
