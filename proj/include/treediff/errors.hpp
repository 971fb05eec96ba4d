#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace treediff {

// Two failure classes, matching the CLI exit codes: configuration and
// usage problems exit with 2, numeric-domain problems (overflow, divergence
// signals, bad weight values) exit with 3.
enum class ErrorClass { Config, Numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& msg)
      : std::runtime_error(msg), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

private:
  ErrorClass cls_;
};

// Invalid vertex address for the shape at hand (child index out of range).
class AddressError : public Error {
public:
  explicit AddressError(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

// Malformed textual input (expression DSL, shape strings, vertex strings).
// Carries the byte offset of the offending token.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(ErrorClass::Config,
              msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

// Inconsistent or unusable configuration (bad depth, space/shape mismatch,
// unknown identifiers, unbound parameters).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(ErrorClass::Config, msg) {}
};

// Count or index does not fit the 64-bit budget (level sizes, matrix dims).
class RangeError : public Error {
public:
  explicit RangeError(const std::string& msg) : Error(ErrorClass::Numeric, msg) {}
};

// Weight evaluated to a non-positive number somewhere it was needed.
class WeightDomainError : public Error {
public:
  explicit WeightDomainError(const std::string& msg) : Error(ErrorClass::Numeric, msg) {}
};

// A rule or expression produced a non-finite value, or division by zero.
class EvalError : public Error {
public:
  explicit EvalError(const std::string& msg) : Error(ErrorClass::Numeric, msg) {}
};

// Truncated ratio sup crossed the divergence cap: the operator is reported
// as unbounded instead of producing a number.
class UnboundedOperatorError : public Error {
public:
  UnboundedOperatorError(const std::string& msg, int depth, double value)
      : Error(ErrorClass::Numeric, msg), depth_(depth), value_(value) {}
  int depth() const noexcept { return depth_; }
  double value() const noexcept { return value_; }

private:
  int depth_;
  double value_;
};

}  // namespace treediff
