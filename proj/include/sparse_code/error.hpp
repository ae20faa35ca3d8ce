#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparse_code {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTriplet : public Error {
 public:
  using Error::Error;
};

class InvalidPartition : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedSupport : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InsufficientWorkers : public Error {
 public:
  using Error::Error;
};

/// The collected coefficient rows do not span what the caller asked for.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Raised by the optimizer; `family()` names the violated constraint family.
class Infeasible : public Error {
 public:
  Infeasible(std::string family, const std::string& what)
      : Error(what), family_(std::move(family)) {}
  const std::string& family() const noexcept { return family_; }

 private:
  std::string family_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sparse_code
