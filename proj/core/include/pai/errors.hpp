#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pai {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of a function (e.g. erfinv(1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative or linear-algebra routine failed to produce a result.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Requested configuration is valid but not implemented (e.g. depth > 2).
class FeatureError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration exceeds its size budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A construction precondition that the caller promised does not hold.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Dense core search found fewer fully connected columns than requested.
class InsufficientCoreError : public Error {
 public:
  InsufficientCoreError(std::size_t n_good, std::size_t wanted)
      : Error("dense core has " + std::to_string(n_good) + " good columns, need " +
              std::to_string(wanted)),
        n_good_(n_good) {}
  std::size_t n_good() const noexcept { return n_good_; }

 private:
  std::size_t n_good_;
};

}  // namespace pai
