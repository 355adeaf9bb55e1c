#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace erpf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input (files, parameters, matrix properties).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A dense oracle was asked to expand more entries than its budget allows.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Factorization breakdown. Carries the failing pivot (original numbering)
/// and, once propagated through preconditioner setup, the block it belongs to.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& msg, std::int64_t pivot, std::string block = {})
      : Error(block.empty() ? msg : block + ": " + msg), pivot_(pivot), block_(std::move(block)) {}

  std::int64_t pivot() const noexcept { return pivot_; }
  const std::string& block() const noexcept { return block_; }

  FactorizationError with_block(const std::string& block) const {
    return FactorizationError(base_message(), pivot_, block);
  }

 private:
  std::string base_message() const {
    std::string w = what();
    if (!block_.empty() && w.rfind(block_ + ": ", 0) == 0) return w.substr(block_.size() + 2);
    return w;
  }

  std::int64_t pivot_;
  std::string block_;
};

}  // namespace erpf
