#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hsdenoise {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// SVD (or other decomposition) did not converge. Carries the block index and,
// when raised from inside the solver loop, the iteration.
class NumericalFailure : public Error {
public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  NumericalFailure(const std::string &what, std::size_t block, std::size_t iteration = npos)
      : Error(what), block_(block), iteration_(iteration) {}

  std::size_t block() const noexcept { return block_; }
  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t block_;
  std::size_t iteration_;
};

enum class IoErrorKind { Open, MagicMismatch, UnsupportedDtype, Truncated, TrailingData, NonFinite, Write };

class IoError : public Error {
public:
  IoError(IoErrorKind kind, const std::string &what) : Error(what), kind_(kind) {}
  IoErrorKind kind() const noexcept { return kind_; }

private:
  IoErrorKind kind_;
};

} // namespace hsdenoise
