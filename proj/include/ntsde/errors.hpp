#ifndef NTSDE_ERRORS_HPP
#define NTSDE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ntsde {

/// Caller supplied arguments outside an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// A condition the library guarantees cannot happen did happen (NaN state,
/// negative rate after clamping).
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

/// A file could not be read or written; the message names the path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ntsde

#endif  // NTSDE_ERRORS_HPP
