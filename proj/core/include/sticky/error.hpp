#ifndef STICKY_ERROR_HPP_
#define STICKY_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sticky {

// Precondition violations on user-supplied data. The CLI maps these to exit code 2.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Two measures (or a measure and a mass list) whose total masses disagree.
class MassMismatchError : public DomainError {
 public:
  explicit MassMismatchError(const std::string& what) : DomainError(what) {}
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sticky

#endif  // STICKY_ERROR_HPP_
