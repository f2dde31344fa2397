#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pvstab {

/// A caller-supplied value violates an operation's preconditions
/// (negative delay, nonpositive inductance, unknown group label, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is mathematically undefined for the given value
/// (division by a zero rational, roots of a constant, evaluation at a pole).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An internal consistency check failed (degree/dimension mismatch,
/// catastrophic cancellation): the model left its validated regime and the
/// result cannot be trusted.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while emitting report artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration rejected; carries the full list of problems found, not just
/// the first one.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "configuration invalid:";
    for (const auto& p : problems) {
      out += "\n  - ";
      out += p;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace pvstab
