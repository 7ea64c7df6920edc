#ifndef WORLDPROG_ERRORS_HPP_
#define WORLDPROG_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A graph, state or rule violates its structural invariants.
class GraphError : public Error {
 public:
  using Error::Error;
};

/// A vertex cap or search bound was exceeded.
class SizeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The rule cannot be represented (e.g. it would need a disconnected pattern).
class UnsupportedRuleError : public Error {
 public:
  using Error::Error;
};

class InductionError : public Error {
 public:
  enum class Kind { kNoOpObservation, kDisconnectedCore, kNotRederivable, kEmptyLibrary };

  InductionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// The exhaustive oracle hit its node cap before reaching a verdict.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the file name and 1-based line number.
class FormatError : public Error {
 public:
  FormatError(std::string file, std::size_t line, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ": " + msg),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace wp

#endif  // WORLDPROG_ERRORS_HPP_
