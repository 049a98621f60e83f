#pragma once

#include <stdexcept>
#include <string>

namespace tkbc {

// Exit codes used by the command-line front end.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::data)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed input text (dataset lines, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Values outside what the data model can represent, or unbounded where bounded is required.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Persisted bundle does not match what the loader expects.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what, ExitCode::usage) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, ExitCode::numerical) {}
};

}  // namespace tkbc
