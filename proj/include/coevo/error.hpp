#pragma once

#include <stdexcept>
#include <string>

namespace coevo {

// Precondition or domain violation by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value or failed to converge.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, double time = 0.0)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Malformed configuration text. Carries the offending key and its line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& key, int line, const std::string& what)
      : std::runtime_error(what), key_(key), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace coevo
