#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace xnet {

/// Base of every error raised by the engine and its front ends.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A place or transition id that does not exist in the net.
class UnknownElementError : public Error {
 public:
  using Error::Error;
};

/// Structural problem in a net under construction (dangling arc, duplicate id, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Firing a transition that is not enabled.
class NotEnabledError : public Error {
 public:
  using Error::Error;
};

/// merge_nets could not combine its inputs.
class CompositionError : public Error {
 public:
  using Error::Error;
};

/// Malformed PNML. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    return message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  }

  std::size_t line_;
  std::size_t column_;
};

/// A runner was loaded without a binding for some external transition hook.
class ConfigurationError : public Error {
 public:
  ConfigurationError(const std::string& message, std::vector<std::string> missing)
      : Error(message), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

/// Runner lifecycle misuse (start twice, stop while stopped, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

/// An external system touched a place through the wrong interface.
class InterfaceError : public Error {
 public:
  using Error::Error;
};

/// Command text did not match any production. `hint` is the closest production.
class CommandParseError : public Error {
 public:
  CommandParseError(const std::string& message, std::string hint)
      : Error(message + "; did you mean \"" + hint + "\"?"), hint_(std::move(hint)) {}

  const std::string& hint() const noexcept { return hint_; }

 private:
  std::string hint_;
};

/// Command used a word outside the configured vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

}  // namespace xnet
