#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpc {

// Base of every error raised by the library. Expected negative outcomes
// (no match, empty composition, unprovable goal) are values, not errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : Error("syntax error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class FreeRhsVariable : public Error {
 public:
  FreeRhsVariable(const std::string& variable, const std::string& axiom)
      : Error("variable '" + variable + "' of axiom '" + axiom +
              "' does not occur on the left-hand side"),
        variable_(variable),
        axiom_(axiom) {}
  const std::string& variable() const { return variable_; }
  const std::string& axiom() const { return axiom_; }

 private:
  std::string variable_;
  std::string axiom_;
};

class NonGroundStart : public Error {
 public:
  using Error::Error;
};

class UnknownAxiom : public Error {
 public:
  explicit UnknownAxiom(const std::string& name)
      : Error("unknown axiom '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnsupportedRule : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class Unimplemented : public Error {
 public:
  using Error::Error;
};

// Raised by the symbolic solvers when a scheme falls outside what they handle.
class Unsupported : public Error {
 public:
  using Error::Error;
};

class NotLinearizable : public Error {
 public:
  using Error::Error;
};

// The composed relation is empty for every index.
class NoCompose : public Error {
 public:
  using Error::Error;
};

class Underdetermined : public Error {
 public:
  using Error::Error;
};

class Ambiguous : public Error {
 public:
  using Error::Error;
};

class InternalMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace tpc
