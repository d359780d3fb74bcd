#pragma once

#include <stdexcept>
#include <string>

namespace steadyscan {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand domain violation (e.g. real power of a negative base).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Boxes over different unknown sets, or similar shape mismatches.
class StructuralError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

class UndeclaredNameError : public ParseError {
public:
  UndeclaredNameError(const std::string& name, int line, int column)
      : ParseError("undeclared name '" + name + "'", line, column), name_(name) {}

  const std::string& name() const { return name_; }

private:
  std::string name_;
};

class DuplicateIdError : public ParseError {
public:
  DuplicateIdError(const std::string& id, int line, int column)
      : ParseError("duplicate identifier '" + id + "'", line, column), id_(id) {}

  const std::string& id() const { return id_; }

private:
  std::string id_;
};

/// Point evaluation hit an unassigned reference.
class MissingValueError : public Error {
public:
  explicit MissingValueError(const std::string& name)
      : Error("missing value for '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

private:
  std::string name_;
};

/// Non-finite numeric result attributed to a named quantity.
class NumericError : public Error {
public:
  NumericError(const std::string& what, const std::string& name)
      : Error(what + (name.empty() ? std::string() : " [" + name + "]")), name_(name) {}

  const std::string& name() const { return name_; }

private:
  std::string name_;
};

class StiffnessError : public Error {
public:
  using Error::Error;
};

class HorizonError : public Error {
public:
  using Error::Error;
};

}  // namespace steadyscan
