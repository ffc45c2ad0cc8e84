#pragma once

#include <stdexcept>
#include <string>

namespace fmqm {

// Base for every error the library raises. The kind decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind { Usage, Io, Parse, Numeric, Invalid };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Kind::Io, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(Kind::Parse, file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(Kind::Invalid, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Kind::Numeric, what) {}
};

}  // namespace fmqm
