#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace minsurf {

/// Base of every error raised by the library. `kind()` is a stable tag used
/// in reports and by the CLI.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define MINSURF_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                               \
  public:                                                                   \
    explicit Name(const std::string& what) : Error(#Name, what) {}          \
  }

// expression parsing / evaluation

class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("SyntaxError", "syntax error at position " + std::to_string(position) + ": " + message),
        position_(position), message_(message) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }

private:
  std::size_t position_;
  std::string message_;
};

class UnknownVariable : public Error {
public:
  explicit UnknownVariable(std::string name)
      : Error("UnknownVariable", "unknown variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

class UnknownFunction : public Error {
public:
  explicit UnknownFunction(std::string name)
      : Error("UnknownFunction", "unknown function '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Raised when evaluation leaves the natural domain of a sub-expression.
/// `subtree()` is the printed form of the offending node.
class DomainError : public Error {
public:
  DomainError(std::string subtree, const std::string& reason)
      : Error("DomainError", reason + " in '" + subtree + "'"), subtree_(std::move(subtree)) {}
  const std::string& subtree() const noexcept { return subtree_; }

private:
  std::string subtree_;
};

// geometry
MINSURF_DEFINE_ERROR(InvalidCurve);
MINSURF_DEFINE_ERROR(DegenerateVelocity);
MINSURF_DEFINE_ERROR(NotConverged);
MINSURF_DEFINE_ERROR(NoNegativePart);
MINSURF_DEFINE_ERROR(FitFailure);
MINSURF_DEFINE_ERROR(CenterSingularity);
MINSURF_DEFINE_ERROR(EmptyRegion);

// criterion
MINSURF_DEFINE_ERROR(DegenerateData);
MINSURF_DEFINE_ERROR(DeltaOutOfRange);
MINSURF_DEFINE_ERROR(RequiresInfiniteR);
MINSURF_DEFINE_ERROR(InternalError);

// barrier
MINSURF_DEFINE_ERROR(OutOfRange);

// solver
MINSURF_DEFINE_ERROR(NotStarShaped);
MINSURF_DEFINE_ERROR(LineSearchStall);

// configuration / io
MINSURF_DEFINE_ERROR(IoError);

class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& reason)
      : Error("ValidationError", field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class ParseError : public Error {
public:
  ParseError(std::string path, std::size_t position, const std::string& message)
      : Error("ParseError", path + ":" + std::to_string(position) + ": " + message),
        path_(std::move(path)), position_(position) {}
  const std::string& path() const noexcept { return path_; }
  std::size_t position() const noexcept { return position_; }

private:
  std::string path_;
  std::size_t position_;
};

#undef MINSURF_DEFINE_ERROR

}  // namespace minsurf
