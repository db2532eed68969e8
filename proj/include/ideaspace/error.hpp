#pragma once

#include <stdexcept>
#include <string>

namespace ideaspace {

// Base for every error raised by the library. `kind()` is a stable short
// name used by the CLI and the HTTP layer when reporting failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

#define IDEASPACE_DEFINE_ERROR(Name, Tag)                       \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(what) {}     \
    const char* kind() const noexcept override { return Tag; }  \
  }

IDEASPACE_DEFINE_ERROR(DomainError, "domain");
IDEASPACE_DEFINE_ERROR(ValidationError, "validation");
IDEASPACE_DEFINE_ERROR(TemplateError, "template");
IDEASPACE_DEFINE_ERROR(PreconditionError, "precondition");
IDEASPACE_DEFINE_ERROR(ParameterError, "parameter");
IDEASPACE_DEFINE_ERROR(UndefinedScoreError, "undefined-score");
IDEASPACE_DEFINE_ERROR(ProtocolError, "protocol");
IDEASPACE_DEFINE_ERROR(IoError, "io");

#undef IDEASPACE_DEFINE_ERROR

// Malformed input syntax. `line` and `column` are 1-based; `record` is the
// 0-based record index for CSV input (or -1 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column, int record = -1)
      : Error(what), line_(line), column_(column), record_(record) {}
  const char* kind() const noexcept override { return "parse"; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  int record() const noexcept { return record_; }

 private:
  int line_;
  int column_;
  int record_;
};

// Remote call failed after all retries. `status` is the last HTTP status
// seen, or 0 when no response was received at all.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status)
      : Error(what), status_(status) {}
  const char* kind() const noexcept override { return "transport"; }
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace ideaspace
