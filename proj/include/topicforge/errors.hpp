#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topicforge {

// Broad failure classes; the CLI maps each one onto a process exit code.
enum class ErrorKind { validation, pipeline, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class PipelineError : public Error {
 public:
  explicit PipelineError(const std::string& what) : Error(ErrorKind::pipeline, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// Malformed input line; line numbers are 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace topicforge
