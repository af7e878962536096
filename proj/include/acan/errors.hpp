#pragma once

#include <stdexcept>
#include <string>

namespace acan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model, training or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shape or value-range violation on an operation input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Attribute label outside the schema.
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Attribute target document or value inconsistent with the schema.
class TargetError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Scene specification that cannot be rendered or labeled.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Missing, empty or undecodable data on disk.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed label file. Carries the offending row and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t row, const std::string& column,
             const std::string& what)
      : Error(file + ":" + std::to_string(row) + ": column '" + column + "': " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Bad command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace acan
