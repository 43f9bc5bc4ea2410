#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toolwear {

enum class ErrorKind {
  Config,
  Dimension,
  Parse,
  Validation,
  Segmentation,
  Domain,
  Index,
  Region,
  Dataset,
  Scaling,
  Numeric,
  Io,
  Internal,
};

const char* to_string(ErrorKind kind);

// Process exit status for the CLI: 1 usage/config, 2 data, 3 numeric.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define TOOLWEAR_DEFINE_ERROR(Name, Kind) \
  class Name : public Error {             \
   public:                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

TOOLWEAR_DEFINE_ERROR(ConfigError, Config)
TOOLWEAR_DEFINE_ERROR(DimensionError, Dimension)
TOOLWEAR_DEFINE_ERROR(ValidationError, Validation)
TOOLWEAR_DEFINE_ERROR(SegmentationError, Segmentation)
TOOLWEAR_DEFINE_ERROR(DomainError, Domain)
TOOLWEAR_DEFINE_ERROR(IndexError, Index)
TOOLWEAR_DEFINE_ERROR(RegionError, Region)
TOOLWEAR_DEFINE_ERROR(DatasetError, Dataset)
TOOLWEAR_DEFINE_ERROR(ScalingError, Scaling)
TOOLWEAR_DEFINE_ERROR(NumericError, Numeric)
TOOLWEAR_DEFINE_ERROR(IoError, Io)
TOOLWEAR_DEFINE_ERROR(InternalError, Internal)

#undef TOOLWEAR_DEFINE_ERROR

/// CSV/JSON input problems. `line` is 1-based; 0 when the problem is not tied to a line.
class ParseError : public Error {
 public:
  enum class Reason { MissingFile, BadHeader, MalformedField, RaggedRow, BadSequence };

  ParseError(Reason reason, std::string path, std::size_t line, const std::string& detail);
  /// Keeps the fields of `other` but replaces the message verbatim.
  ParseError(const ParseError& other, const std::string& message);

  Reason reason() const noexcept { return reason_; }
  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Reason reason_;
  std::string path_;
  std::size_t line_;
};

/// Rethrows `e` as its concrete error type with `context + ": "` prepended to the message.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace toolwear
