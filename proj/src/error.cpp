#include "toolwear/error.hpp"

namespace toolwear {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Segmentation: return "segmentation";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Index: return "index";
    case ErrorKind::Region: return "region";
    case ErrorKind::Dataset: return "dataset";
    case ErrorKind::Scaling: return "scaling";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Domain:
    case ErrorKind::Scaling:
    case ErrorKind::Numeric:
      return 3;
    default:
      return 2;
  }
}

namespace {

const char* reason_text(ParseError::Reason r) {
  switch (r) {
    case ParseError::Reason::MissingFile: return "missing file";
    case ParseError::Reason::BadHeader: return "bad header";
    case ParseError::Reason::MalformedField: return "malformed field";
    case ParseError::Reason::RaggedRow: return "ragged row";
    case ParseError::Reason::BadSequence: return "bad sequence";
  }
  return "parse error";
}

std::string format_parse(ParseError::Reason r, const std::string& path, std::size_t line,
                         const std::string& detail) {
  std::string msg = path;
  if (line > 0) msg += ":" + std::to_string(line);
  msg += ": ";
  msg += reason_text(r);
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

ParseError::ParseError(Reason reason, std::string path, std::size_t line, const std::string& detail)
    : Error(ErrorKind::Parse, format_parse(reason, path, line, detail)),
      reason_(reason),
      path_(std::move(path)),
      line_(line) {}

ParseError::ParseError(const ParseError& other, const std::string& message)
    : Error(ErrorKind::Parse, message), reason_(other.reason_), path_(other.path_), line_(other.line_) {}

void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string msg = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::Config: throw ConfigError(msg);
    case ErrorKind::Dimension: throw DimensionError(msg);
    case ErrorKind::Parse:
      if (const auto* p = dynamic_cast<const ParseError*>(&e)) throw ParseError(*p, msg);
      break;
    case ErrorKind::Validation: throw ValidationError(msg);
    case ErrorKind::Segmentation: throw SegmentationError(msg);
    case ErrorKind::Domain: throw DomainError(msg);
    case ErrorKind::Index: throw IndexError(msg);
    case ErrorKind::Region: throw RegionError(msg);
    case ErrorKind::Dataset: throw DatasetError(msg);
    case ErrorKind::Scaling: throw ScalingError(msg);
    case ErrorKind::Numeric: throw NumericError(msg);
    case ErrorKind::Io: throw IoError(msg);
    case ErrorKind::Internal: throw InternalError(msg);
  }
  throw Error(e.kind(), msg);
}

}  // namespace toolwear
