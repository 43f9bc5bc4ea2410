#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace toolwear::csv {

/// Shortest decimal text that parses back to the identical double.
std::string format(double value);
void append(std::string& out, double value);
void append(std::string& out, std::int64_t value);

/// Line-oriented reader for the simple comma-separated files this project writes
/// (no quoting, no embedded commas). Errors carry the 1-based line number.
class Reader {
 public:
  /// Opens `path` and checks the header row. An empty `expected_header` accepts any header.
  Reader(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

  const std::vector<std::string>& header() const { return header_; }
  const std::string& path() const { return path_; }

  /// Advances to the next non-empty row. Rows with a field count different from the
  /// header raise ParseError(RaggedRow).
  bool next();
  std::size_t line() const { return line_; }

  std::string_view field(std::size_t column) const { return fields_[column]; }
  double number(std::size_t column) const;
  std::int64_t integer(std::size_t column) const;

 private:
  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::string buffer_;
  std::vector<std::string_view> fields_;
  std::size_t line_ = 0;
};

/// Buffered writer; `close()` flushes and reports IoError on failure.
class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  /// Appends one row. Cells are pre-rendered text.
  void row(const std::vector<std::string>& cells);
  /// Appends a raw, already comma-joined line (no trailing newline).
  void raw(std::string_view line);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::string pending_;
};

}  // namespace toolwear::csv
