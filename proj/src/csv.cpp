#include "toolwear/csv.hpp"

#include <charconv>
#include <cmath>

#include "toolwear/error.hpp"

namespace toolwear::csv {

namespace {

void split(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void append(std::string& out, double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw InternalError("cannot format double");
  out.append(buf, end);
}

void append(std::string& out, std::int64_t value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw InternalError("cannot format integer");
  out.append(buf, end);
}

std::string format(double value) {
  std::string s;
  append(s, value);
  return s;
}

Reader::Reader(const std::filesystem::path& path, const std::vector<std::string>& expected_header)
    : path_(path.string()) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ParseError(ParseError::Reason::MissingFile, path_, 0, "no such file");
  }
  in_.open(path);
  if (!in_) throw ParseError(ParseError::Reason::MissingFile, path_, 0, "cannot open");
  if (!std::getline(in_, buffer_)) {
    throw ParseError(ParseError::Reason::BadHeader, path_, 1, "file is empty");
  }
  line_ = 1;
  std::vector<std::string_view> cells;
  split(trim(buffer_), cells);
  for (auto c : cells) header_.emplace_back(trim(c));
  if (!expected_header.empty() && header_ != expected_header) {
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (i) want += ',';
      want += expected_header[i];
    }
    throw ParseError(ParseError::Reason::BadHeader, path_, 1, "expected '" + want + "'");
  }
}

bool Reader::next() {
  while (std::getline(in_, buffer_)) {
    ++line_;
    std::string_view view = trim(buffer_);
    if (view.empty()) continue;
    split(view, fields_);
    if (fields_.size() != header_.size()) {
      throw ParseError(ParseError::Reason::RaggedRow, path_, line_,
                       "expected " + std::to_string(header_.size()) + " fields, found " +
                           std::to_string(fields_.size()));
    }
    for (auto& f : fields_) f = trim(f);
    return true;
  }
  return false;
}

double Reader::number(std::size_t column) const {
  const std::string_view f = fields_.at(column);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty() || !std::isfinite(value)) {
    throw ParseError(ParseError::Reason::MalformedField, path_, line_,
                     "column '" + header_[column] + "': '" + std::string(f) + "' is not a number");
  }
  return value;
}

std::int64_t Reader::integer(std::size_t column) const {
  const std::string_view f = fields_.at(column);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
    throw ParseError(ParseError::Reason::MalformedField, path_, line_,
                     "column '" + header_[column] + "': '" + std::string(f) + "' is not an integer");
  }
  return value;
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path.string()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open '" + path_ + "' for writing");
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line += ',';
    line += header[i];
  }
  raw(line);
}

Writer::~Writer() {
  try {
    close();
  } catch (...) {
  }
}

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) pending_ += ',';
    pending_ += cells[i];
  }
  pending_ += '\n';
  if (pending_.size() > (1u << 20)) {
    out_.write(pending_.data(), static_cast<std::streamsize>(pending_.size()));
    pending_.clear();
  }
}

void Writer::raw(std::string_view line) {
  pending_.append(line);
  pending_ += '\n';
  if (pending_.size() > (1u << 20)) {
    out_.write(pending_.data(), static_cast<std::streamsize>(pending_.size()));
    pending_.clear();
  }
}

void Writer::close() {
  if (!out_.is_open()) return;
  out_.write(pending_.data(), static_cast<std::streamsize>(pending_.size()));
  pending_.clear();
  out_.close();
  if (out_.fail()) throw IoError("failed writing '" + path_ + "'");
}

}  // namespace toolwear::csv
