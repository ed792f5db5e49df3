// Minimal RFC 4180 reader/writer: comma separated, double-quote quoting with
// "" escapes, LF or CRLF record ends.
#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tbspam::csv {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Record {
  std::size_t line;  // 1-based physical line the record starts on
  std::vector<std::string> fields;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

/// Writes one record, quoting fields that contain ',', '"', CR or LF.
void write_record(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace tbspam::csv
