#include "tbspam/csv.hpp"

namespace tbspam::csv {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::optional<Record> Reader::next() {
  using Traits = std::char_traits<char>;
  for (;;) {
    if (in_.peek() == Traits::eof()) return std::nullopt;

    Record rec{line_, {}};
    std::string field;
    bool quoted = false;      // inside quotes
    bool was_quoted = false;  // current field started with a quote
    bool any = false;         // record has content
    for (;;) {
      const int c = in_.get();
      if (c == Traits::eof()) {
        if (quoted) throw ParseError(rec.line, "unterminated quoted field");
        break;
      }
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '\r' && in_.peek() == '\n') continue;
      if (ch == '\n') {
        ++line_;
        break;
      }
      any = true;
      if (ch == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (ch == '"') {
        if (!field.empty() || was_quoted) {
          throw ParseError(line_, "quote inside unquoted field");
        }
        quoted = was_quoted = true;
      } else {
        if (was_quoted) throw ParseError(line_, "text after closing quote");
        field.push_back(ch);
      }
    }
    if (!any) continue;
    rec.fields.push_back(std::move(field));
    return rec;
  }
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char ch : f) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace tbspam::csv
