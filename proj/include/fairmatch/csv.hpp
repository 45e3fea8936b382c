#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fairmatch/error.hpp"

namespace fairmatch {

// RFC 4180 reader: quoted fields, embedded delimiters/quotes/newlines, CRLF.
// Lines starting with '#' before the header row are provenance comments and
// are skipped; after the header '#' has no special meaning.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in, char delimiter = ',')
      : in_(in), delim_(delimiter) {}

  // Reads one logical row into `out`. Returns false at end of input.
  bool next(std::vector<std::string>& out) {
    out.clear();
    int c = in_.get();
    while (at_start_ && c == '#') {  // provenance header lines
      while (c != EOF && c != '\n') c = in_.get();
      if (c != EOF) c = in_.get();
    }
    if (c == EOF) return false;
    at_start_ = false;
    std::string field;
    bool quoted = false;
    while (true) {
      if (quoted) {
        if (c == EOF) fail("csv: unterminated quoted field");
        if (c == '"') {
          int peek = in_.get();
          if (peek == '"') {
            field.push_back('"');
          } else {
            quoted = false;
            c = peek;
            continue;
          }
        } else {
          field.push_back(static_cast<char>(c));
        }
      } else {
        if (c == EOF || c == '\n') {
          if (!field.empty() && field.back() == '\r') field.pop_back();
          out.push_back(std::move(field));
          return true;
        }
        if (c == static_cast<int>(delim_)) {
          out.push_back(std::move(field));
          field.clear();
        } else if (c == '"' && field.empty()) {
          quoted = true;
        } else {
          field.push_back(static_cast<char>(c));
        }
      }
      c = in_.get();
    }
  }

 private:
  std::istream& in_;
  char delim_;
  bool at_start_ = true;
};

inline void write_csv_field(std::ostream& os, const std::string& field, char delim = ',') {
  bool needs_quotes = field.find_first_of("\"\r\n") != std::string::npos ||
                      field.find(delim) != std::string::npos ||
                      (!field.empty() && field.front() == '#');
  if (!needs_quotes) {
    os << field;
    return;
  }
  os << '"';
  for (char c : field) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields, char delim = ',') {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os << delim;
    write_csv_field(os, fields[i], delim);
  }
  os << '\n';
}

}  // namespace fairmatch
