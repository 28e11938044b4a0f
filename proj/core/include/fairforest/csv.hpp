#pragma once

#include <string>
#include <vector>

namespace fairforest::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC-4180 reader: quoted fields, escaped quotes, embedded separators and
// newlines. The first record is the header. Throws DataError on malformed
// input (unterminated quote, ragged row) with 1-based row/column coordinates.
Table read_file(const std::string& path);
Table read_string(const std::string& text, const std::string& origin = "<string>");

// Quotes a field if needed and never otherwise, so output is byte-stable.
std::string escape_field(const std::string& field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace fairforest::csv
