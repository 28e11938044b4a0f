#include "fairforest/csv.hpp"

#include <fstream>
#include <sstream>

#include "fairforest/error.hpp"

namespace fairforest::csv {

namespace {

Table parse(const std::string& text, const std::string& origin) {
  Table table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t row = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty()) {
      table.header = std::move(record);
    } else {
      if (record.size() != table.header.size()) {
        throw DataError(origin + ": row " + std::to_string(row) + " has " +
                        std::to_string(record.size()) + " fields, expected " +
                        std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(record));
    }
    record.clear();
    ++row;
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  bool any = false;
  while (i < n) {
    char c = text[i];
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallow; CRLF handled at the '\n'
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
    }
    ++i;
  }
  if (in_quotes) {
    throw DataError(origin + ": unterminated quoted field at row " + std::to_string(row));
  }
  if (any && (!field.empty() || field_was_quoted || !record.empty())) {
    end_record();  // final record without trailing newline
  }
  if (table.header.empty()) {
    throw DataError(origin + ": empty file (no header row)");
  }
  return table;
}

}  // namespace

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

Table read_string(const std::string& text, const std::string& origin) {
  return parse(text, origin);
}

std::string escape_field(const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace fairforest::csv
