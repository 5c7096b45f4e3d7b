#include "depriv/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "depriv/types.hpp"

namespace depriv::csv {

namespace {

// Splits one logical CSV record starting at pos; advances pos past the
// terminating newline. Handles quoted fields with embedded commas, quotes,
// and newlines. Returns false at end of input.
bool next_record(const std::string& text, std::size_t& pos, long& line,
                 std::vector<std::string>& fields, std::string& raw) {
  fields.clear();
  raw.clear();
  if (pos >= text.size()) return false;

  const std::size_t start = pos;
  std::string field;
  bool in_quotes = false;
  long lines_consumed = 0;

  while (pos < text.size()) {
    char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++lines_consumed;
        field += c;
      }
      ++pos;
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      break;
    } else {
      field += c;
      ++pos;
    }
  }
  fields.push_back(std::move(field));

  raw.assign(text, start, pos - start);
  // consume \r\n or \n
  if (pos < text.size() && text[pos] == '\r') ++pos;
  if (pos < text.size() && text[pos] == '\n') ++pos;
  line += lines_consumed + 1;
  return true;
}

}  // namespace

std::vector<Row> read_string(const std::string& text, const std::string& source) {
  std::vector<Row> rows;
  std::size_t pos = 0;
  long line = 0;
  std::vector<std::string> fields;
  std::string raw;
  while (pos < text.size()) {
    const long row_line = line + 1;
    if (!next_record(text, pos, line, fields, raw)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    rows.push_back(Row{row_line, fields, raw});
  }
  (void)source;
  return rows;
}

std::vector<Row> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DeprivError(ErrorFamily::Io, "UNREADABLE_FILE", "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_string(buf.str(), path);
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace depriv::csv
