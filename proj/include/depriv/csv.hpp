#pragma once

// Minimal RFC-4180-ish CSV reader/writer: quoted fields, embedded commas and
// doubled quotes, CRLF tolerance. No dependency beyond the standard library.

#include <optional>
#include <string>
#include <vector>

namespace depriv::csv {

struct Row {
  long line = 0;  // 1-based physical line of the row start
  std::vector<std::string> fields;
  std::string raw;  // raw text of the row, without trailing newline
};

// Parses an entire CSV file. Throws DeprivError(Io) when unreadable.
// Every input data row appears either in the result or nowhere; parsing
// itself never drops rows.
std::vector<Row> read_file(const std::string& path);

// Parses CSV from a string (used by tests and the ACS fetcher).
std::vector<Row> read_string(const std::string& text, const std::string& source);

// Quotes a field if it contains a comma, quote, or newline.
std::string escape(const std::string& field);

// Fixed-decimal formatting used by all CSV emitters ("%.3f" style).
std::string fixed(double v, int decimals);

}  // namespace depriv::csv
