#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace eqn::csv {

using Row = std::vector<std::string>;

/// A parsed CSV record together with the 1-based physical line it started on.
struct Record {
    Row fields;
    std::size_t line = 0;
};

/// Parses RFC 4180 style CSV: comma separated, double-quote quoting with ""
/// escapes, fields may span lines. CR before LF is dropped and a leading
/// UTF-8 byte order mark is skipped. Blank lines are ignored.
std::vector<Record> parse(std::string_view content);

/// Reads and parses a whole file. Throws DataError when it cannot be opened.
std::vector<Record> read_file(const std::string& path);

/// Quotes a field unconditionally.
std::string quote(std::string_view field);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string quote_if_needed(std::string_view field);

/// Writes `content` to `path`, throwing DataError on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace eqn::csv
