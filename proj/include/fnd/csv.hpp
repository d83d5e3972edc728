#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fnd::csv {

using Row = std::vector<std::string>;

/// Parses RFC-4180 text: comma separated, double-quote quoting with "" as an
/// escaped quote, quoted fields may span lines. Accepts LF or CRLF endings.
/// Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

std::vector<Row> read_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

}  // namespace fnd::csv
