#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace scout::csv {

struct Row {
  std::size_t line;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped. Throws std::runtime_error on an unterminated quote.
std::vector<Row> parse(std::string_view content);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace scout::csv
