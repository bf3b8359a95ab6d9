#include "scout/csv.hpp"

#include <stdexcept>

namespace scout::csv {

std::vector<Row> parse(std::string_view content) {
  std::vector<Row> rows;
  // Skip a UTF-8 byte order mark.
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);

  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    Row row{line, {}};
    std::string field;
    bool row_done = false;
    bool any_content = false;
    while (!row_done) {
      if (i < n && content[i] == '"') {
        any_content = true;
        const std::size_t quote_line = line;
        ++i;
        while (true) {
          if (i >= n) {
            throw std::runtime_error("unterminated quoted field starting on line " +
                                     std::to_string(quote_line));
          }
          const char c = content[i];
          if (c == '"') {
            if (i + 1 < n && content[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
      }
      while (i < n && content[i] != ',' && content[i] != '\n' && content[i] != '\r') {
        any_content = true;
        field.push_back(content[i++]);
      }
      if (i >= n) {
        row.fields.push_back(std::move(field));
        row_done = true;
      } else if (content[i] == ',') {
        any_content = true;
        row.fields.push_back(std::move(field));
        field.clear();
        ++i;
      } else {
        if (content[i] == '\r') ++i;
        if (i < n && content[i] == '\n') ++i;
        ++line;
        row.fields.push_back(std::move(field));
        row_done = true;
      }
    }
    if (any_content) rows.push_back(std::move(row));
  }
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace scout::csv
