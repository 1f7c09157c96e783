#include "studyplan/csv.h"

#include <fstream>
#include <sstream>

namespace studyplan {

CsvError::CsvError(std::string file, std::size_t line, const std::string& message)
    : Error(file + ":" + std::to_string(line) + ": " + message), file_(std::move(file)), line_(line) {}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text, std::string file) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<CsvRow> records;
  CsvRow current;
  std::string field;
  std::size_t line = 1;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes `a,` (two fields) from a blank line
  bool was_quoted = false;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    if (field_started || !current.fields.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current = CsvRow{};
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (!field_started && current.fields.empty()) current.line = line;
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) {
          throw CsvError(file, line, "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        was_quoted = true;
        field_started = true;
        quote_line = line;
        break;
      case ',':
        field_started = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (was_quoted) throw CsvError(file, line, "characters after closing quote");
        field_started = true;
        field.push_back(c);
    }
  }
  if (in_quotes) throw CsvError(file, quote_line, "unterminated quoted field");
  end_record();

  CsvTable table;
  table.file = std::move(file);
  if (records.empty()) throw CsvError(table.file, 1, "missing header row");
  table.header = std::move(records.front().fields);
  for (auto& h : table.header) {
    while (!h.empty() && (h.back() == ' ')) h.pop_back();
    while (!h.empty() && (h.front() == ' ')) h.erase(h.begin());
  }
  records.erase(records.begin());
  table.rows = std::move(records);
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(path, 0, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path);
}

}  // namespace studyplan
