#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "studyplan/error.h"

namespace studyplan {

struct CsvRow {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// A parsed RFC-4180 document whose first record is the header.
struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

class CsvError : public Error {
 public:
  CsvError(std::string file, std::size_t line, const std::string& message);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Parses comma-separated text with RFC-4180 quoting. Blank lines are
/// skipped; a UTF-8 BOM at the start is ignored. `file` is only used for
/// diagnostics.
CsvTable parse_csv(std::string_view text, std::string file);

CsvTable read_csv_file(const std::string& path);

}  // namespace studyplan
