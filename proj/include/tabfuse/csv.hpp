#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabfuse {

/// RFC-4180 style table: quoted fields, doubled-quote escapes, embedded
/// newlines inside quotes. Delimiter is configurable, comma by default.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path, char delimiter = ',');
CsvTable read_csv_text(std::string_view text, char delimiter = ',');

void write_csv(const std::string& path, const CsvTable& table, char delimiter = ',');
std::string csv_escape(std::string_view field, char delimiter = ',');

}  // namespace tabfuse
