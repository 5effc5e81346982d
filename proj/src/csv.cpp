#include "tabfuse/csv.hpp"

#include <fstream>
#include <sstream>

#include "tabfuse/common.hpp"

namespace tabfuse {

namespace {

std::vector<std::vector<std::string>> parse_rows(std::string_view text, char delim) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any_field = false;
  size_t i = 0;
  const size_t n = text.size();
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    any_field = true;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    any_field = false;
  };
  while (i < n) {
    char c = text[i];
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
      ++i;
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      ++i;
    } else if (c == delim) {
      end_field();
      ++i;
    } else if (c == '\r') {
      ++i;  // swallowed; row ends at the \n
    } else if (c == '\n') {
      end_row();
      ++i;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (any_field || !field.empty() || !row.empty()) end_row();
  return rows;
}

}  // namespace

CsvTable read_csv_text(std::string_view text, char delim) {
  auto rows = parse_rows(text, delim);
  if (rows.empty()) throw DataError("csv: missing header row");
  CsvTable t;
  t.header = std::move(rows.front());
  const size_t width = t.header.size();
  for (size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
    if (row.size() != width) {
      throw DataError("csv: row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(width));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path, char delim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_csv_text(buf.str(), delim);
}

std::string csv_escape(std::string_view field, char delim) {
  bool needs_quotes = false;
  for (char c : field) {
    if (c == delim || c == '"' || c == '\n' || c == '\r') {
      needs_quotes = true;
      break;
    }
  }
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv(const std::string& path, const CsvTable& table, char delim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("csv: cannot write " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << delim;
      out << csv_escape(row[i], delim);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

}  // namespace tabfuse
