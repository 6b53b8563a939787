#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace catfuse {

/// In-memory CSV table; header row required.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_cols() const { return static_cast<int>(header.size()); }
  int col_index(const std::string& name) const;  // -1 if absent
  std::vector<std::string> column(int c) const;
};

/// RFC-4180-style reader: quoted fields, escaped quotes, embedded separators
/// and newlines, CRLF tolerated. Throws on ragged rows and on missing cells.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

}  // namespace catfuse
