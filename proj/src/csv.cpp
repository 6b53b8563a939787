#include "catfuse/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace catfuse {

int CsvTable::col_index(const std::string& name) const {
  for (int c = 0; c < num_cols(); ++c)
    if (header[c] == name) return c;
  return -1;
}

std::vector<std::string> CsvTable::column(int c) const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

namespace {

// One record, honoring quotes; returns false on end of input with no data.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\r') {
      // swallow; newline handling below
    } else if (c == '\n') {
      fields.push_back(field);
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
  if (!any) return false;
  fields.push_back(field);
  return true;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote_field(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::vector<std::string> rec;
  if (!read_record(in, rec)) throw std::runtime_error("csv: missing header row");
  t.header = rec;
  while (read_record(in, rec)) {
    if (rec.size() == 1 && rec[0].empty()) continue;  // trailing blank line
    if (rec.size() != t.header.size()) {
      std::ostringstream msg;
      msg << "csv: row " << (t.rows.size() + 2) << " has " << rec.size()
          << " fields, expected " << t.header.size();
      throw std::runtime_error(msg.str());
    }
    t.rows.push_back(rec);
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << quote_field(header[c]);
  }
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << ',';
      out << quote_field(r[c]);
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot open " + path + " for writing");
  write_csv(out, header, rows);
}

}  // namespace catfuse
