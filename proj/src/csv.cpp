#include "wikitables/csv.hpp"

#include "wikitables/error.hpp"

namespace wikitables::csv {

std::string write(const Rows& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out.push_back(',');
      const std::string& field = row[i];
      if (field.find_first_of(",\"\r\n") == std::string::npos) {
        out += field;
        continue;
      }
      out.push_back('"');
      for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
      }
      out.push_back('"');
    }
    out += "\r\n";
  }
  return out;
}

Rows read(std::string_view text) {
  Rows rows;
  std::vector<std::string> record;
  std::string field;
  std::size_t i = 0;
  bool in_record = false;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"' && field.empty()) {
      ++i;
      while (true) {
        if (i >= text.size())
          throw Error("csv: unterminated quoted field at byte " + std::to_string(i));
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field.push_back(text[i++]);
      }
      in_record = true;
      if (i < text.size() && text[i] != ',' && text[i] != '\r' && text[i] != '\n')
        throw Error("csv: unexpected character after quoted field at byte " +
                    std::to_string(i));
      continue;
    }
    if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      in_record = true;
      ++i;
    } else if (c == '\r' || c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(record));
      record.clear();
      in_record = false;
      i += (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
    } else {
      field.push_back(c);
      in_record = true;
      ++i;
    }
  }
  if (in_record) {
    record.push_back(std::move(field));
    rows.push_back(std::move(record));
  }
  return rows;
}

}  // namespace wikitables::csv
