#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dcopt/types.hpp"

namespace dcopt {

// Full-precision scientific notation: 17 significant digits round-trip a
// double exactly, keeping repeated runs byte-comparable.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline std::string fmt_int(long long v) { return std::to_string(v); }

using CsvRow = std::vector<std::string>;

inline std::string csv_to_string(const CsvRow& header, const std::vector<CsvRow>& rows) {
  std::string out;
  auto append_row = [&out](const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& row : rows) append_row(row);
  return out;
}

inline void write_csv(const std::string& path, const CsvRow& header,
                      const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << csv_to_string(header, rows);
}

}  // namespace dcopt
