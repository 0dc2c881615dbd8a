/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace enloc::csv {

/// In-memory CSV table. Numbers are formatted with the shortest text that
/// round-trips, so reading a file back reproduces the doubles exactly.
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  /// Starts a new row; cells are appended with add().
  Table & row();
  Table & add(const std::string & cell);
  Table & add(const char * cell);
  Table & add(double value);
  Table & add(long long value);
  Table & add(int value) {return add(static_cast<long long>(value));}
  Table & add(unsigned long long value);
  Table & add(unsigned long value) {return add(static_cast<unsigned long long>(value));}
  Table & add(long value) {return add(static_cast<long long>(value));}
  Table & add(bool value) {return add(value ? "1" : "0");}

  std::size_t rows() const {return rows_.size();}
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a temporary file in the same directory and renames it over `path`.
void write_atomic(const std::filesystem::path & path, const std::string & content);

/// Parses a CSV file without quoting into header + rows.
struct Parsed {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ParseError when missing.
  std::size_t column(const std::string & name) const;
};
Parsed read(const std::filesystem::path & path);

}  // namespace enloc::csv
