/*
 * (C) Copyright 2026 The enloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "enloc/csv.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include "enloc/error.hpp"
#include "enloc/text.hpp"

namespace enloc::csv {

Table::Table(std::vector<std::string> header)
  : header_(std::move(header)) {}

Table & Table::row() {
  rows_.emplace_back();
  rows_.back().reserve(header_.size());
  return *this;
}

Table & Table::add(const std::string & cell) {
  if (rows_.empty()) throw InvalidArgument("add() before row()");
  if (rows_.back().size() >= header_.size()) throw InvalidArgument("too many cells in CSV row");
  rows_.back().push_back(cell);
  return *this;
}

Table & Table::add(const char * cell) {
  return add(std::string(cell));
}

Table & Table::add(double value) {
  return add(text::format_double(value));
}

Table & Table::add(long long value) {
  return add(std::to_string(value));
}

Table & Table::add(unsigned long long value) {
  return add(std::to_string(value));
}

std::string Table::str() const {
  std::string out;
  auto append_line = [&out](const std::vector<std::string> & cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  append_line(header_);
  for (const auto & r : rows_) {
    if (r.size() != header_.size()) throw InvalidArgument("incomplete CSV row");
    append_line(r);
  }
  return out;
}

// -----------------------------------------------------------------------------

void write_atomic(const std::filesystem::path & path, const std::string & content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::size_t Parsed::column(const std::string & name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ParseError("CSV has no column '" + name + "'");
}

Parsed read(const std::filesystem::path & path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  Parsed parsed;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    for (auto cell : text::split(line, ',')) cells.emplace_back(cell);
    if (first) {
      parsed.header = std::move(cells);
      first = false;
    } else if (!line.empty()) {
      parsed.rows.push_back(std::move(cells));
    }
  }
  return parsed;
}

}  // namespace enloc::csv
