// Copyright 2026 The epilock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "epilock/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "epilock/error.hpp"

namespace epilock {

namespace {

std::string format(const char* spec, double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, value);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string fmt12(double value) { return format("%.12g", value); }
std::string fmt17(double value) { return format("%.17g", value); }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::kValidation, path + ": missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

const std::string& CsvTable::str(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

double CsvTable::num(std::size_t row, const std::string& name) const {
  const std::string& text = str(row, name);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE) {
    throw Error(ErrorCode::kValidation, path + " row " + std::to_string(row + 2) +
                                            ", column '" + name + "': not a number: '" +
                                            text + "'");
  }
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  CsvTable table;
  table.path = path;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (first) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      table.header = split(line);
      first = false;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::kValidation, path + " line " + std::to_string(lineno) + ": expected " +
                                              std::to_string(table.header.size()) +
                                              " fields, got " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (first) throw Error(ErrorCode::kValidation, path + ": empty file");
  return table;
}

CsvWriter::CsvWriter(std::string path) : path_(std::move(path)) {
  out_.open(path_ + ".partial", std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kIo, "cannot write " + path_ + ".partial");
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::commit() {
  if (committed_) return;
  out_.close();
  if (!out_) throw Error(ErrorCode::kIo, "write failed for " + path_);
  std::filesystem::rename(path_ + ".partial", path_);
  committed_ = true;
}

void write_text(const std::string& path, const std::string& content) {
  {
    std::ofstream out(path + ".partial", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path + ".partial");
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
  }
  std::filesystem::rename(path + ".partial", path);
}

}  // namespace epilock
