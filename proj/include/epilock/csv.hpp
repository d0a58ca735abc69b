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


#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace epilock {

/// 12 significant digits; the format used by every emitted artifact.
std::string fmt12(double value);
/// Shortest round-trip form for canonical bundles.
std::string fmt17(double value);

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index; throws Validation naming the file and column if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  const std::string& str(std::size_t row, const std::string& name) const;
  /// Parses a number; errors cite the file, line and column.
  double num(std::size_t row, const std::string& name) const;
};

/// Comma separated, header row required, no quoting. Blank lines skipped.
CsvTable read_csv(const std::string& path);

/// Writes to `<path>.partial` and renames to `path` on commit(), so a failed
/// run leaves only the partial file behind.
class CsvWriter {
 public:
  explicit CsvWriter(std::string path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& cells);
  void commit();

 private:
  std::string path_;
  std::ofstream out_;
  bool committed_ = false;
};

/// Whole-file text writer with the same partial/commit protocol.
void write_text(const std::string& path, const std::string& content);

}  // namespace epilock
