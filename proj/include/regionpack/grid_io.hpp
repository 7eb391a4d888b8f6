// Copyright 2026 The regionpack Authors.
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

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace regionpack {

/// Raised for malformed input files. `line()` is 1-based, 0 when the error is
/// not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Dense row-major grid of reals as stored in the shared grid file format.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Text format:
//   GRID <rows> <cols>
//   <rows> lines of <cols> whitespace-separated numbers
// CSV variant:
//   rows,cols
//   <rows>,<cols>
//   <rows> lines of <cols> comma-separated numbers
Grid parse_grid(const std::string& text, const std::string& source = "<memory>");
Grid read_grid(const std::filesystem::path& path);

/// Writes the GRID form with 6 significant digits per value.
std::string format_grid(const Grid& grid);
void write_grid(const std::filesystem::path& path, const Grid& grid);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace regionpack
