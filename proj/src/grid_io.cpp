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

#include "regionpack/grid_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace regionpack {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? source + ": " + what
                                   : source + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

double parse_number(const std::string& token, const std::string& source, std::size_t line) {
  if (token.empty()) throw ParseError(source, line, "empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(source, line, "invalid number '" + token + "'");
  }
  return v;
}

std::size_t parse_dim(const std::string& token, const std::string& source, std::size_t line) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size() || v <= 0) {
    throw ParseError(source, line, "invalid dimension '" + token + "'");
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> tokens_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

Grid parse_grid(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  std::size_t idx = 0;
  while (idx < lines.size() && is_blank(lines[idx])) ++idx;
  if (idx == lines.size()) throw ParseError(source, 0, "empty grid file");

  Grid g;
  bool csv = false;
  const auto head = tokens_ws(lines[idx]);
  if (!head.empty() && head[0] == "GRID") {
    if (head.size() != 3) throw ParseError(source, idx + 1, "expected 'GRID <rows> <cols>'");
    g.rows = parse_dim(head[1], source, idx + 1);
    g.cols = parse_dim(head[2], source, idx + 1);
    ++idx;
  } else {
    const auto names = tokens_csv(lines[idx]);
    if (names.size() != 2 || names[0] != "rows" || names[1] != "cols") {
      throw ParseError(source, idx + 1, "expected 'GRID <rows> <cols>' or CSV header 'rows,cols'");
    }
    ++idx;
    if (idx >= lines.size()) throw ParseError(source, idx, "missing CSV dimension line");
    const auto dims = tokens_csv(lines[idx]);
    if (dims.size() != 2) throw ParseError(source, idx + 1, "expected '<rows>,<cols>'");
    g.rows = parse_dim(dims[0], source, idx + 1);
    g.cols = parse_dim(dims[1], source, idx + 1);
    ++idx;
    csv = true;
  }

  g.values.reserve(g.rows * g.cols);
  std::size_t row = 0;
  for (; idx < lines.size() && row < g.rows; ++idx) {
    if (is_blank(lines[idx])) continue;
    const auto toks = csv ? tokens_csv(lines[idx]) : tokens_ws(lines[idx]);
    if (toks.size() != g.cols) {
      throw ParseError(source, idx + 1,
                       "expected " + std::to_string(g.cols) + " values, found " +
                           std::to_string(toks.size()));
    }
    for (const auto& t : toks) g.values.push_back(parse_number(t, source, idx + 1));
    ++row;
  }
  if (row != g.rows) {
    throw ParseError(source, lines.size(),
                     "expected " + std::to_string(g.rows) + " rows, found " + std::to_string(row));
  }
  for (; idx < lines.size(); ++idx) {
    if (!is_blank(lines[idx])) throw ParseError(source, idx + 1, "trailing data after grid");
  }
  return g;
}

Grid read_grid(const std::filesystem::path& path) {
  return parse_grid(read_text_file(path), path.string());
}

std::string format_grid(const Grid& grid) {
  std::string out = "GRID " + std::to_string(grid.rows) + " " + std::to_string(grid.cols) + "\n";
  char buf[32];
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.6g", grid.at(r, c));
      if (c) out.push_back(' ');
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

void write_grid(const std::filesystem::path& path, const Grid& grid) {
  write_text_file(path, format_grid(grid));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace regionpack
