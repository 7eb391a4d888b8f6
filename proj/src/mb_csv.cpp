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

#include <cmath>
#include <cstdio>
#include <sstream>

#include "regionpack/grid_io.hpp"
#include "regionpack/packing.hpp"

namespace regionpack::packing {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int to_int(const std::string& s, const std::string& source, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(source, line, std::string(what) + " '" + s + "' is not an integer");
}

}  // namespace

std::vector<MBIndex> parse_mb_csv(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<MBIndex> out;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (!header) {
      if (line != "stream_id,frame_id,loc_x,loc_y,importance") {
        throw ParseError(source, lineno, "expected header 'stream_id,frame_id,loc_x,loc_y,importance'");
      }
      header = true;
      continue;
    }
    if (f.size() != 5) {
      throw ParseError(source, lineno, "expected 5 fields, found " + std::to_string(f.size()));
    }
    MBIndex mb;
    mb.stream_id = to_int(f[0], source, lineno, "stream_id");
    mb.frame_id = to_int(f[1], source, lineno, "frame_id");
    mb.loc_x = to_int(f[2], source, lineno, "loc_x");
    mb.loc_y = to_int(f[3], source, lineno, "loc_y");
    try {
      std::size_t used = 0;
      mb.importance = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
    } catch (const std::exception&) {
      throw ParseError(source, lineno, "importance '" + f[4] + "' is not a number");
    }
    if (!std::isfinite(mb.importance) || mb.importance < 0.0) {
      throw ParseError(source, lineno, "importance must be finite and >= 0");
    }
    if (mb.loc_x < 0 || mb.loc_y < 0) throw ParseError(source, lineno, "MB location must be >= 0");
    out.push_back(mb);
  }
  if (!header) throw ParseError(source, 0, "empty file: missing header");
  return out;
}

std::string format_mb_csv(const std::vector<MBIndex>& mbs) {
  std::string out = "stream_id,frame_id,loc_x,loc_y,importance\n";
  char buf[128];
  for (const auto& m : mbs) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.6g\n", m.stream_id, m.frame_id, m.loc_x, m.loc_y, m.importance);
    out += buf;
  }
  return out;
}

}  // namespace regionpack::packing
