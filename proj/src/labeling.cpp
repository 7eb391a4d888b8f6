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

#include "regionpack/labeling.hpp"

#include <stdexcept>

namespace regionpack {

// Scanline seed fill with an explicit stack; components are numbered in the
// order their first pixel is met in a raster scan.
Components label_4connected(std::span<const std::uint8_t> mask, int width, int height) {
  if (width < 0 || height < 0 ||
      mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("label_4connected: mask size does not match dimensions");
  }
  Components out;
  out.labels.assign(mask.size(), -1);
  std::vector<std::int32_t> stack;

  for (std::int32_t start = 0; start < static_cast<std::int32_t>(mask.size()); ++start) {
    if (!mask[start] || out.labels[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(out.sizes.size());
    std::int64_t size = 0;
    out.labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::int32_t p = stack.back();
      stack.pop_back();
      ++size;
      const int x = p % width;
      const int y = p / width;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) return;
        const std::int32_t q = ny * width + nx;
        if (mask[q] && out.labels[q] < 0) {
          out.labels[q] = id;
          stack.push_back(q);
        }
      };
      visit(x - 1, y);
      visit(x + 1, y);
      visit(x, y - 1);
      visit(x, y + 1);
    }
    out.sizes.push_back(size);
  }
  return out;
}

}  // namespace regionpack
