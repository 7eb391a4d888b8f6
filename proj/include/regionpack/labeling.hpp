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

#include <cstdint>
#include <span>
#include <vector>

namespace regionpack {

/// 4-connected component labeling of a row-major binary mask.
struct Components {
  /// -1 for background, otherwise the component id (ids in raster order of
  /// each component's first pixel).
  std::vector<std::int32_t> labels;
  std::vector<std::int64_t> sizes;

  std::size_t count() const { return sizes.size(); }
};

Components label_4connected(std::span<const std::uint8_t> mask, int width, int height);

}  // namespace regionpack
