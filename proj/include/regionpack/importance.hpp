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
#include <vector>

#include "regionpack/grid_io.hpp"

namespace regionpack::importance {

/// Row-major per-pixel field (gradient or difference magnitudes).
struct PixelField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  PixelField() = default;
  PixelField(int w, int h, std::vector<double> v);
  PixelField(int w, int h, double fill);

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Macroblock tiling of a frame. Boundary MBs may be ragged.
struct MBGeometry {
  int mb_size = 16;
  int grid_w = 0;
  int grid_h = 0;
  int frame_w = 0;
  int frame_h = 0;

  static MBGeometry for_frame(int frame_w, int frame_h, int mb_size = 16);
  /// Geometry for a grid known only in MB units; frame size = grid × mb_size.
  static MBGeometry for_grid(int grid_w, int grid_h, int mb_size = 16);

  std::size_t mb_count() const { return static_cast<std::size_t>(grid_w) * grid_h; }
  bool operator==(const MBGeometry&) const = default;
};

struct ImportanceMap {
  MBGeometry geometry;
  std::vector<double> scores;  // row-major over the MB grid

  double at(int mx, int my) const {
    return scores[static_cast<std::size_t>(my) * geometry.grid_w + mx];
  }
  double max_score() const;
};

struct LevelMap {
  MBGeometry geometry;
  std::vector<int> levels;
  int level_count = 10;
};

// score(MB) = sum over in-frame pixels i of |grad_i| * |diff_i|, accumulated in
// row-major order inside each MB. The OpenMP and serial variants produce
// bit-identical results.
ImportanceMap compute_mb_importance(const PixelField& grad, const PixelField& diff,
                                    const MBGeometry& geom);
ImportanceMap compute_mb_importance_serial(const PixelField& grad, const PixelField& diff,
                                           const MBGeometry& geom);

/// Equal-width binning over [min, max]; max lands in level_count - 1 and a
/// constant map quantizes to all zeros.
LevelMap quantize_levels(const ImportanceMap& map, int level_count = 10);

/// Synthetic map with `sparsity` of MBs in `hotspot_count` 4-connected blobs
/// scoring in [0.75, 1]; the rest score in [0, 0.05). Deterministic in seed.
/// hotspot_count == 0 scatters the hot MBs instead of growing blobs.
ImportanceMap synth_importance(std::uint64_t seed, const MBGeometry& geom, double sparsity,
                               int hotspot_count);

/// Fraction of MBs scoring above half the map maximum.
double high_importance_fraction(const ImportanceMap& map);

Grid to_grid(const ImportanceMap& map);
Grid to_grid(const LevelMap& map);
PixelField field_from_grid(const Grid& grid);

}  // namespace regionpack::importance
