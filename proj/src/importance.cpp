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

#include "regionpack/importance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace regionpack::importance {

PixelField::PixelField(int w, int h, std::vector<double> v) : width(w), height(h), values(std::move(v)) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("PixelField: dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(w) * h) {
    throw std::invalid_argument("PixelField: expected " + std::to_string(w * h) + " values, got " +
                                std::to_string(values.size()));
  }
}

PixelField::PixelField(int w, int h, double fill)
    : PixelField(w, h, std::vector<double>(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill)) {}

MBGeometry MBGeometry::for_frame(int frame_w, int frame_h, int mb_size) {
  if (mb_size < 1) throw std::invalid_argument("mb_size must be >= 1");
  if (frame_w <= 0 || frame_h <= 0) throw std::invalid_argument("frame dimensions must be positive");
  MBGeometry g;
  g.mb_size = mb_size;
  g.frame_w = frame_w;
  g.frame_h = frame_h;
  g.grid_w = (frame_w + mb_size - 1) / mb_size;
  g.grid_h = (frame_h + mb_size - 1) / mb_size;
  return g;
}

MBGeometry MBGeometry::for_grid(int grid_w, int grid_h, int mb_size) {
  if (grid_w <= 0 || grid_h <= 0) throw std::invalid_argument("grid dimensions must be positive");
  return for_frame(grid_w * mb_size, grid_h * mb_size, mb_size);
}

double ImportanceMap::max_score() const {
  return scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
}

namespace {

void check_inputs(const PixelField& grad, const PixelField& diff, const MBGeometry& geom) {
  if (grad.width != diff.width || grad.height != diff.height) {
    throw std::invalid_argument("gradient field is " + std::to_string(grad.width) + "x" +
                                std::to_string(grad.height) + " but difference field is " +
                                std::to_string(diff.width) + "x" + std::to_string(diff.height));
  }
  if (grad.values.size() != static_cast<std::size_t>(grad.width) * grad.height ||
      diff.values.size() != static_cast<std::size_t>(diff.width) * diff.height) {
    throw std::invalid_argument("pixel field value count does not match its dimensions");
  }
  const auto expect = MBGeometry::for_frame(grad.width, grad.height, geom.mb_size);
  if (geom.grid_w != expect.grid_w || geom.grid_h != expect.grid_h) {
    throw std::invalid_argument("MB geometry " + std::to_string(geom.grid_w) + "x" +
                                std::to_string(geom.grid_h) + " does not tile a " +
                                std::to_string(grad.width) + "x" + std::to_string(grad.height) +
                                " frame with mb_size " + std::to_string(geom.mb_size));
  }
}

ImportanceMap empty_map(const PixelField& grad, const MBGeometry& geom) {
  ImportanceMap map;
  map.geometry = MBGeometry::for_frame(grad.width, grad.height, geom.mb_size);
  map.scores.assign(map.geometry.mb_count(), 0.0);
  return map;
}

}  // namespace

ImportanceMap compute_mb_importance(const PixelField& grad, const PixelField& diff,
                                    const MBGeometry& geom) {
  check_inputs(grad, diff, geom);
  ImportanceMap map = empty_map(grad, geom);
  const int mb = geom.mb_size;
  const int gw = map.geometry.grid_w;
  const int n = static_cast<int>(map.geometry.mb_count());
  const int width = grad.width;
  const int height = grad.height;
  const double* g = grad.values.data();
  const double* d = diff.values.data();
  double* out = map.scores.data();

#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    const int x0 = (k % gw) * mb;
    const int y0 = (k / gw) * mb;
    const int x1 = std::min(x0 + mb, width);
    const int y1 = std::min(y0 + mb, height);
    double acc = 0.0;
    for (int y = y0; y < y1; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * width;
      for (int x = x0; x < x1; ++x) acc += std::fabs(g[row + x]) * std::fabs(d[row + x]);
    }
    out[k] = acc;
  }
  return map;
}

ImportanceMap compute_mb_importance_serial(const PixelField& grad, const PixelField& diff,
                                           const MBGeometry& geom) {
  check_inputs(grad, diff, geom);
  ImportanceMap map = empty_map(grad, geom);
  const int mb = geom.mb_size;
  for (int y = 0; y < grad.height; ++y) {
    for (int x = 0; x < grad.width; ++x) {
      const std::size_t k = static_cast<std::size_t>(y / mb) * map.geometry.grid_w + x / mb;
      map.scores[k] += std::fabs(grad.at(x, y)) * std::fabs(diff.at(x, y));
    }
  }
  return map;
}

LevelMap quantize_levels(const ImportanceMap& map, int level_count) {
  if (level_count < 2) throw std::invalid_argument("level_count must be >= 2");
  if (map.scores.empty()) throw std::invalid_argument("cannot quantize an empty importance map");
  LevelMap out;
  out.geometry = map.geometry;
  out.level_count = level_count;
  out.levels.assign(map.scores.size(), 0);
  const auto [lo_it, hi_it] = std::minmax_element(map.scores.begin(), map.scores.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < map.scores.size(); ++i) {
    const double t = (map.scores[i] - lo) / range * level_count;
    out.levels[i] = std::clamp(static_cast<int>(std::floor(t)), 0, level_count - 1);
  }
  return out;
}

ImportanceMap synth_importance(std::uint64_t seed, const MBGeometry& geom, double sparsity,
                               int hotspot_count) {
  if (!(sparsity > 0.0 && sparsity <= 1.0)) throw std::invalid_argument("sparsity must be in (0, 1]");
  if (hotspot_count < 0) throw std::invalid_argument("hotspot_count must be >= 0");
  if (geom.grid_w <= 0 || geom.grid_h <= 0) throw std::invalid_argument("empty MB grid");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int gw = geom.grid_w;
  const int gh = geom.grid_h;
  const int n = gw * gh;
  const int hot_total = std::clamp(static_cast<int>(std::lround(sparsity * n)), 0, n);

  std::vector<int> owner(n, -1);
  auto pick_cell = [&] { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  auto neighbours = [&](int c, auto&& fn) {
    const int x = c % gw, y = c / gw;
    if (x > 0) fn(c - 1);
    if (x + 1 < gw) fn(c + 1);
    if (y > 0) fn(c - gw);
    if (y + 1 < gh) fn(c + gw);
  };
  auto touches_other = [&](int c, int blob) {
    bool hit = false;
    neighbours(c, [&](int q) { hit = hit || (owner[q] >= 0 && owner[q] != blob); });
    return hit;
  };

  int placed = 0;
  const int blobs = std::min(hotspot_count, hot_total);
  if (blobs > 0) {
    // Blobs grow outward from a seed in near-rectangular shells with a
    // random aspect ratio, like object footprints.
    std::vector<std::vector<std::pair<double, int>>> frontier(blobs);
    std::vector<int> seed_cell(blobs, -1);
    std::vector<double> ax(blobs, 1.0), ay(blobs, 1.0);
    std::vector<int> quota(blobs, hot_total / blobs);
    for (int i = 0; i < hot_total % blobs; ++i) ++quota[i];
    std::vector<int> grown(blobs, 0);
    auto shell = [&](int c, int blob) {
      const double dx = std::abs(c % gw - seed_cell[blob] % gw) / ax[blob];
      const double dy = std::abs(c / gw - seed_cell[blob] / gw) / ay[blob];
      return std::max(dx, dy) + 0.35 * unit(rng);
    };
    auto claim = [&](int c, int blob) {
      owner[c] = blob;
      ++grown[blob];
      ++placed;
      neighbours(c, [&](int q) {
        if (owner[q] < 0) frontier[blob].emplace_back(shell(q, blob), q);
      });
    };
    for (int b = 0; b < blobs; ++b) {
      for (int attempt = 0; attempt < 64 * n; ++attempt) {
        const int c = pick_cell();
        if (owner[c] < 0 && !touches_other(c, b)) {
          seed_cell[b] = c;
          const double aspect = std::exp((unit(rng) - 0.5) * 1.2);
          ax[b] = aspect;
          ay[b] = 1.0 / aspect;
          claim(c, b);
          break;
        }
      }
    }
    bool progress = true;
    while (placed < hot_total && progress) {
      progress = false;
      for (int b = 0; b < blobs && placed < hot_total; ++b) {
        if (grown[b] == 0 || grown[b] >= quota[b]) continue;
        auto& f = frontier[b];
        while (!f.empty()) {
          const auto best = std::min_element(f.begin(), f.end());
          const int c = best->second;
          *best = f.back();
          f.pop_back();
          if (owner[c] < 0 && !touches_other(c, b)) {
            claim(c, b);
            progress = true;
            break;
          }
        }
      }
      if (!progress) {
        // Every blob under quota is boxed in; let the remaining blobs absorb
        // the leftover quota.
        for (int b = 0; b < blobs; ++b) {
          if (grown[b] > 0 && !frontier[b].empty() && grown[b] >= quota[b]) {
            quota[b] = grown[b] + 1;
            progress = true;
          }
        }
      }
    }
  }
  // Scatter whatever the blobs could not hold (and everything when no
  // hotspots were requested).
  while (placed < hot_total) {
    const int c = pick_cell();
    if (owner[c] < 0) {
      owner[c] = blobs;
      ++placed;
    }
  }

  ImportanceMap map;
  map.geometry = geom;
  map.scores.resize(n);
  for (int c = 0; c < n; ++c) {
    const double u = unit(rng);
    map.scores[c] = owner[c] >= 0 ? 0.75 + 0.25 * u : 0.05 * u;
  }
  return map;
}

double high_importance_fraction(const ImportanceMap& map) {
  if (map.scores.empty()) return 0.0;
  const double cut = 0.5 * map.max_score();
  const auto hot = std::count_if(map.scores.begin(), map.scores.end(), [&](double s) { return s > cut; });
  return static_cast<double>(hot) / static_cast<double>(map.scores.size());
}

Grid to_grid(const ImportanceMap& map) {
  return Grid{static_cast<std::size_t>(map.geometry.grid_h), static_cast<std::size_t>(map.geometry.grid_w),
              map.scores};
}

Grid to_grid(const LevelMap& map) {
  Grid g{static_cast<std::size_t>(map.geometry.grid_h), static_cast<std::size_t>(map.geometry.grid_w), {}};
  g.values.assign(map.levels.begin(), map.levels.end());
  return g;
}

PixelField field_from_grid(const Grid& grid) {
  return PixelField(static_cast<int>(grid.cols), static_cast<int>(grid.rows), grid.values);
}

}  // namespace regionpack::importance
