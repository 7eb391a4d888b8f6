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

#include "regionpack/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "regionpack/labeling.hpp"

namespace regionpack::temporal {

ResidualFrame::ResidualFrame(int w, int h, std::vector<double> m) : width(w), height(h), magnitudes(std::move(m)) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("ResidualFrame: dimensions must be positive");
  if (magnitudes.size() != static_cast<std::size_t>(w) * h) {
    throw std::invalid_argument("ResidualFrame: value count does not match dimensions");
  }
  for (double v : magnitudes) {
    if (!(v >= 0.0)) throw std::invalid_argument("ResidualFrame: magnitudes must be nonnegative");
  }
}

ResidualFrame::ResidualFrame(int w, int h, double fill)
    : ResidualFrame(w, h, std::vector<double>(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill)) {}

double ResidualFrame::max_magnitude() const {
  return magnitudes.empty() ? 0.0 : *std::max_element(magnitudes.begin(), magnitudes.end());
}

const char* to_string(Operator op) { return op == Operator::inv_area ? "inv_area" : "area"; }

Operator operator_from_string(const std::string& name) {
  if (name == "inv_area") return Operator::inv_area;
  if (name == "area") return Operator::area;
  throw std::invalid_argument("unknown operator '" + name + "' (expected inv_area or area)");
}

namespace {

Components foreground(const ResidualFrame& res, double threshold) {
  std::vector<std::uint8_t> mask(res.magnitudes.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = res.magnitudes[i] > threshold ? 1 : 0;
  return label_4connected(mask, res.width, res.height);
}

}  // namespace

double phi_inv_area(const ResidualFrame& res, double threshold) {
  const auto comps = foreground(res, threshold);
  double sum = 0.0;
  for (auto area : comps.sizes) sum += 1.0 / static_cast<double>(area);
  return sum;
}

double phi_area(const ResidualFrame& res, double threshold) {
  double count = 0.0;
  for (double m : res.magnitudes) count += m > threshold ? 1.0 : 0.0;
  return count;
}

double phi(const ResidualFrame& res, Operator op, double threshold) {
  return op == Operator::inv_area ? phi_inv_area(res, threshold) : phi_area(res, threshold);
}

double FeatureSeries::total_change() const {
  double sum = 0.0;
  for (double d : deltas) sum += std::fabs(d);
  return sum;
}

double default_threshold(std::span<const ResidualFrame> frames) {
  double hi = 0.0;
  for (const auto& f : frames) hi = std::max(hi, f.max_magnitude());
  return 0.05 * hi;
}

FeatureSeries series_from_values(std::vector<double> values, int stream_id) {
  if (values.size() < 2) throw std::invalid_argument("a feature series needs at least 2 frames");
  FeatureSeries s;
  s.stream_id = stream_id;
  s.values = std::move(values);
  s.deltas.resize(s.values.size() - 1);
  for (std::size_t i = 0; i + 1 < s.values.size(); ++i) s.deltas[i] = s.values[i + 1] - s.values[i];
  const double total = s.total_change();
  s.normalized.assign(s.deltas.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < s.deltas.size(); ++i) s.normalized[i] = std::fabs(s.deltas[i]) / total;
  }
  return s;
}

FeatureSeries build_series(std::span<const ResidualFrame> frames, Operator op,
                           std::optional<double> threshold, int stream_id) {
  if (frames.size() < 2) throw std::invalid_argument("build_series needs at least 2 frames");
  const double thr = threshold.value_or(default_threshold(frames));
  if (thr < 0.0) throw std::invalid_argument("threshold must be >= 0");
  std::vector<double> values;
  values.reserve(frames.size());
  for (const auto& f : frames) values.push_back(phi(f, op, thr));
  return series_from_values(std::move(values), stream_id);
}

FrameSelection cdf_select(const FeatureSeries& series, int budget) {
  if (budget < 1) throw std::invalid_argument("frame budget must be >= 1");
  const int n = static_cast<int>(series.normalized.size());
  FrameSelection sel;
  sel.stream_id = series.stream_id;
  sel.chunk_len = n + 1;

  if (budget >= sel.chunk_len) {
    sel.selected.resize(sel.chunk_len);
    std::iota(sel.selected.begin(), sel.selected.end(), 0);
  } else {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) cdf[k] = acc += series.normalized[k];
    sel.selected.push_back(0);
    if (n > 0 && acc > 0.0) {
      constexpr double kTol = 1e-12;
      for (int j = 0; j < budget; ++j) {
        const double target = (j + 0.5) / budget;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), target - kTol);
        const int k = it == cdf.end() ? n - 1 : static_cast<int>(it - cdf.begin());
        sel.selected.push_back(k + 1);
      }
    }
    std::sort(sel.selected.begin(), sel.selected.end());
    sel.selected.erase(std::unique(sel.selected.begin(), sel.selected.end()), sel.selected.end());
  }

  sel.reuse_map.resize(sel.chunk_len);
  std::size_t next = 0;
  int current = 0;
  for (int f = 0; f < sel.chunk_len; ++f) {
    if (next < sel.selected.size() && sel.selected[next] == f) current = sel.selected[next++];
    sel.reuse_map[f] = current;
  }
  return sel;
}

std::map<int, int> allocate_frame_budget(const std::map<int, FeatureSeries>& series_by_stream,
                                         int total_budget) {
  if (series_by_stream.empty()) throw std::invalid_argument("no streams to allocate frames to");
  const int streams = static_cast<int>(series_by_stream.size());
  if (total_budget < streams) {
    throw std::invalid_argument("frame budget " + std::to_string(total_budget) + " is below the stream count " +
                                std::to_string(streams));
  }

  struct Entry {
    int id;
    double quota;
    int alloc;
  };
  std::vector<Entry> entries;
  double total = 0.0;
  for (const auto& [id, s] : series_by_stream) total += s.total_change();
  for (const auto& [id, s] : series_by_stream) {
    const double q = total > 0.0 ? total_budget * (s.total_change() / total)
                                 : static_cast<double>(total_budget) / streams;
    entries.push_back({id, q, static_cast<int>(std::floor(q))});
  }

  int given = 0;
  for (const auto& e : entries) given += e.alloc;
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  constexpr double kTieTol = 1e-9;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = entries[a].quota - std::floor(entries[a].quota);
    const double rb = entries[b].quota - std::floor(entries[b].quota);
    if (std::fabs(ra - rb) > kTieTol) return ra > rb;
    return entries[a].id < entries[b].id;
  });
  for (std::size_t i = 0; given < total_budget; i = (i + 1) % order.size()) {
    ++entries[order[i]].alloc;
    ++given;
  }

  // Every stream keeps its anchor frame.
  for (auto& e : entries) {
    if (e.alloc > 0) continue;
    Entry* donor = nullptr;
    for (auto& d : entries) {
      if (d.alloc <= 1) continue;
      if (!donor || d.alloc - d.quota > donor->alloc - donor->quota + kTieTol) donor = &d;
    }
    --donor->alloc;  // total_budget >= streams guarantees a donor
    ++e.alloc;
  }

  std::map<int, int> out;
  for (const auto& e : entries) out[e.id] = e.alloc;
  return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("correlation: sequences differ in length");
  if (a.size() < 2) throw std::invalid_argument("correlation: need at least 2 samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("correlation: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

BlobSequence synth_blob_sequence(std::uint64_t seed, int frames, int width, int height) {
  if (frames < 2 || width < 64 || height < 32) throw std::invalid_argument("synth_blob_sequence: scene too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };

  // Large blocks live in the left half, small objects in the right half, so
  // the two never merge into one component.
  const int split = width / 2;
  struct Block {
    int x, y, w, h;
  };
  std::vector<Block> blocks;
  const int block_rows = 2;
  for (int i = 0; i < block_rows; ++i) {
    const int band = height / block_rows;
    blocks.push_back({2, i * band + 2, uniform_int(12, split - 8), uniform_int(6, band - 6)});
  }
  struct Object {
    bool alive;
    int x, y, side;
  };
  std::vector<Object> objects(6);
  for (auto& o : objects) {
    o.alive = unit(rng) < 0.5;
    o.side = uniform_int(2, 3);
    o.x = uniform_int(split + 4, width - 6);
    o.y = uniform_int(2, height - 6);
  }

  const auto geom = importance::MBGeometry::for_frame(width, height, 16);
  BlobSequence seq;
  for (int f = 0; f < frames; ++f) {
    if (f > 0) {
      for (auto& b : blocks) {
        const int band = height / block_rows;
        b.w = std::clamp(b.w + uniform_int(-4, 4), 8, split - 6);
        b.h = std::clamp(b.h + uniform_int(-2, 2), 4, band - 4);
      }
      for (auto& o : objects) {
        if (unit(rng) < 0.2) o.alive = !o.alive;
        if (unit(rng) < 0.3) o.x = std::clamp(o.x + uniform_int(-1, 1), split + 4, width - 6);
        if (unit(rng) < 0.3) o.y = std::clamp(o.y + uniform_int(-1, 1), 2, height - 6);
      }
    }
    std::vector<double> residual(static_cast<std::size_t>(width) * height);
    for (auto& v : residual) v = 0.02 * unit(rng);
    std::vector<double> grad(residual.size(), 0.0);
    for (const auto& b : blocks) {
      for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x) residual[static_cast<std::size_t>(y) * width + x] = 1.0;
    }
    for (const auto& o : objects) {
      if (!o.alive) continue;
      const double weight = 1.0 / (o.side * o.side);
      for (int y = o.y; y < o.y + o.side; ++y) {
        for (int x = o.x; x < o.x + o.side; ++x) {
          residual[static_cast<std::size_t>(y) * width + x] = 1.0;
          grad[static_cast<std::size_t>(y) * width + x] = weight;
        }
      }
    }
    seq.masks.push_back(importance::compute_mb_importance(importance::PixelField(width, height, grad),
                                                          importance::PixelField(width, height, residual), geom));
    seq.residuals.emplace_back(width, height, std::move(residual));
  }
  return seq;
}

std::vector<double> mask_change_series(std::span<const importance::ImportanceMap> masks) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < masks.size(); ++i) {
    const auto& a = masks[i].scores;
    const auto& b = masks[i + 1].scores;
    if (a.size() != b.size()) throw std::invalid_argument("mask_change_series: maps differ in size");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) sum += std::fabs(b[k] - a[k]);
    out.push_back(sum);
  }
  return out;
}

}  // namespace regionpack::temporal
