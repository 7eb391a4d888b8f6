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

#include "regionpack/packing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace regionpack::packing {

bool queue_order(const MBIndex& a, const MBIndex& b) {
  if (a.importance != b.importance) return a.importance > b.importance;
  return std::tie(a.stream_id, a.frame_id, a.loc_y, a.loc_x) <
         std::tie(b.stream_id, b.frame_id, b.loc_y, b.loc_x);
}

bool overlaps(const Rect& a, const Rect& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

bool contains(const Rect& outer, const Rect& inner) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.x + inner.w <= outer.x + outer.w &&
         inner.y + inner.h <= outer.y + outer.h;
}

long long intersection_area(const Rect& a, const Rect& b) {
  const int w = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const int h = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return w > 0 && h > 0 ? static_cast<long long>(w) * h : 0;
}

namespace {

Rect mb_rect(const MBIndex& mb, int mb_size) {
  return {mb.loc_x * mb_size, mb.loc_y * mb_size, mb_size, mb_size};
}

// Importance and count from MBs whose centre lies in the box.
void recompute_weights(BoxItem& box) {
  box.total_importance = 0.0;
  box.member_count = 0;
  for (const auto& mb : box.members) {
    const long long cx2 = 2LL * mb.loc_x * box.mb_size + box.mb_size;
    const long long cy2 = 2LL * mb.loc_y * box.mb_size + box.mb_size;
    if (cx2 >= 2LL * box.src.x && cx2 < 2LL * (box.src.x + box.src.w) && cy2 >= 2LL * box.src.y &&
        cy2 < 2LL * (box.src.y + box.src.h)) {
      box.total_importance += mb.importance;
      ++box.member_count;
    }
  }
  box.density = box.member_count > 0 ? box.total_importance / box.member_count : 0.0;
}

}  // namespace

long long BoxItem::mb_pixels() const {
  long long px = 0;
  for (const auto& mb : members) px += intersection_area(mb_rect(mb, mb_size), src);
  return px;
}

const char* to_string(Policy p) {
  switch (p) {
    case Policy::importance_density:
      return "importance_density";
    case Policy::max_area_first:
      return "max_area_first";
    case Policy::block:
      return "block";
  }
  return "?";
}

Policy policy_from_string(const std::string& name) {
  if (name == "importance_density") return Policy::importance_density;
  if (name == "max_area_first") return Policy::max_area_first;
  if (name == "block") return Policy::block;
  throw std::invalid_argument("unknown packing policy '" + name +
                              "' (expected importance_density, max_area_first or block)");
}

Rect Placement::footprint() const {
  return rotated ? Rect{x, y, box.h(), box.w()} : Rect{x, y, box.w(), box.h()};
}

double PackingPlan::packed_importance() const {
  double sum = 0.0;
  for (const auto& p : placements) sum += p.box.total_importance;
  return sum;
}

long long selection_capacity(int bin_h, int bin_w, int bins, int mb_size) {
  if (bin_h <= 0 || bin_w <= 0 || bins <= 0 || mb_size <= 0) {
    throw std::invalid_argument("bin dimensions, bin count and mb_size must be positive");
  }
  return static_cast<long long>(bin_h) * bin_w * bins / (static_cast<long long>(mb_size) * mb_size);
}

std::vector<MBIndex> select_top_n(std::vector<MBIndex> queue, int bin_h, int bin_w, int bins, int mb_size) {
  const long long cap = selection_capacity(bin_h, bin_w, bins, mb_size);
  const auto keep = static_cast<std::size_t>(std::min<long long>(cap, static_cast<long long>(queue.size())));
  std::partial_sort(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(keep), queue.end(), queue_order);
  queue.resize(keep);
  return queue;
}

std::vector<Region> region_props(const std::vector<MBIndex>& selected) {
  std::vector<MBIndex> mbs = selected;
  std::stable_sort(mbs.begin(), mbs.end(), [](const MBIndex& a, const MBIndex& b) {
    if (std::tie(a.stream_id, a.frame_id, a.loc_y, a.loc_x) != std::tie(b.stream_id, b.frame_id, b.loc_y, b.loc_x)) {
      return std::tie(a.stream_id, a.frame_id, a.loc_y, a.loc_x) < std::tie(b.stream_id, b.frame_id, b.loc_y, b.loc_x);
    }
    return a.importance > b.importance;
  });
  // Duplicate coordinates keep their highest importance.
  mbs.erase(std::unique(mbs.begin(), mbs.end(),
                        [](const MBIndex& a, const MBIndex& b) {
                          return a.stream_id == b.stream_id && a.frame_id == b.frame_id && a.loc_x == b.loc_x &&
                                 a.loc_y == b.loc_y;
                        }),
            mbs.end());

  std::vector<Region> regions;
  std::size_t begin = 0;
  while (begin < mbs.size()) {
    std::size_t end = begin;
    while (end < mbs.size() && mbs[end].stream_id == mbs[begin].stream_id &&
           mbs[end].frame_id == mbs[begin].frame_id) {
      ++end;
    }
    std::unordered_map<long long, std::size_t> cell;
    cell.reserve((end - begin) * 2);
    auto key = [](int x, int y) { return (static_cast<long long>(y) << 32) ^ static_cast<unsigned>(x); };
    for (std::size_t i = begin; i < end; ++i) cell.emplace(key(mbs[i].loc_x, mbs[i].loc_y), i);

    std::vector<char> seen(end - begin, 0);
    std::vector<std::size_t> stack;
    // Raster order of the sorted group means each region is discovered from
    // its first MB, which is also the region ordering key.
    for (std::size_t i = begin; i < end; ++i) {
      if (seen[i - begin]) continue;
      Region region{mbs[i].stream_id, mbs[i].frame_id, {}};
      seen[i - begin] = 1;
      stack.push_back(i);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        region.members.push_back(mbs[p]);
        const int x = mbs[p].loc_x, y = mbs[p].loc_y;
        for (auto [dx, dy] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
          const auto it = cell.find(key(x + dx, y + dy));
          if (it != cell.end() && !seen[it->second - begin]) {
            seen[it->second - begin] = 1;
            stack.push_back(it->second);
          }
        }
      }
      std::sort(region.members.begin(), region.members.end(),
                [](const MBIndex& a, const MBIndex& b) { return std::tie(a.loc_y, a.loc_x) < std::tie(b.loc_y, b.loc_x); });
      regions.push_back(std::move(region));
    }
    begin = end;
  }
  return regions;
}

std::vector<BoxItem> bound_regions(const std::vector<Region>& regions, int mb_size, int expand, int frame_w,
                                   int frame_h) {
  if (mb_size <= 0) throw std::invalid_argument("mb_size must be positive");
  if (expand < 0) throw std::invalid_argument("expand must be >= 0");
  if (frame_w <= 0 || frame_h <= 0) throw std::invalid_argument("frame dimensions must be positive");
  std::vector<BoxItem> boxes;
  boxes.reserve(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& region = regions[r];
    if (region.members.empty()) continue;
    int x0 = region.members.front().loc_x, x1 = x0, y0 = region.members.front().loc_y, y1 = y0;
    for (const auto& mb : region.members) {
      x0 = std::min(x0, mb.loc_x);
      x1 = std::max(x1, mb.loc_x);
      y0 = std::min(y0, mb.loc_y);
      y1 = std::max(y1, mb.loc_y);
    }
    const int px0 = std::max(0, x0 * mb_size - expand);
    const int py0 = std::max(0, y0 * mb_size - expand);
    const int px1 = std::min(frame_w, (x1 + 1) * mb_size + expand);
    const int py1 = std::min(frame_h, (y1 + 1) * mb_size + expand);
    if (px1 <= px0 || py1 <= py0) continue;  // region entirely outside the frame

    BoxItem box;
    box.stream_id = region.stream_id;
    box.frame_id = region.frame_id;
    box.region_id = static_cast<int>(r);
    box.src = {px0, py0, px1 - px0, py1 - py0};
    box.mb_size = mb_size;
    box.members = region.members;
    recompute_weights(box);
    boxes.push_back(std::move(box));
  }
  return boxes;
}

std::vector<BoxItem> partition_boxes(const std::vector<BoxItem>& boxes, int limit) {
  if (limit <= 0) throw std::invalid_argument("partition limit must be positive");
  std::vector<BoxItem> out;
  std::vector<BoxItem> work;
  for (const auto& original : boxes) {
    work.assign(1, original);
    int piece = 0;
    while (!work.empty()) {
      BoxItem box = std::move(work.back());
      work.pop_back();
      if (box.src.w <= limit && box.src.h <= limit) {
        box.piece = piece++;
        out.push_back(std::move(box));
        continue;
      }
      const bool along_x = box.src.w >= box.src.h;
      const int side = along_x ? box.src.w : box.src.h;
      const int parts = (side + limit - 1) / limit;
      const int base = side / parts;
      const int extra = side % parts;
      std::vector<BoxItem> pieces;
      int offset = 0;
      for (int i = 0; i < parts; ++i) {
        const int len = base + (i < extra ? 1 : 0);
        BoxItem p;
        p.stream_id = box.stream_id;
        p.frame_id = box.frame_id;
        p.region_id = box.region_id;
        p.mb_size = box.mb_size;
        p.src = along_x ? Rect{box.src.x + offset, box.src.y, len, box.src.h}
                        : Rect{box.src.x, box.src.y + offset, box.src.w, len};
        for (const auto& mb : box.members) {
          if (intersection_area(mb_rect(mb, box.mb_size), p.src) > 0) p.members.push_back(mb);
        }
        recompute_weights(p);
        pieces.push_back(std::move(p));
        offset += len;
      }
      // Push in reverse so pieces come out in spatial order.
      for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) work.push_back(std::move(*it));
    }
  }
  return out;
}

std::vector<FreeArea> inner_free(const FreeArea& farea, const Rect& placed) {
  const Rect& f = farea.rect;
  if (placed.x != f.x || placed.y != f.y || placed.w <= 0 || placed.h <= 0 || placed.w > f.w || placed.h > f.h) {
    throw std::invalid_argument("placed rectangle does not fit the free area's top-left corner");
  }
  const int rw = f.w - placed.w;
  const int bh = f.h - placed.h;
  const long long v_max = std::max(static_cast<long long>(rw) * f.h, static_cast<long long>(placed.w) * bh);
  const long long h_max = std::max(static_cast<long long>(f.w) * bh, static_cast<long long>(rw) * placed.h);
  const bool vertical = v_max != h_max ? v_max > h_max : f.w <= f.h;

  std::vector<FreeArea> out;
  auto emit = [&](Rect r) {
    if (r.w > 0 && r.h > 0) out.push_back({farea.bin, r});
  };
  if (vertical) {
    emit({f.x + placed.w, f.y, rw, f.h});
    emit({f.x, f.y + placed.h, placed.w, bh});
  } else {
    emit({f.x, f.y + placed.h, f.w, bh});
    emit({f.x + placed.w, f.y, rw, placed.h});
  }
  return out;
}

std::vector<BoxItem> order_boxes(std::vector<BoxItem> boxes, Policy policy) {
  if (policy == Policy::max_area_first) {
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const BoxItem& a, const BoxItem& b) { return a.src.area() > b.src.area(); });
  } else {
    std::stable_sort(boxes.begin(), boxes.end(), [](const BoxItem& a, const BoxItem& b) { return a.density > b.density; });
  }
  return boxes;
}

namespace {

void check_free_areas(const std::vector<FreeArea>& free, const std::vector<Placement>& placed, const BinSpec& bins) {
  const Rect bounds{0, 0, bins.width, bins.height};
  for (std::size_t i = 0; i < free.size(); ++i) {
    if (!contains(bounds, free[i].rect)) throw std::logic_error("free area escapes its bin");
    for (std::size_t j = i + 1; j < free.size(); ++j) {
      if (free[i].bin == free[j].bin && overlaps(free[i].rect, free[j].rect)) {
        throw std::logic_error("free areas overlap");
      }
    }
    for (const auto& p : placed) {
      if (p.bin == free[i].bin && overlaps(p.footprint(), free[i].rect)) {
        throw std::logic_error("free area overlaps a placement");
      }
    }
  }
}

}  // namespace

PackingPlan pack(const std::vector<BoxItem>& boxes, const BinSpec& bins, Policy policy, const PackOptions& options) {
  if (bins.count <= 0 || bins.width <= 0 || bins.height <= 0) throw std::invalid_argument("bins must be nonempty");
  PackingPlan plan;
  plan.bins = bins;
  std::vector<FreeArea> free;
  for (int b = 0; b < bins.count; ++b) free.push_back({b, {0, 0, bins.width, bins.height}});

  for (auto& box : order_boxes(boxes, policy)) {
    bool done = false;
    for (std::size_t i = 0; i < free.size() && !done; ++i) {
      const Rect f = free[i].rect;
      bool rotated = false;
      if (f.w >= box.w() && f.h >= box.h()) {
        rotated = false;
      } else if (f.w >= box.h() && f.h >= box.w()) {
        rotated = true;
      } else {
        continue;
      }
      Placement p{std::move(box), free[i].bin, f.x, f.y, rotated};
      auto remainders = inner_free(free[i], p.footprint());
      free.erase(free.begin() + static_cast<std::ptrdiff_t>(i));
      free.insert(free.end(), remainders.begin(), remainders.end());
      plan.placements.push_back(std::move(p));
      done = true;
    }
    if (!done) plan.unplaced.push_back(std::move(box));
    if (options.check_invariants) check_free_areas(free, plan.placements, bins);
  }
  plan.occupy_ratio = occupy_ratio(plan);
  return plan;
}

double occupy_ratio(const PackingPlan& plan) {
  const long long total = plan.bins.total_area();
  if (total <= 0) return 0.0;
  long long px = 0;
  for (const auto& p : plan.placements) px += p.box.mb_pixels();
  return static_cast<double>(px) / static_cast<double>(total);
}

std::vector<BoxItem> make_boxes(const std::vector<MBIndex>& selected, Policy policy, const BoxParams& params,
                                const BinSpec& bins) {
  std::vector<Region> regions;
  if (policy == Policy::block) {
    for (const auto& region : region_props(selected)) {
      for (const auto& mb : region.members) regions.push_back({mb.stream_id, mb.frame_id, {mb}});
    }
  } else {
    regions = region_props(selected);
  }
  const int limit = params.partition_limit > 0 ? params.partition_limit : std::min(bins.height, bins.width);
  return partition_boxes(bound_regions(regions, params.mb_size, params.expand, params.frame_w, params.frame_h), limit);
}

PackingPlan plan_packing(const std::vector<MBIndex>& queue, const BinSpec& bins, Policy policy,
                         const BoxParams& params) {
  const auto selected = select_top_n(queue, bins.height, bins.width, bins.count, params.mb_size);
  return pack(make_boxes(selected, policy, params, bins), bins, policy);
}

std::vector<MBIndex> queue_from_map(const importance::ImportanceMap& map, int stream_id, int frame_id) {
  std::vector<MBIndex> out;
  for (int y = 0; y < map.geometry.grid_h; ++y) {
    for (int x = 0; x < map.geometry.grid_w; ++x) {
      const double s = map.at(x, y);
      if (s > 0.0) out.push_back({stream_id, frame_id, x, y, s});
    }
  }
  return out;
}

PackWorkload synth_workload(std::uint64_t seed, int streams, int frames, double sparsity_lo, double sparsity_hi) {
  if (streams <= 0 || frames <= 0) throw std::invalid_argument("workload needs at least one stream and frame");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sparsity(sparsity_lo, sparsity_hi);
  PackWorkload w;
  w.params = BoxParams{16, 3, 640, 360, 32};
  w.bins = BinSpec{4, 256, 256};
  const auto geom = importance::MBGeometry::for_frame(w.params.frame_w, w.params.frame_h, w.params.mb_size);
  for (int s = 0; s < streams; ++s) {
    const double sp = sparsity(rng);
    const int hotspots = 3 + static_cast<int>(rng() % 4);
    std::vector<importance::ImportanceMap> maps;
    for (int f = 0; f < frames; ++f) maps.push_back(importance::synth_importance(rng(), geom, sp, hotspots));
    w.streams.push_back(std::move(maps));
  }
  return w;
}

std::vector<MBIndex> trial_queue(const PackWorkload& workload, int trial, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  const int n = static_cast<int>(workload.streams.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<MBIndex> queue;
  for (int slot = 0; slot < n; ++slot) {
    const auto& frames = workload.streams[order[slot]];
    const int f = static_cast<int>(rng() % frames.size());
    auto q = queue_from_map(frames[f], slot, f);
    queue.insert(queue.end(), q.begin(), q.end());
  }
  return queue;
}

namespace {

constexpr Policy kBenchPolicies[] = {Policy::importance_density, Policy::max_area_first, Policy::block};

std::array<double, 3> run_trial(const PackWorkload& workload, int trial, std::uint64_t seed) {
  const auto queue = trial_queue(workload, trial, seed);
  const auto selected =
      select_top_n(queue, workload.bins.height, workload.bins.width, workload.bins.count, workload.params.mb_size);
  std::array<double, 3> out{};
  for (int p = 0; p < 3; ++p) {
    out[p] = pack(make_boxes(selected, kBenchPolicies[p], workload.params, workload.bins), workload.bins,
                  kBenchPolicies[p])
                 .occupy_ratio;
  }
  return out;
}

double nearest_rank(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

BenchmarkResult reduce(const std::vector<std::array<double, 3>>& per_trial) {
  BenchmarkResult result;
  for (int p = 0; p < 3; ++p) {
    PolicyStats stats;
    stats.policy = kBenchPolicies[p];
    for (const auto& t : per_trial) stats.samples.push_back(t[p]);
    double sum = 0.0;
    for (double s : stats.samples) sum += s;
    stats.mean = sum / static_cast<double>(stats.samples.size());
    stats.p90 = nearest_rank(stats.samples, 0.90);
    stats.p95 = nearest_rank(stats.samples, 0.95);
    result.policies.push_back(std::move(stats));
  }
  return result;
}

}  // namespace

BenchmarkResult shuffle_benchmark(const PackWorkload& workload, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<std::array<double, 3>> per_trial(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) per_trial[t] = run_trial(workload, t, seed);
  return reduce(per_trial);
}

BenchmarkResult shuffle_benchmark_serial(const PackWorkload& workload, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<std::array<double, 3>> per_trial;
  for (int t = 0; t < trials; ++t) per_trial.push_back(run_trial(workload, t, seed));
  return reduce(per_trial);
}

AdversarialInstance adversarial_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AdversarialInstance inst;
  const int mb = 16;
  const int ring = 4 + static_cast<int>(rng() % 2);  // ring side in MBs
  const int smalls = 2 + static_cast<int>(rng() % 3);
  const int bin_side = ring * mb + 2 * 3 + 2;
  inst.bins = BinSpec{1, bin_side, bin_side};
  inst.params = BoxParams{mb, 3, 640, 360, 0};

  const int frame = static_cast<int>(rng() % 100);
  std::vector<MBIndex> small;
  double small_total = 0.0;
  // Isolated single MBs along row 1, two MBs apart, right of the ring.
  for (int i = 0; i < smalls; ++i) {
    const double imp = 0.8 + 0.2 * unit(rng);
    small.push_back({0, frame, ring + 3 + 2 * i, 1, imp});
    small_total += imp;
  }
  std::vector<MBIndex> large;
  const int ox = 1, oy = 2;
  for (int y = 0; y < ring; ++y) {
    for (int x = 0; x < ring; ++x) {
      if (x == 0 || y == 0 || x == ring - 1 || y == ring - 1) large.push_back({0, frame, ox + x, oy + y, 0.0});
    }
  }
  // Large region total stays below 90% of the small ones.
  const double budget = 0.9 * small_total / static_cast<double>(large.size());
  for (auto& m : large) m.importance = budget * (0.3 + 0.7 * unit(rng));
  inst.mbs = large;
  inst.mbs.insert(inst.mbs.end(), small.begin(), small.end());
  return inst;
}

}  // namespace regionpack::packing
