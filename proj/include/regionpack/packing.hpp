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
#include <string>
#include <vector>

#include "regionpack/importance.hpp"

namespace regionpack::packing {

/// One macroblock in the cross-stream queue.
struct MBIndex {
  int stream_id = 0;
  int frame_id = 0;
  int loc_x = 0;
  int loc_y = 0;
  double importance = 0.0;

  bool operator==(const MBIndex&) const = default;
};

/// Importance descending, then (stream, frame, loc_y, loc_x) ascending.
bool queue_order(const MBIndex& a, const MBIndex& b);

/// A 4-connected group of selected MBs in one frame; members in row-major order.
struct Region {
  int stream_id = 0;
  int frame_id = 0;
  std::vector<MBIndex> members;
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool operator==(const Rect&) const = default;
};

bool overlaps(const Rect& a, const Rect& b);
bool contains(const Rect& outer, const Rect& inner);
long long intersection_area(const Rect& a, const Rect& b);

/// Pixel rectangle in a source frame to be stitched into a bin.
struct BoxItem {
  int stream_id = 0;
  int frame_id = 0;
  int region_id = 0;   // index into the region_props output
  int piece = 0;       // partition index within the region's box
  Rect src;            // pixel rectangle in the source frame
  int mb_size = 16;
  std::vector<MBIndex> members;  // region MBs overlapping `src`
  double total_importance = 0.0;
  int member_count = 0;          // MBs whose centre lies in `src`
  double density = 0.0;

  int w() const { return src.w; }
  int h() const { return src.h; }
  /// Selected-MB pixels inside `src`.
  long long mb_pixels() const;
};

struct FreeArea {
  int bin = 0;
  Rect rect;
};

enum class Policy { importance_density, max_area_first, block };

const char* to_string(Policy p);
Policy policy_from_string(const std::string& name);

struct BinSpec {
  int count = 1;
  int height = 0;
  int width = 0;

  long long total_area() const { return static_cast<long long>(count) * height * width; }
};

struct Placement {
  BoxItem box;
  int bin = 0;
  int x = 0;
  int y = 0;
  bool rotated = false;

  /// Footprint inside the bin (w/h swapped when rotated).
  Rect footprint() const;
};

struct PackingPlan {
  BinSpec bins;
  std::vector<Placement> placements;
  std::vector<BoxItem> unplaced;
  double occupy_ratio = 0.0;

  double packed_importance() const;
};

/// Largest N with mb_size^2 * N <= H * W * B.
long long selection_capacity(int bin_h, int bin_w, int bins, int mb_size);

std::vector<MBIndex> select_top_n(std::vector<MBIndex> queue, int bin_h, int bin_w, int bins, int mb_size);

std::vector<Region> region_props(const std::vector<MBIndex>& selected);

std::vector<BoxItem> bound_regions(const std::vector<Region>& regions, int mb_size, int expand,
                                   int frame_w, int frame_h);

/// Splits boxes whose longer side exceeds `limit` into ceil(side/limit)
/// near-equal pieces along that side; repeats until every side fits.
std::vector<BoxItem> partition_boxes(const std::vector<BoxItem>& boxes, int limit);

/// Right and bottom remainders of `farea` after placing a w×h rectangle at its
/// top-left corner. Throws when the rectangle does not fit.
std::vector<FreeArea> inner_free(const FreeArea& farea, const Rect& placed);

/// Orders boxes as the policy requires (stable on ties).
std::vector<BoxItem> order_boxes(std::vector<BoxItem> boxes, Policy policy);

struct PackOptions {
  /// Re-check free-area invariants after every placement (slow).
  bool check_invariants = false;
};

/// First-fit over free areas in creation order. `boxes` is the ready-made box
/// list; for Policy::block it is expected to hold one box per MB (see
/// make_boxes).
PackingPlan pack(const std::vector<BoxItem>& boxes, const BinSpec& bins, Policy policy,
                 const PackOptions& options = {});

double occupy_ratio(const PackingPlan& plan);

/// Frame and expansion parameters shared by the selection-to-boxes pipeline.
struct BoxParams {
  int mb_size = 16;
  int expand = 3;
  int frame_w = 640;
  int frame_h = 360;
  int partition_limit = 0;  // 0 -> min(bin H, bin W)
};

/// Regions -> bounded boxes -> partitioned boxes; for Policy::block every MB
/// becomes its own expanded box.
std::vector<BoxItem> make_boxes(const std::vector<MBIndex>& selected, Policy policy,
                                const BoxParams& params, const BinSpec& bins);

/// select_top_n + make_boxes + pack.
PackingPlan plan_packing(const std::vector<MBIndex>& queue, const BinSpec& bins, Policy policy,
                         const BoxParams& params);

// MB list CSV: header "stream_id,frame_id,loc_x,loc_y,importance", then one
// row per MB. Diagnostics carry 1-based line numbers.
std::vector<MBIndex> parse_mb_csv(const std::string& text, const std::string& source = "<memory>");
std::string format_mb_csv(const std::vector<MBIndex>& mbs);

/// Queue entries for every MB of a map with positive importance.
std::vector<MBIndex> queue_from_map(const importance::ImportanceMap& map, int stream_id, int frame_id);

/// Multi-stream input for the shuffle benchmark.
struct PackWorkload {
  std::vector<std::vector<importance::ImportanceMap>> streams;  // [stream][frame]
  BinSpec bins;
  BoxParams params;
};

// Six streams of `frames` frames each at 640x360, sparsity drawn per stream in
// [sparsity_lo, sparsity_hi].
PackWorkload synth_workload(std::uint64_t seed, int streams = 6, int frames = 8,
                            double sparsity_lo = 0.10, double sparsity_hi = 0.25);

struct PolicyStats {
  Policy policy = Policy::importance_density;
  double mean = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  std::vector<double> samples;  // one per trial, in trial order
};

struct BenchmarkResult {
  std::vector<PolicyStats> policies;  // importance_density, max_area_first, block
};

/// Runs `trials` shuffled trials: each trial draws a frame per stream and a
/// stream order, then packs under every policy. Trials run in parallel and
/// are reduced in trial order.
BenchmarkResult shuffle_benchmark(const PackWorkload& workload, int trials, std::uint64_t seed);
BenchmarkResult shuffle_benchmark_serial(const PackWorkload& workload, int trials, std::uint64_t seed);

/// The MB queue a given trial packs (exposed for tests).
std::vector<MBIndex> trial_queue(const PackWorkload& workload, int trial, std::uint64_t seed);

// A large sparse region competing with small dense
// ones for a bin that holds only part of the content.
struct AdversarialInstance {
  std::vector<MBIndex> mbs;
  BinSpec bins;
  BoxParams params;
};
AdversarialInstance adversarial_instance(std::uint64_t seed);

}  // namespace regionpack::packing
