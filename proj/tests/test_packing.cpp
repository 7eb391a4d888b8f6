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

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "regionpack/grid_io.hpp"
#include "regionpack/packing.hpp"

using namespace regionpack;
using namespace regionpack::packing;

namespace {

BoxItem plain_box(int w, int h, double density = 1.0) {
  BoxItem b;
  b.src = {0, 0, w, h};
  b.density = density;
  b.total_importance = density;
  b.member_count = 1;
  return b;
}

std::vector<oracle::PlacedRect> footprints(const PackingPlan& plan) {
  std::vector<oracle::PlacedRect> out;
  for (const auto& p : plan.placements) {
    const Rect r = p.footprint();
    out.push_back({p.bin, r.x, r.y, r.w, r.h});
  }
  return out;
}

std::vector<BoxItem> random_boxes(std::mt19937_64& rng, int n, int max_side) {
  std::vector<BoxItem> boxes;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    auto b = plain_box(1 + static_cast<int>(rng() % max_side), 1 + static_cast<int>(rng() % max_side), u(rng));
    b.region_id = i;
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace

TEST_CASE("selection capacity") {
  CHECK(selection_capacity(1024, 1024, 1, 16) == 4096);
  CHECK(selection_capacity(256, 256, 4, 16) == 1024);
  CHECK(selection_capacity(20, 20, 1, 16) == 1);
  CHECK_THROWS_AS(selection_capacity(0, 10, 1, 16), std::invalid_argument);
}

TEST_CASE("top-N selection matches a full sort") {
  std::mt19937_64 rng(4);
  std::vector<MBIndex> q;
  for (int i = 0; i < 5000; ++i) {
    // Coarse importance values force many ties.
    q.push_back({static_cast<int>(rng() % 6), static_cast<int>(rng() % 4), static_cast<int>(rng() % 40),
                 static_cast<int>(rng() % 23), static_cast<double>(rng() % 50)});
  }
  auto sorted = q;
  std::sort(sorted.begin(), sorted.end(), [](const MBIndex& a, const MBIndex& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    if (a.stream_id != b.stream_id) return a.stream_id < b.stream_id;
    if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
    if (a.loc_y != b.loc_y) return a.loc_y < b.loc_y;
    return a.loc_x < b.loc_x;
  });
  const auto top = select_top_n(q, 256, 256, 4, 16);
  REQUIRE(top.size() == 1024);
  for (std::size_t i = 0; i < top.size(); ++i) {
    CHECK(top[i].importance == sorted[i].importance);
    CHECK(top[i].loc_x == sorted[i].loc_x);
  }
  CHECK(select_top_n({}, 256, 256, 1, 16).empty());
}

TEST_CASE("region_props groups 4-connected MBs per frame") {
  const std::vector<MBIndex> sel{{0, 0, 0, 0, 1}, {0, 0, 1, 0, 2}, {0, 0, 2, 1, 3},
                                 {0, 1, 0, 0, 4}, {1, 0, 1, 0, 5}, {0, 0, 1, 0, 9}};
  const auto regions = region_props(sel);
  REQUIRE(regions.size() == 4);
  CHECK(regions[0].members.size() == 2);
  CHECK(regions[0].members[1].importance == 9);  // duplicate keeps the higher score
  CHECK(regions[1].members.size() == 1);          // diagonal neighbour is separate
  CHECK(regions[2].frame_id == 1);
  CHECK(regions[3].stream_id == 1);
}

TEST_CASE("region_props agrees with flood fill on a synthetic map") {
  const auto map = importance::synth_importance(12, importance::MBGeometry::for_grid(120, 68), 0.2, 6);
  std::vector<MBIndex> sel;
  std::set<std::pair<int, int>> cells;
  for (const auto& mb : queue_from_map(map, 0, 0)) {
    if (mb.importance > 0.5) {
      sel.push_back(mb);
      cells.insert({mb.loc_x, mb.loc_y});
    }
  }
  std::set<std::set<std::pair<int, int>>> got;
  for (const auto& r : region_props(sel)) {
    std::set<std::pair<int, int>> c;
    for (const auto& m : r.members) c.insert({m.loc_x, m.loc_y});
    got.insert(c);
  }
  CHECK(got == oracle::components(cells));
}

TEST_CASE("bounding boxes expand and clip to the frame") {
  const std::vector<Region> regions{{0, 0, {{0, 0, 0, 0, 1.0}}},
                                    {0, 0, {{0, 0, 2, 2, 1.0}}},
                                    {0, 0, {{0, 0, 0, 0, 1.0}, {0, 0, 1, 0, 3.0}}},
                                    {0, 0, {{0, 0, 39, 22, 1.0}}}};
  const auto boxes = bound_regions(regions, 16, 3, 640, 360);
  REQUIRE(boxes.size() == 4);
  CHECK(boxes[0].src == Rect{0, 0, 19, 19});
  CHECK(boxes[1].src == Rect{29, 29, 22, 22});
  CHECK(boxes[2].src == Rect{0, 0, 35, 19});
  CHECK(boxes[2].density == doctest::Approx(2.0));
  CHECK(boxes[3].src == Rect{621, 349, 19, 11});
  CHECK(boxes[2].mb_pixels() == 512);
  CHECK_THROWS_AS(bound_regions(regions, 16, -1, 640, 360), std::invalid_argument);
}

TEST_CASE("partition splits the longer side into near-equal pieces") {
  auto wide = plain_box(300, 10);
  auto parts = partition_boxes({wide}, 256);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].src == Rect{0, 0, 150, 10});
  CHECK(parts[1].src == Rect{150, 0, 150, 10});

  auto tall = plain_box(10, 520);
  parts = partition_boxes({tall}, 256);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].src.h == 174);
  CHECK(parts[1].src.h == 173);
  CHECK(parts[2].src == Rect{0, 347, 10, 173});
  CHECK(parts[2].piece == 2);

  auto big = plain_box(600, 500);
  long long area = 0;
  for (const auto& p : partition_boxes({big}, 256)) {
    CHECK(p.src.w <= 256);
    CHECK(p.src.h <= 256);
    area += p.src.area();
  }
  CHECK(area == 300000);
  CHECK(partition_boxes({plain_box(40, 40)}, 256).size() == 1);
}

TEST_CASE("partition pieces keep member weights by MB centre") {
  Region r{0, 0, {}};
  for (int x = 0; x < 6; ++x) r.members.push_back({0, 0, x, 0, static_cast<double>(x + 1)});
  const auto boxes = bound_regions({r}, 16, 0, 640, 360);
  const auto parts = partition_boxes(boxes, 48);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].member_count == 3);
  CHECK(parts[0].total_importance == doctest::Approx(6.0));
  CHECK(parts[1].density == doctest::Approx(5.0));
}

TEST_CASE("inner_free keeps the larger maximal remainder") {
  auto v = inner_free({0, {0, 0, 100, 50}}, {0, 0, 30, 20});
  REQUIRE(v.size() == 2);
  CHECK(v[0].rect == Rect{30, 0, 70, 50});
  CHECK(v[1].rect == Rect{0, 20, 30, 30});

  auto h = inner_free({1, {0, 0, 50, 100}}, {0, 0, 20, 30});
  REQUIRE(h.size() == 2);
  CHECK(h[0].rect == Rect{0, 30, 50, 70});
  CHECK(h[1].rect == Rect{20, 0, 30, 30});
  CHECK(h[0].bin == 1);

  auto tie = inner_free({0, {0, 0, 10, 10}}, {0, 0, 5, 5});
  CHECK(tie[0].rect == Rect{5, 0, 5, 10});

  CHECK(inner_free({0, {4, 4, 10, 10}}, {4, 4, 10, 10}).empty());
  CHECK_THROWS_AS(inner_free({0, {0, 0, 10, 10}}, {0, 0, 11, 5}), std::invalid_argument);
}

TEST_CASE("small packing examples") {
  const BinSpec bin{1, 16, 16};
  auto plan = pack({plain_box(10, 10)}, bin, Policy::importance_density);
  REQUIRE(plan.placements.size() == 1);
  CHECK(plan.placements[0].footprint() == Rect{0, 0, 10, 10});

  plan = pack({plain_box(12, 20)}, bin, Policy::importance_density);
  CHECK(plan.placements.empty());
  CHECK(plan.unplaced.size() == 1);

  plan = pack({plain_box(20, 10)}, BinSpec{1, 24, 12}, Policy::max_area_first);
  REQUIRE(plan.placements.size() == 1);
  CHECK(plan.placements[0].rotated);
  CHECK(plan.placements[0].footprint() == Rect{0, 0, 10, 20});

  CHECK_THROWS_AS(pack({}, BinSpec{0, 16, 16}, Policy::block), std::invalid_argument);
}

TEST_CASE("occupy ratio counts MB pixels only") {
  Region r{0, 0, {{0, 0, 0, 0, 1}, {0, 0, 1, 0, 1}, {0, 0, 0, 1, 1}, {0, 0, 1, 1, 1}}};
  const auto boxes = bound_regions({r}, 16, 0, 640, 360);
  const auto plan = pack(boxes, BinSpec{1, 64, 64}, Policy::importance_density);
  CHECK(plan.occupy_ratio == doctest::Approx(0.25));

  Region l{0, 0, {{0, 0, 0, 0, 1}, {0, 0, 1, 0, 1}, {0, 0, 0, 1, 1}}};
  const auto lp = pack(bound_regions({l}, 16, 0, 640, 360), BinSpec{1, 64, 64}, Policy::importance_density);
  CHECK(lp.occupy_ratio == doctest::Approx(768.0 / 4096.0));
}

TEST_CASE("density ordering beats area ordering on a sparse ring") {
  const auto inst = adversarial_instance(0);
  const auto sel = select_top_n(inst.mbs, inst.bins.height, inst.bins.width, inst.bins.count, 16);
  const auto dense = pack(make_boxes(sel, Policy::importance_density, inst.params, inst.bins), inst.bins,
                          Policy::importance_density);
  const auto area =
      pack(make_boxes(sel, Policy::max_area_first, inst.params, inst.bins), inst.bins, Policy::max_area_first);
  CHECK(dense.packed_importance() > area.packed_importance());
  CHECK(adversarial_instance(5).mbs == adversarial_instance(5).mbs);
}

TEST_CASE("random packings are valid and account for every box") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 300; ++t) {
    const BinSpec bins{1 + static_cast<int>(rng() % 8), 32 + static_cast<int>(rng() % 200),
                       32 + static_cast<int>(rng() % 200)};
    const auto boxes = random_boxes(rng, 1 + static_cast<int>(rng() % 120), 90);
    for (Policy policy : {Policy::importance_density, Policy::max_area_first, Policy::block}) {
      const auto plan = pack(boxes, bins, policy, PackOptions{true});
      std::string why;
      CHECK_MESSAGE(oracle::valid_layout(footprints(plan), bins.width, bins.height, bins.count, &why), why);
      CHECK(plan.placements.size() + plan.unplaced.size() == boxes.size());
      std::set<int> ids;
      for (const auto& p : plan.placements) ids.insert(p.box.region_id);
      for (const auto& b : plan.unplaced) ids.insert(b.region_id);
      CHECK(ids.size() == boxes.size());
    }
  }
}

TEST_CASE("policy ordering is stable on ties") {
  std::vector<BoxItem> boxes{plain_box(4, 4, 1.0), plain_box(8, 2, 1.0), plain_box(2, 2, 3.0)};
  for (int i = 0; i < 3; ++i) boxes[i].region_id = i;
  const auto by_density = order_boxes(boxes, Policy::importance_density);
  CHECK(by_density[0].region_id == 2);
  CHECK(by_density[1].region_id == 0);
  const auto by_area = order_boxes(boxes, Policy::max_area_first);
  CHECK(by_area[0].region_id == 0);
  CHECK(by_area[2].region_id == 2);
}

TEST_CASE("shuffle benchmark is deterministic and matches its serial reference") {
  const auto w = synth_workload(3, 6, 4);
  const auto a = shuffle_benchmark(w, 16, 9);
  const auto b = shuffle_benchmark_serial(w, 16, 9);
  const auto c = shuffle_benchmark(w, 16, 9);
  for (int p = 0; p < 3; ++p) {
    CHECK(a.policies[p].samples == b.policies[p].samples);
    CHECK(a.policies[p].samples == c.policies[p].samples);
    CHECK(a.policies[p].mean == b.policies[p].mean);
    CHECK(a.policies[p].p90 >= a.policies[p].mean - 1.0);
  }

  const auto one = shuffle_benchmark(w, 1, 9);
  const auto direct = plan_packing(trial_queue(w, 0, 9), w.bins, Policy::importance_density, w.params);
  CHECK(one.policies[0].samples[0] == direct.occupy_ratio);
  CHECK_THROWS_AS(shuffle_benchmark(w, 0, 1), std::invalid_argument);
}

TEST_CASE("MB csv round trip and diagnostics") {
  const std::vector<MBIndex> mbs{{0, 1, 2, 3, 0.5}, {1, 0, 4, 5, 12.25}};
  CHECK(parse_mb_csv(format_mb_csv(mbs)) == mbs);
  auto line_of = [](const std::string& text) {
    try {
      parse_mb_csv(text, "x.csv");
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  const std::string header = "stream_id,frame_id,loc_x,loc_y,importance\n";
  CHECK(line_of("a,b\n") == 1);
  CHECK(line_of(header + "0,0,1,1,2\n0,0,1\n") == 3);
  CHECK(line_of(header + "0,0,x,1,2\n") == 2);
  CHECK(line_of(header + "0,0,1,1,-2\n") == 2);
  CHECK(line_of(header + "0,0,-1,1,2\n") == 2);
  CHECK(parse_mb_csv(header).empty());
}
