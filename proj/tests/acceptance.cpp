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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "regionpack/importance.hpp"
#include "regionpack/packing.hpp"
#include "regionpack/pipeline_sim.hpp"
#include "regionpack/planner.hpp"
#include "regionpack/temporal.hpp"

#ifndef REGIONPACK_SCENARIO_DIR
#define REGIONPACK_SCENARIO_DIR "scenarios"
#endif

using namespace regionpack;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1 ---------------------------------------------------------------------------
Outcome packing_validity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int bad = 0;
  std::string first_error;
  const packing::Policy policies[] = {packing::Policy::importance_density, packing::Policy::max_area_first,
                                      packing::Policy::block};
  for (int inst = 0; inst < 10000; ++inst) {
    const packing::BinSpec bins{1 + static_cast<int>(rng() % 8), 16 + static_cast<int>(rng() % 241),
                                16 + static_cast<int>(rng() % 241)};
    const int n = 1 + static_cast<int>(rng() % 200);
    std::vector<packing::BoxItem> boxes(n);
    for (int i = 0; i < n; ++i) {
      boxes[i].region_id = i;
      boxes[i].src = {0, 0, 1 + static_cast<int>(rng() % 120), 1 + static_cast<int>(rng() % 120)};
      boxes[i].density = unit(rng);
    }
    const auto policy = policies[inst % 3];
    const auto plan = packing::pack(boxes, bins, policy);
    std::vector<oracle::PlacedRect> rects;
    std::vector<int> seen(n, 0);
    for (const auto& p : plan.placements) {
      const auto r = p.footprint();
      rects.push_back({p.bin, r.x, r.y, r.w, r.h});
      ++seen[p.box.region_id];
    }
    for (const auto& b : plan.unplaced) ++seen[b.region_id];
    std::string why;
    bool ok = oracle::valid_layout(rects, bins.width, bins.height, bins.count, &why);
    for (int s : seen) ok = ok && s == 1;
    if (!ok) {
      if (bad++ == 0) first_error = "instance " + std::to_string(inst) + ": " + (why.empty() ? "box lost" : why);
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = bad == 0 && secs < 60.0;
  o.detail = fmt("10000 instances, %.0f invalid, %.2f s", bad, secs) + (bad ? " (" + first_error + ")" : "");
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome occupy_ordering() {
  const auto t0 = Clock::now();
  const auto workload = packing::synth_workload(2024);
  const auto r = packing::shuffle_benchmark(workload, 1000, 7);
  const double d = r.policies[0].mean, a = r.policies[1].mean, b = r.policies[2].mean;
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = d >= a && a >= b && d >= 0.65 && secs < 300.0;
  o.detail = fmt("means density %.3f, area %.3f, block %.3f; %.1f s", d, a, b, secs);
  return o;
}

// 3 ---------------------------------------------------------------------------
Outcome ordering_dominance() {
  int strict = 0, lower = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = packing::adversarial_instance(seed);
    auto packed = [&](packing::Policy p) {
      return packing::plan_packing(inst.mbs, inst.bins, p, inst.params).packed_importance();
    };
    const double dens = packed(packing::Policy::importance_density);
    const double area = packed(packing::Policy::max_area_first);
    if (dens > area) ++strict;
    if (dens < area) ++lower;
  }
  Outcome o;
  o.pass = strict >= 95 && lower == 0;
  o.detail = fmt("strictly higher in %.0f/100, lower in %.0f", strict, lower);
  return o;
}

// 4 and 5 ---------------------------------------------------------------------
struct PlannerInstance {
  nlohmann::json config;
  std::vector<oracle::Node> nodes;
  std::vector<int> parent;
};

PlannerInstance planner_instance(std::mt19937_64& rng, int nodes, int entries, int budget) {
  static const int batches[] = {1, 2, 4, 8};
  PlannerInstance inst;
  inst.config["nodes"] = nlohmann::json::array();
  inst.config["edges"] = nlohmann::json::array();
  inst.config["budget"] = budget;
  for (int i = 0; i < nodes; ++i) {
    nlohmann::json cost = nlohmann::json::object();
    oracle::Node on;
    std::vector<int> pool(batches, batches + 4);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int e = 0; e < entries; ++e) {
      const double c = 0.5 * static_cast<double>(1 + rng() % 10);
      cost[std::to_string(pool[e])] = c;
      on.cost[pool[e]] = c;
    }
    inst.config["nodes"].push_back({{"id", "n" + std::to_string(i)}, {"cost", cost}});
    inst.nodes.push_back(on);
    const int parent = i == 0 ? -1 : static_cast<int>(rng() % i);
    inst.parent.push_back(parent);
    if (parent >= 0) inst.config["edges"].push_back({"n" + std::to_string(parent), "n" + std::to_string(i)});
  }
  return inst;
}

// Best throughput a node reaches within `r` units; 0 when nothing fits.
double node_tput(const oracle::Node& n, int r) {
  double best = 0.0;
  for (const auto& [b, c] : n.cost) {
    if (static_cast<int>(std::ceil(c - 1e-9)) <= r) best = std::max(best, b / c);
  }
  return best;
}

// True when moving one unit between two nodes raises the minimum throughput.
bool has_improving_shift(const std::vector<oracle::Node>& nodes, const planner::ExecutionPlan& plan) {
  const std::size_t n = nodes.size();
  std::vector<int> r(n);
  double base = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = plan.nodes[i].resource;
    base = std::min(base, node_tput(nodes[i], r[i]));
  }
  for (std::size_t from = 0; from < n; ++from) {
    if (r[from] == 0) continue;
    for (std::size_t to = 0; to < n; ++to) {
      if (to == from) continue;
      double e2e = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const int ri = r[i] - (i == from ? 1 : 0) + (i == to ? 1 : 0);
        e2e = std::min(e2e, node_tput(nodes[i], ri));
      }
      if (e2e > base + 1e-12) return true;
    }
  }
  return false;
}

std::vector<std::pair<PlannerInstance, planner::ExecutionPlan>> g_optimal_plans;

Outcome planner_equivalence() {
  std::mt19937_64 rng(4004);
  int instances = 0, mismatch = 0;
  std::string first;
  // Exhaustive grid over shape parameters, four random draws per cell.
  for (int nodes = 1; nodes <= 4; ++nodes) {
    for (int entries = 1; entries <= 4; ++entries) {
      for (int budget = 0; budget <= 8; ++budget) {
        for (int draw = 0; draw < 4; ++draw) {
          auto inst = planner_instance(rng, nodes, entries, budget);
          const auto dag = planner::parse_dag(inst.config);
          const auto dp = planner::dp_plan(dag);
          const auto bf = planner::brute_force_plan(dag);
          const double expected = oracle::plan_optimum(inst.nodes, budget);
          ++instances;
          bool ok = dp.feasible() == bf.feasible() && dp.feasible() == (expected > 0.0);
          if (ok && dp.feasible()) {
            ok = std::fabs(dp.plan->e2e_throughput - bf.plan->e2e_throughput) < 1e-12 &&
                 std::fabs(dp.plan->e2e_throughput - expected) < 1e-12;
            g_optimal_plans.emplace_back(std::move(inst), *dp.plan);
          }
          if (!ok && mismatch++ == 0) {
            first = fmt("nodes %.0f entries %.0f R %.0f", nodes, entries, budget);
          }
        }
      }
    }
  }
  int monotone_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto inst = planner_instance(rng, 1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 4), 0);
    const auto dag = planner::parse_dag(inst.config);
    double prev = 0.0;
    for (int r = 0; r <= 24; ++r) {
      const auto res = planner::dp_plan(dag, r);
      const double e2e = res.feasible() ? res.plan->e2e_throughput : 0.0;
      if (e2e < prev) {
        ++monotone_bad;
        break;
      }
      prev = e2e;
    }
  }
  Outcome o;
  o.pass = instances >= 500 && mismatch == 0 && monotone_bad == 0;
  o.detail = fmt("%.0f exhaustive instances, %.0f mismatches; monotonicity violated in %.0f/1000", instances,
                 mismatch, monotone_bad) +
             (mismatch ? " (first: " + first + ")" : "");
  return o;
}

Outcome planner_balance() {
  int flagged = 0, independent = 0;
  for (const auto& [inst, plan] : g_optimal_plans) {
    const auto dag = planner::parse_dag(inst.config);
    if (!planner::verify_balance(dag, plan).balanced()) ++flagged;
    if (has_improving_shift(inst.nodes, plan)) ++independent;
  }
  Outcome o;
  o.pass = !g_optimal_plans.empty() && flagged == 0 && independent == 0;
  o.detail = fmt("%.0f optimal plans; improving single-unit shift found in %.0f (report) / %.0f (direct check)",
                 static_cast<double>(g_optimal_plans.size()), flagged, independent);
  return o;
}

// 6 ---------------------------------------------------------------------------
Outcome importance_oracle() {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int w = 1 + static_cast<int>(rng() % 80), h = 1 + static_cast<int>(rng() % 60);
    const int mb = 1 + static_cast<int>(rng() % 24);
    std::vector<double> g(static_cast<std::size_t>(w) * h), d(g.size());
    for (auto& v : g) v = u(rng);
    for (auto& v : d) v = u(rng);
    const auto m = importance::compute_mb_importance(importance::PixelField(w, h, g), importance::PixelField(w, h, d),
                                                     importance::MBGeometry::for_frame(w, h, mb));
    if (m.scores != oracle::mb_importance(g, d, w, h, mb)) ++bad;
  }
  Outcome o;
  o.pass = bad == 0;
  o.detail = fmt("1000 random fields, %.0f not bit-exact", bad);
  return o;
}

// 7 ---------------------------------------------------------------------------
Outcome selection_properties() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  int spacing_bad = 0, point_bad = 0, alloc_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    // Uniform mass: equal steps.
    const int n = 2 + static_cast<int>(rng() % 60);  // deltas
    std::vector<double> ramp(n + 1);
    for (int i = 0; i <= n; ++i) ramp[i] = 2.0 * i;
    const int budget = 1 + static_cast<int>(rng() % n);
    const auto sel = temporal::cdf_select(temporal::series_from_values(ramp), budget);
    const double step = static_cast<double>(n) / budget;
    bool ok = static_cast<int>(sel.selected.size()) == budget + 1 || budget == n;
    for (int j = 1; j < static_cast<int>(sel.selected.size()); ++j) {
      if (std::fabs(sel.selected[j] - (j - 0.5) * step) > 1.0 + 1e-9) ok = false;
      if (j > 1 && std::fabs(sel.selected[j] - sel.selected[j - 1] - step) > 1.0 + 1e-9) ok = false;
    }
    if (!ok) ++spacing_bad;

    // Point mass at frame j.
    const int jump = 1 + static_cast<int>(rng() % n);
    std::vector<double> step_series(n + 1, 0.0);
    for (int i = jump; i <= n; ++i) step_series[i] = 1.0 + u(rng) * 0.0 + 4.0;
    const auto ps = temporal::cdf_select(temporal::series_from_values(step_series), 1 + static_cast<int>(rng() % n));
    if (ps.selected != std::vector<int>{0, jump}) ++point_bad;

    // Allocation.
    const int streams = 1 + static_cast<int>(rng() % 8);
    std::map<int, temporal::FeatureSeries> by_stream;
    double total = 0.0;
    for (int s = 0; s < streams; ++s) {
      std::vector<double> v(2 + rng() % 30);
      for (auto& x : v) x = u(rng);
      by_stream[s] = temporal::series_from_values(v, s);
      total += by_stream[s].total_change();
    }
    const int frames = streams + static_cast<int>(rng() % 120);
    const auto alloc = temporal::allocate_frame_budget(by_stream, frames);
    int sum = 0;
    bool fits = true;
    for (const auto& [s, series] : by_stream) fits = fits && frames * series.total_change() / total >= 1.0;
    bool aok = true;
    for (const auto& [s, a] : alloc) {
      sum += a;
      const double quota = frames * by_stream[s].total_change() / total;
      if (a < 1) aok = false;
      if (fits && std::fabs(a - quota) >= 1.0) aok = false;
    }
    if (sum != frames || !aok) ++alloc_bad;
  }
  Outcome o;
  o.pass = spacing_bad == 0 && point_bad == 0 && alloc_bad == 0;
  o.detail = fmt("1000 series; spacing off in %.0f, point-mass off in %.0f, allocation off in %.0f", spacing_bad,
                 point_bad, alloc_bad);
  return o;
}

// 8 ---------------------------------------------------------------------------
Outcome operator_direction() {
  int wins = 0;
  double mean_inv = 0.0, mean_area = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto seq = temporal::synth_blob_sequence(seed);
    const auto target = temporal::mask_change_series(seq.masks);
    auto corr = [&](temporal::Operator op) {
      const auto s = temporal::build_series(seq.residuals, op);
      std::vector<double> mag;
      for (double d : s.deltas) mag.push_back(std::fabs(d));
      return temporal::correlation(mag, target);
    };
    const double ci = corr(temporal::Operator::inv_area), ca = corr(temporal::Operator::area);
    mean_inv += ci / 50.0;
    mean_area += ca / 50.0;
    if (ci > ca) ++wins;
  }
  Outcome o;
  o.pass = wins >= 45;
  o.detail = fmt("inverse-area ahead in %.0f/50 sequences; mean correlation %.3f vs %.3f", wins, mean_inv, mean_area);
  return o;
}

// 9 to 11 ---------------------------------------------------------------------
struct WaitCheck {
  int violations = 0;
  long long frames = 0;
  double worst_ratio = 0.0;

  void add(const sim::SimReport& r) {
    double bound_sum = 0.0;
    for (const auto& st : r.stages) {
      bound_sum += st.batch_wait_bound_ms;
      if (st.max_batch_wait_ms > st.batch_wait_bound_ms + 1e-9) ++violations;
      if (st.batch_wait_bound_ms > 0) worst_ratio = std::max(worst_ratio, st.max_batch_wait_ms / st.batch_wait_bound_ms);
    }
    for (const auto& f : r.frames) {
      ++frames;
      if (f.batch_wait_ms > bound_sum + 1e-9) ++violations;
    }
  }
};

WaitCheck g_waits;
sim::Scenario g_scenario;

Outcome throughput_reproduction() {
  const std::string path = std::string(REGIONPACK_SCENARIO_DIR) + "/six_streams.json";
  std::ifstream in(path);
  if (!in) return {false, "cannot open " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  g_scenario = sim::parse_scenario_text(ss.str());
  const auto t0 = Clock::now();
  const auto rows = sim::compare_policies(
      g_scenario, {sim::SimPolicy::per_frame, sim::SimPolicy::selective_anchor, sim::SimPolicy::region_based});
  const double secs = seconds_since(t0);
  for (const auto& r : rows) g_waits.add(r.report);
  const double pf = rows[0].report.throughput_fps, sa = rows[1].report.throughput_fps,
               rb = rows[2].report.throughput_fps;
  Outcome o;
  o.pass = rb >= 2.0 * pf && rb >= 1.3 * sa && secs < 30.0 && g_scenario.duration_s >= 60.0;
  o.detail = fmt("region %.1f fps = %.2fx per-frame, %.2fx selective; ", rb, rb / pf, rb / sa) +
             fmt("%.1f s wall", secs);
  return o;
}

Outcome ablation_ladder() {
  const auto rows = sim::ablation_ladder(g_scenario);
  for (const auto& r : rows) g_waits.add(r.report);
  std::vector<double> t;
  for (const auto& r : rows) t.push_back(r.report.throughput_fps);
  Outcome o;
  o.pass = t.size() == 4 && t[1] >= t[0] && t[2] > t[1] && t[3] > t[2];
  o.detail = fmt("per_frame %.1f, +planning %.1f, +packing %.1f, full %.1f fps", t[0], t[1], t[2], t[3]);
  return o;
}

Outcome batching_bound() {
  // Uniform batch 4 at 30 fps on top of the runs above.
  auto s = g_scenario;
  s.duration_s = 20.0;
  for (auto policy : {sim::SimPolicy::per_frame, sim::SimPolicy::region_based}) {
    for (int b : {2, 4, 8}) {
      auto plan = sim::unplanned(s, policy);
      for (auto& n : plan.nodes) n.batch = b;
      g_waits.add(sim::simulate(plan, s, policy));
    }
  }
  const auto hist = sim::frame_latency_histogram(s, sim::SimPolicy::per_frame, {4});
  const bool hist_ok = hist[0].max_batch_wait_ms <= 100.0;
  Outcome o;
  o.pass = g_waits.violations == 0 && hist_ok;
  o.detail = fmt("%.0f frames checked, %.0f violations; worst wait %.0f%% of bound; batch-4 max wait %.1f ms",
                 static_cast<double>(g_waits.frames), g_waits.violations, 100.0 * g_waits.worst_ratio,
                 hist[0].max_batch_wait_ms);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "packing validity", packing_validity},
      {2, "occupy-ratio ordering", occupy_ordering},
      {3, "ordering dominance", ordering_dominance},
      {4, "planner oracle equivalence", planner_equivalence},
      {5, "planner balance", planner_balance},
      {6, "importance oracle", importance_oracle},
      {7, "frame-selection properties", selection_properties},
      {8, "operator direction", operator_direction},
      {9, "throughput reproduction", throughput_reproduction},
      {10, "ablation directionality", ablation_ladder},
      {11, "batching latency bound", batching_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
