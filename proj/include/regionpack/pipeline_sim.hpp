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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "regionpack/planner.hpp"

namespace regionpack::sim {

enum class SimPolicy { region_based, per_frame, selective_anchor, only_infer };

const char* to_string(SimPolicy p);
SimPolicy sim_policy_from_string(const std::string& name);

/// Enhancement wall time as a function of input pixels: a constant floor up
/// to `saturation_px`, linear above it. Zero pixels cost nothing.
struct LatencyModel {
  double floor_ms = 20.0;
  double saturation_px = 300000.0;
  double slope_ms_per_mp = 60.0;

  double latency_ms(double pixels) const;
  /// Floor at the smaller profile point, slope through both.
  static LatencyModel from_profile(double px_a, double ms_a, double px_b, double ms_b);
};

/// Batch -> wall time table. Lookups between entries interpolate linearly
/// through (0, 0); beyond the largest entry the last segment is extended.
struct CostTable {
  std::map<int, double> ms;

  double at(double items) const;
};

struct StreamSpec {
  int stream_id = 0;
  double fps = 30.0;
  int chunk_len = 30;
  double sparsity = 0.25;  // fraction of MBs in hot blobs
  int hotspots = 4;
  /// Optional importance grids cycled per frame instead of synthetic maps.
  std::vector<std::string> importance_files;
};

struct Scenario {
  std::uint64_t seed = 42;
  double duration_s = 60.0;
  SimPolicy policy = SimPolicy::region_based;
  int frame_w = 640;
  int frame_h = 360;
  int mb_size = 16;
  std::vector<StreamSpec> streams;

  LatencyModel enhance;
  int bin_w = 256;
  int bin_h = 256;
  int partition_limit = 32;  // pixels; 0 -> min(bin_w, bin_h)
  double anchor_fraction = 0.4;
  double reuse_ms = 4.0;         // per non-anchor frame under selective_anchor
  double eregion_threshold = 0.5;  // fraction of the predicted map's maximum
  double jitter = 0.3;           // per-frame multiplicative noise on importance

  CostTable decode;
  CostTable predict;
  CostTable pack;
  CostTable infer;

  /// Temporal selection of frames needing prediction (region_based only).
  bool selective_prediction = true;
  double prediction_fraction = 0.3;

  int plan_budget = 400;
  std::vector<int> plan_batches{1, 2, 4, 8};
  /// "dp", "unplanned", or "fixed" (batches taken from fixed_batches).
  std::string plan_mode = "dp";
  std::map<std::string, int> fixed_batches;
};

/// Defaults matching the bundled desk-scale calibration.
Scenario default_scenario(int streams = 6);

/// Raised for malformed scenarios and plan/policy mismatches.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario_text(const std::string& text);
nlohmann::json to_json(const Scenario& s);

/// Stage names in pipeline order for a policy.
std::vector<std::string> stages_for(SimPolicy policy);

/// Chain dataflow whose per-batch costs (in ms, one unit per ms) come from
/// profiling the scenario's stages under `policy`.
planner::Dataflow profile_dataflow(const Scenario& scenario, SimPolicy policy);

/// Every stage at batch 1.
planner::ExecutionPlan unplanned(const Scenario& scenario, SimPolicy policy);
/// dp_plan over profile_dataflow with the scenario budget.
planner::ExecutionPlan planned(const Scenario& scenario, SimPolicy policy);
/// The plan selected by scenario.plan_mode.
planner::ExecutionPlan plan_for(const Scenario& scenario, SimPolicy policy);

struct StageStats {
  std::string name;
  int batch = 1;
  long long batches = 0;
  double busy_ms = 0.0;
  double max_batch_wait_ms = 0.0;  // dispatch minus max(ready, server idle)
  double batch_wait_bound_ms = 0.0;  // (batch - 1) * frame period
};

struct FrameRecord {
  int stream_id = 0;
  int frame_id = 0;
  double arrival_ms = 0.0;
  double done_ms = 0.0;
  double batch_wait_ms = 0.0;  // summed over stages

  double latency_ms() const { return done_ms - arrival_ms; }
};

struct SimReport {
  SimPolicy policy = SimPolicy::region_based;
  std::string label;
  long long frames_in = 0;
  long long frames_out = 0;
  double makespan_s = 0.0;
  double throughput_fps = 0.0;
  int sustainable_streams = 0;  // floor(throughput / per-stream fps)
  std::vector<FrameRecord> frames;
  std::vector<double> chunk_latency_ms;
  double occupy_ratio = 0.0;  // mean over enhancement batches (region_based)
  std::map<int, double> accuracy_proxy;  // importance-coverage proxy per stream
  std::vector<StageStats> stages;

  double mean_latency_ms() const;
  double mean_accuracy_proxy() const;
};

/// Runs the discrete-event simulation. Throws ScenarioError when the plan
/// lacks a stage the policy needs.
SimReport simulate(const planner::ExecutionPlan& plan, const Scenario& scenario, SimPolicy policy);

struct ComparisonRow {
  std::string label;
  SimReport report;
  double throughput_ratio = 1.0;  // vs the first row
  double throughput_delta = 0.0;
  double proxy_delta = 0.0;
};

/// One planned simulation per policy, deltas relative to the first.
std::vector<ComparisonRow> compare_policies(const Scenario& scenario, const std::vector<SimPolicy>& policies);

/// per_frame unplanned, +planning, +packing (region_based, every frame
/// predicted), full (region_based with temporal selection).
std::vector<ComparisonRow> ablation_ladder(const Scenario& scenario);

struct LatencyHistogramRow {
  int batch = 1;
  double bucket_ms = 10.0;
  std::vector<long long> counts;  // bucket i covers [i, i+1) * bucket_ms
  double mean_latency_ms = 0.0;
  double mean_delta_ms = 0.0;  // vs the batch-1 run, per frame
  double max_batch_wait_ms = 0.0;  // worst single-stage wait
  double bound_ms = 0.0;           // (batch - 1) * frame period
};

/// Simulates `policy` with every stage forced to each batch size.
std::vector<LatencyHistogramRow> frame_latency_histogram(const Scenario& scenario, SimPolicy policy,
                                                         const std::vector<int>& batch_sizes,
                                                         double bucket_ms = 10.0);

nlohmann::json to_json(const SimReport& r, bool include_frames = false);
nlohmann::json to_json(const std::vector<ComparisonRow>& rows);
nlohmann::json to_json(const std::vector<LatencyHistogramRow>& rows);
/// stream_id,frame_id,arrival_ms,done_ms,latency_ms,batch_wait_ms
std::string latency_csv(const SimReport& r);

}  // namespace regionpack::sim
