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

#include <map>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace regionpack::planner {

/// Profiled cost of one node on one device.
struct DeviceProfile {
  std::string device = "gpu";
  std::map<int, double> cost;     // batch -> resource units per batch
  std::map<int, double> latency;  // batch -> wall time (ms), optional
};

struct Node {
  std::string id;
  std::vector<DeviceProfile> profiles;
};

/// Validated out-tree of components: one source, in-degree <= 1.
struct Dataflow {
  std::vector<Node> nodes;                      // topological order, source first
  std::vector<std::pair<int, int>> edges;       // indices into nodes
  std::map<std::string, int> budgets;           // per-device resource units

  int index_of(const std::string& id) const;  // -1 if absent
  std::vector<int> children(int node) const;
  std::vector<int> sinks() const;
  /// Every source-to-sink path as node indices.
  std::vector<std::vector<int>> paths() const;
};

/// Raised for malformed or unsupported dataflow configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON layout:
//   {"nodes": [{"id": "infer", "device": "gpu", "cost": {"1": 2, "4": 5},
//               "latency": {"1": 10, "4": 25}}, ...],
//    "edges": [["decode", "infer"], ...],
//    "budget": 100 | {"gpu": 100, "cpu": 100}}
// A node may instead carry "profiles": [{"device", "cost", "latency"}, ...]
// to offer several devices.
Dataflow parse_dag(const nlohmann::json& config);
Dataflow parse_dag_text(const std::string& text);

struct NodeAssignment {
  std::string node_id;
  std::string device;
  int resource = 0;  // integer units, >= ceil(cost)
  int batch = 0;
  double throughput = 0.0;  // batch / cost
};

struct ExecutionPlan {
  std::vector<NodeAssignment> nodes;  // same order as Dataflow::nodes
  double e2e_throughput = 0.0;

  int total_resource() const;
  int resource_on(const std::string& device) const;
  const NodeAssignment* find(const std::string& node_id) const;
};

/// Either a plan or the reason no plan exists.
struct PlanResult {
  std::optional<ExecutionPlan> plan;
  std::string blocking_node;
  std::string reason;

  bool feasible() const { return plan.has_value(); }
};

/// Resource units a cost occupies.
int units_for(double cost);

// Dynamic program over the tree: T_u(r) = max over r' <= r of
// min(best node throughput within r', combined children within r - r').
// Sibling subtrees split the remaining budget and combine by min. With a
// latency target every sink is first pinned to its cheapest batch meeting the
// target. Among optimal plans the least total resource wins, then smaller
// batches, then earlier devices.
PlanResult dp_plan(const Dataflow& dag, std::optional<double> latency_target_ms = std::nullopt);
/// Same as dp_plan but overriding every device budget with `budget`.
PlanResult dp_plan(const Dataflow& dag, int budget, std::optional<double> latency_target_ms = std::nullopt);
/// A bare double would silently bind to the int budget; pass std::optional.
PlanResult dp_plan(const Dataflow& dag, double) = delete;

/// Exhaustive oracle for dp_plan. Throws std::invalid_argument beyond
/// 6 nodes, 12 units per device, 6 batch entries per profile or 2 devices.
PlanResult brute_force_plan(const Dataflow& dag, std::optional<double> latency_target_ms = std::nullopt);
PlanResult brute_force_plan(const Dataflow& dag, int budget,
                            std::optional<double> latency_target_ms = std::nullopt);
PlanResult brute_force_plan(const Dataflow& dag, double) = delete;

struct NodeBalance {
  std::string node_id;
  double throughput = 0.0;
  double slack = 0.0;  // throughput - e2e
};

struct ImprovingShift {
  std::string from;
  std::string to;
  double new_e2e = 0.0;
};

struct BalanceReport {
  std::vector<NodeBalance> nodes;
  std::string bottleneck;
  double e2e_throughput = 0.0;
  std::optional<ImprovingShift> improving_shift;

  bool balanced() const { return !improving_shift.has_value(); }
};

/// Node throughputs, bottleneck and slack of a plan, plus the first single
/// unit transfer between two same-device nodes that would raise the minimum
/// node throughput (if any). Node throughput is re-derived from the plan's
/// resource: the best batch whose cost fits.
BalanceReport verify_balance(const Dataflow& dag, const ExecutionPlan& plan);

nlohmann::json to_json(const ExecutionPlan& plan);
nlohmann::json to_json(const BalanceReport& report);
nlohmann::json to_json(const Dataflow& dag);

}  // namespace regionpack::planner
