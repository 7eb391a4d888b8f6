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

#include "regionpack/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace regionpack::planner {

using nlohmann::json;

int Dataflow::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> Dataflow::children(int node) const {
  std::vector<int> out;
  for (const auto& [u, v] : edges) {
    if (u == node) out.push_back(v);
  }
  return out;
}

std::vector<int> Dataflow::sinks() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (children(i).empty()) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<int>> Dataflow::paths() const {
  std::vector<std::vector<int>> out;
  if (nodes.empty()) return out;
  std::vector<int> path;
  std::function<void(int)> walk = [&](int u) {
    path.push_back(u);
    const auto kids = children(u);
    if (kids.empty()) out.push_back(path);
    for (int v : kids) walk(v);
    path.pop_back();
  };
  walk(0);
  return out;
}

int ExecutionPlan::total_resource() const {
  int sum = 0;
  for (const auto& n : nodes) sum += n.resource;
  return sum;
}

int ExecutionPlan::resource_on(const std::string& device) const {
  int sum = 0;
  for (const auto& n : nodes) {
    if (n.device == device) sum += n.resource;
  }
  return sum;
}

const NodeAssignment* ExecutionPlan::find(const std::string& node_id) const {
  for (const auto& n : nodes) {
    if (n.node_id == node_id) return &n;
  }
  return nullptr;
}

int units_for(double cost) { return static_cast<int>(std::ceil(cost - 1e-9)); }

namespace {

std::map<int, double> parse_table(const json& j, const std::string& node, const char* what) {
  if (!j.is_object()) throw ConfigError("node '" + node + "': " + what + " table must be an object");
  std::map<int, double> table;
  for (const auto& [key, value] : j.items()) {
    int batch = 0;
    try {
      std::size_t used = 0;
      batch = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ConfigError("node '" + node + "': batch size '" + key + "' is not an integer");
    }
    if (batch <= 0) throw ConfigError("node '" + node + "': batch sizes must be positive");
    if (!value.is_number()) throw ConfigError("node '" + node + "': " + what + " values must be numbers");
    const double v = value.get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("node '" + node + "': " + what + " values must be positive");
    table[batch] = v;
  }
  return table;
}

DeviceProfile parse_profile(const json& j, const std::string& node) {
  DeviceProfile p;
  if (j.contains("device")) {
    if (!j["device"].is_string()) throw ConfigError("node '" + node + "': device must be a string");
    p.device = j["device"].get<std::string>();
  }
  if (!j.contains("cost")) throw ConfigError("node '" + node + "' has no cost profile");
  p.cost = parse_table(j["cost"], node, "cost");
  if (p.cost.empty()) throw ConfigError("node '" + node + "' has an empty cost profile");
  if (j.contains("latency")) p.latency = parse_table(j["latency"], node, "latency");
  return p;
}

}  // namespace

Dataflow parse_dag(const json& config) {
  if (!config.is_object()) throw ConfigError("dataflow config must be a JSON object");
  if (!config.contains("nodes") || !config["nodes"].is_array() || config["nodes"].empty()) {
    throw ConfigError("dataflow config needs a nonempty 'nodes' array");
  }
  std::vector<Node> declared;
  std::set<std::string> ids;
  for (const auto& jn : config["nodes"]) {
    if (!jn.is_object() || !jn.contains("id") || !jn["id"].is_string()) {
      throw ConfigError("every node needs a string 'id'");
    }
    Node node;
    node.id = jn["id"].get<std::string>();
    if (!ids.insert(node.id).second) throw ConfigError("duplicate node id '" + node.id + "'");
    if (jn.contains("profiles")) {
      if (!jn["profiles"].is_array() || jn["profiles"].empty()) {
        throw ConfigError("node '" + node.id + "': 'profiles' must be a nonempty array");
      }
      for (const auto& jp : jn["profiles"]) node.profiles.push_back(parse_profile(jp, node.id));
    } else {
      node.profiles.push_back(parse_profile(jn, node.id));
    }
    declared.push_back(std::move(node));
  }

  const int n = static_cast<int>(declared.size());
  auto find = [&](const std::string& id) {
    for (int i = 0; i < n; ++i) {
      if (declared[i].id == id) return i;
    }
    return -1;
  };
  std::vector<std::pair<int, int>> edges;
  if (config.contains("edges")) {
    if (!config["edges"].is_array()) throw ConfigError("'edges' must be an array of [from, to] pairs");
    for (const auto& je : config["edges"]) {
      if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string()) {
        throw ConfigError("each edge must be a [from, to] pair of node ids");
      }
      const auto from = je[0].get<std::string>();
      const auto to = je[1].get<std::string>();
      const int u = find(from), v = find(to);
      if (u < 0) throw ConfigError("edge references unknown node '" + from + "'");
      if (v < 0) throw ConfigError("edge references unknown node '" + to + "'");
      if (u == v) throw ConfigError("dataflow is cyclic: self-loop on '" + from + "'");
      edges.emplace_back(u, v);
    }
  }

  // Kahn's algorithm, preferring declaration order among ready nodes.
  std::vector<int> indeg(n, 0);
  for (const auto& [u, v] : edges) ++indeg[v];
  std::vector<int> order;
  std::vector<int> remaining = indeg;
  std::vector<char> done(n, 0);
  while (static_cast<int>(order.size()) < n) {
    int next = -1;
    for (int i = 0; i < n && next < 0; ++i) {
      if (!done[i] && remaining[i] == 0) next = i;
    }
    if (next < 0) throw ConfigError("dataflow is cyclic");
    done[next] = 1;
    order.push_back(next);
    for (const auto& [u, v] : edges) {
      if (u == next) --remaining[v];
    }
  }
  for (int i = 0; i < n; ++i) {
    if (indeg[i] > 1) {
      throw ConfigError("node '" + declared[i].id + "' has several inputs; only trees of components are supported");
    }
  }
  const auto sources = std::count(indeg.begin(), indeg.end(), 0);
  if (sources != 1) throw ConfigError("dataflow must have exactly one source, found " + std::to_string(sources));

  Dataflow dag;
  std::vector<int> position(n);
  for (int i = 0; i < n; ++i) {
    position[order[i]] = i;
    dag.nodes.push_back(declared[order[i]]);
  }
  for (const auto& [u, v] : edges) dag.edges.emplace_back(position[u], position[v]);

  std::set<std::string> devices;
  for (const auto& node : dag.nodes) {
    for (const auto& p : node.profiles) devices.insert(p.device);
  }
  const int default_budget = 100;
  if (!config.contains("budget")) {
    for (const auto& d : devices) dag.budgets[d] = default_budget;
  } else if (config["budget"].is_number_integer()) {
    for (const auto& d : devices) dag.budgets[d] = config["budget"].get<int>();
  } else if (config["budget"].is_object()) {
    for (const auto& [d, v] : config["budget"].items()) {
      if (!v.is_number_integer()) throw ConfigError("budget for device '" + d + "' must be an integer");
      dag.budgets[d] = v.get<int>();
    }
    for (const auto& d : devices) {
      if (!dag.budgets.count(d)) throw ConfigError("no budget given for device '" + d + "'");
    }
  } else {
    throw ConfigError("'budget' must be an integer or an object of per-device integers");
  }
  for (const auto& [d, b] : dag.budgets) {
    if (b < 0) throw ConfigError("budget for device '" + d + "' must be >= 0");
  }
  return dag;
}

Dataflow parse_dag_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_dag(j);
}

namespace {

struct Option {
  int device = 0;  // index into device list
  int profile = 0;
  int batch = 0;
  double cost = 0.0;
  int units = 0;
  double tput = 0.0;
};

// Shared setup for the DP and the brute-force oracle.
struct Problem {
  std::vector<std::string> devices;
  std::vector<int> budgets;
  std::vector<std::vector<Option>> options;  // per node, sorted by (units, batch, device)
  std::string blocking_node;
  std::string reason;
};

bool option_less(const Option& a, const Option& b) {
  return std::tie(a.units, a.batch, a.device) < std::tie(b.units, b.batch, b.device);
}

Problem make_problem(const Dataflow& dag, std::optional<int> budget_override, std::optional<double> latency_target) {
  Problem pb;
  for (const auto& [d, b] : dag.budgets) {
    pb.devices.push_back(d);
    pb.budgets.push_back(budget_override.value_or(b));
  }
  auto device_index = [&](const std::string& d) {
    const auto it = std::find(pb.devices.begin(), pb.devices.end(), d);
    if (it == pb.devices.end()) throw ConfigError("no budget given for device '" + d + "'");
    return static_cast<int>(it - pb.devices.begin());
  };
  const auto sinks = dag.sinks();
  for (int u = 0; u < static_cast<int>(dag.nodes.size()); ++u) {
    std::vector<Option> opts;
    const auto& node = dag.nodes[u];
    for (int p = 0; p < static_cast<int>(node.profiles.size()); ++p) {
      const auto& prof = node.profiles[p];
      const int d = device_index(prof.device);
      for (const auto& [b, c] : prof.cost) opts.push_back({d, p, b, c, units_for(c), b / c});
    }
    std::sort(opts.begin(), opts.end(), option_less);
    if (latency_target && std::find(sinks.begin(), sinks.end(), u) != sinks.end()) {
      std::vector<Option> meeting;
      for (const auto& o : opts) {
        const auto& lat = node.profiles[o.profile].latency;
        const auto it = lat.find(o.batch);
        if (it != lat.end() && it->second <= *latency_target) meeting.push_back(o);
      }
      if (meeting.empty()) {
        if (pb.reason.empty()) {
          pb.blocking_node = node.id;
          pb.reason = "no batch size of '" + node.id + "' meets the latency target";
        }
        opts.clear();
      } else {
        // Least resource meeting the target; ties go to the smaller batch.
        opts.assign(1, meeting.front());
      }
    }
    pb.options.push_back(std::move(opts));
  }
  return pb;
}

void find_blocking(const Dataflow& dag, Problem& pb) {
  if (!pb.reason.empty()) return;
  std::vector<long long> used(pb.devices.size(), 0);
  for (std::size_t u = 0; u < dag.nodes.size(); ++u) {
    const auto& opts = pb.options[u];
    const auto& cheapest = *std::min_element(opts.begin(), opts.end(), option_less);
    used[cheapest.device] += cheapest.units;
    if (used[cheapest.device] > pb.budgets[cheapest.device]) {
      pb.blocking_node = dag.nodes[u].id;
      pb.reason = "budget of " + std::to_string(pb.budgets[cheapest.device]) + " units on '" +
                  pb.devices[cheapest.device] + "' is exhausted at node '" + dag.nodes[u].id + "'";
      return;
    }
  }
  pb.blocking_node = dag.nodes.back().id;
  pb.reason = "no allocation gives every node a feasible batch";
}

// Mixed-radix indexing of per-device budget vectors.
struct StateSpace {
  std::vector<int> limits;
  std::vector<long long> stride;
  long long size = 1;

  explicit StateSpace(const std::vector<int>& budgets) : limits(budgets) {
    for (int b : budgets) {
      stride.push_back(size);
      size *= static_cast<long long>(b) + 1;
    }
  }
  int coord(long long s, std::size_t d) const { return static_cast<int>((s / stride[d]) % (limits[d] + 1)); }
};

ExecutionPlan assemble(const Dataflow& dag, const Problem& pb, const std::vector<const Option*>& chosen) {
  ExecutionPlan plan;
  plan.e2e_throughput = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < chosen.size(); ++u) {
    const Option& o = *chosen[u];
    plan.nodes.push_back({dag.nodes[u].id, pb.devices[o.device], o.units, o.batch, o.tput});
    plan.e2e_throughput = std::min(plan.e2e_throughput, o.tput);
  }
  return plan;
}

// Least total resource among assignments with every node at throughput >=
// target, then lexicographically smaller batches, then devices.
std::optional<ExecutionPlan> tighten(const Dataflow& dag, const Problem& pb, double target) {
  const StateSpace space(pb.budgets);
  const std::size_t n = dag.nodes.size();
  using Prefix = std::vector<const Option*>;
  auto better = [](const Prefix& a, const Prefix& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i]->batch != b[i]->batch) return a[i]->batch < b[i]->batch;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i]->device != b[i]->device) return a[i]->device < b[i]->device;
    }
    return false;
  };
  std::vector<std::optional<Prefix>> cur(static_cast<std::size_t>(space.size));
  cur[0] = Prefix{};
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<std::optional<Prefix>> next(static_cast<std::size_t>(space.size));
    for (long long s = 0; s < space.size; ++s) {
      if (!cur[s]) continue;
      for (const auto& o : pb.options[u]) {
        if (o.tput < target) continue;
        if (space.coord(s, o.device) + o.units > pb.budgets[o.device]) continue;
        const long long t = s + o.units * space.stride[o.device];
        Prefix cand = *cur[s];
        cand.push_back(&o);
        if (!next[t] || better(cand, *next[t])) next[t] = std::move(cand);
      }
    }
    cur = std::move(next);
  }
  std::optional<Prefix> best;
  long long best_total = 0;
  for (long long s = 0; s < space.size; ++s) {
    if (!cur[s]) continue;
    long long total = 0;
    for (std::size_t d = 0; d < pb.budgets.size(); ++d) total += space.coord(s, d);
    if (!best || total < best_total || (total == best_total && better(*cur[s], *best))) {
      best = cur[s];
      best_total = total;
    }
  }
  if (!best) return std::nullopt;
  return assemble(dag, pb, *best);
}

PlanResult finish(const Dataflow& dag, Problem& pb, double best) {
  PlanResult result;
  if (!(best > 0.0)) {
    find_blocking(dag, pb);
    result.blocking_node = pb.blocking_node;
    result.reason = pb.reason;
    return result;
  }
  result.plan = tighten(dag, pb, best);
  if (!result.plan) throw std::logic_error("planner: optimum could not be reconstructed");
  return result;
}

constexpr long long kMaxStates = 4'000'000;

PlanResult dp_impl(const Dataflow& dag, std::optional<int> budget, std::optional<double> latency_target) {
  if (dag.nodes.empty()) throw ConfigError("empty dataflow");
  Problem pb = make_problem(dag, budget, latency_target);
  for (int b : pb.budgets) {
    if (b < 0) throw std::invalid_argument("budget must be >= 0");
  }
  if (!pb.reason.empty()) return finish(dag, pb, 0.0);
  const StateSpace space(pb.budgets);
  if (space.size > kMaxStates) throw std::invalid_argument("planner state space too large; use coarser units");
  const auto S = static_cast<std::size_t>(space.size);
  const double inf = std::numeric_limits<double>::infinity();

  // Enumerate every state t <= s componentwise.
  auto for_each_sub = [&](long long s, auto&& fn) {
    std::vector<int> c(pb.budgets.size(), 0);
    const std::size_t D = c.size();
    while (true) {
      long long t = 0;
      for (std::size_t d = 0; d < D; ++d) t += c[d] * space.stride[d];
      fn(t);
      std::size_t d = 0;
      for (; d < D; ++d) {
        if (c[d] < space.coord(s, d)) {
          ++c[d];
          break;
        }
        c[d] = 0;
      }
      if (d == D) break;
    }
  };

  const int n = static_cast<int>(dag.nodes.size());
  std::vector<std::vector<double>> table(n);
  for (int u = n - 1; u >= 0; --u) {
    // Children first (topological order puts them after u).
    std::vector<double> combined(S, inf);
    for (int v : dag.children(u)) {
      std::vector<double> next(S, 0.0);
      for (long long s = 0; s < space.size; ++s) {
        double best = 0.0;
        for_each_sub(s, [&](long long t) { best = std::max(best, std::min(combined[t], table[v][s - t])); });
        next[s] = best;
      }
      combined = std::move(next);
    }
    auto& tu = table[u];
    tu.assign(S, 0.0);
    for (long long s = 0; s < space.size; ++s) {
      double best = 0.0;
      for (const auto& o : pb.options[u]) {
        if (o.units > space.coord(s, o.device)) continue;
        best = std::max(best, std::min(o.tput, combined[s - o.units * space.stride[o.device]]));
      }
      tu[s] = best;
    }
  }
  return finish(dag, pb, table[0][S - 1]);
}

struct BruteLimits {
  std::size_t nodes = 6;
  int units = 12;
  std::size_t entries = 6;
  std::size_t devices = 2;
};

PlanResult brute_impl(const Dataflow& dag, std::optional<int> budget, std::optional<double> latency_target) {
  if (dag.nodes.empty()) throw ConfigError("empty dataflow");
  const BruteLimits lim;
  Problem pb = make_problem(dag, budget, latency_target);
  if (dag.nodes.size() > lim.nodes || pb.devices.size() > lim.devices) {
    throw std::invalid_argument("instance too large for brute_force_plan");
  }
  for (int b : pb.budgets) {
    if (b < 0 || b > lim.units) throw std::invalid_argument("budget outside brute_force_plan guard");
  }
  for (const auto& node : dag.nodes) {
    for (const auto& p : node.profiles) {
      if (p.cost.size() > lim.entries) throw std::invalid_argument("profile too large for brute_force_plan");
    }
  }
  if (!pb.reason.empty()) return finish(dag, pb, 0.0);

  // Every node picks (device, batch) and a resource r >= units on that
  // device; keep the best (e2e desc, total resource asc, batches, devices).
  const std::size_t n = dag.nodes.size();
  std::vector<int> used(pb.devices.size(), 0);
  std::vector<const Option*> pick(n, nullptr);
  std::vector<int> res(n, 0);
  double best_e2e = 0.0;
  int best_total = 0;
  std::vector<const Option*> best_pick;

  auto key_less = [&](const std::vector<const Option*>& a, const std::vector<const Option*>& b) {
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i]->batch != b[i]->batch) return a[i]->batch < b[i]->batch;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i]->device != b[i]->device) return a[i]->device < b[i]->device;
    }
    return false;
  };

  std::function<void(std::size_t, double, int)> rec = [&](std::size_t u, double e2e, int total) {
    if (u == n) {
      const bool take = best_pick.empty() || e2e > best_e2e ||
                        (e2e == best_e2e && (total < best_total || (total == best_total && key_less(pick, best_pick))));
      if (take) {
        best_e2e = e2e;
        best_total = total;
        best_pick = pick;
      }
      return;
    }
    for (const auto& o : pb.options[u]) {
      for (int r = o.units; used[o.device] + r <= pb.budgets[o.device]; ++r) {
        used[o.device] += r;
        pick[u] = &o;
        res[u] = r;
        rec(u + 1, std::min(e2e, o.tput), total + r);
        used[o.device] -= r;
      }
    }
  };
  rec(0, std::numeric_limits<double>::infinity(), 0);

  PlanResult result;
  if (best_pick.empty()) return finish(dag, pb, 0.0);
  result.plan = assemble(dag, pb, best_pick);
  return result;
}

}  // namespace

PlanResult dp_plan(const Dataflow& dag, std::optional<double> latency_target_ms) {
  return dp_impl(dag, std::nullopt, latency_target_ms);
}

PlanResult dp_plan(const Dataflow& dag, int budget, std::optional<double> latency_target_ms) {
  return dp_impl(dag, budget, latency_target_ms);
}

PlanResult brute_force_plan(const Dataflow& dag, std::optional<double> latency_target_ms) {
  return brute_impl(dag, std::nullopt, latency_target_ms);
}

PlanResult brute_force_plan(const Dataflow& dag, int budget, std::optional<double> latency_target_ms) {
  return brute_impl(dag, budget, latency_target_ms);
}

BalanceReport verify_balance(const Dataflow& dag, const ExecutionPlan& plan) {
  if (plan.nodes.size() != dag.nodes.size()) throw std::invalid_argument("plan does not match the dataflow");
  const std::size_t n = dag.nodes.size();
  std::vector<int> node_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int u = dag.index_of(plan.nodes[i].node_id);
    if (u < 0) throw std::invalid_argument("plan names unknown node '" + plan.nodes[i].node_id + "'");
    node_of[i] = u;
  }
  auto node_tput = [&](std::size_t i, int resource) {
    double best = 0.0;
    for (const auto& prof : dag.nodes[node_of[i]].profiles) {
      if (prof.device != plan.nodes[i].device) continue;
      for (const auto& [b, c] : prof.cost) {
        if (units_for(c) <= resource) best = std::max(best, b / c);
      }
    }
    return best;
  };

  BalanceReport report;
  std::vector<double> tput(n);
  report.e2e_throughput = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    tput[i] = node_tput(i, plan.nodes[i].resource);
    if (tput[i] < report.e2e_throughput) {
      report.e2e_throughput = tput[i];
      report.bottleneck = plan.nodes[i].node_id;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    report.nodes.push_back({plan.nodes[i].node_id, tput[i], tput[i] - report.e2e_throughput});
  }
  for (std::size_t from = 0; from < n && !report.improving_shift; ++from) {
    if (plan.nodes[from].resource < 1) continue;
    for (std::size_t to = 0; to < n && !report.improving_shift; ++to) {
      if (to == from || plan.nodes[to].device != plan.nodes[from].device) continue;
      double shifted = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        const int r = plan.nodes[k].resource + (k == from ? -1 : 0) + (k == to ? 1 : 0);
        shifted = std::min(shifted, k == from || k == to ? node_tput(k, r) : tput[k]);
      }
      if (shifted > report.e2e_throughput) {
        report.improving_shift = ImprovingShift{plan.nodes[from].node_id, plan.nodes[to].node_id, shifted};
      }
    }
  }
  return report;
}

json to_json(const ExecutionPlan& plan) {
  json nodes = json::array();
  for (const auto& n : plan.nodes) {
    nodes.push_back({{"id", n.node_id},
                     {"device", n.device},
                     {"resource", n.resource},
                     {"batch", n.batch},
                     {"throughput", n.throughput}});
  }
  return {{"e2e_throughput", plan.e2e_throughput}, {"total_resource", plan.total_resource()}, {"nodes", nodes}};
}

json to_json(const BalanceReport& report) {
  json nodes = json::array();
  for (const auto& n : report.nodes) {
    nodes.push_back({{"id", n.node_id}, {"throughput", n.throughput}, {"slack", n.slack}});
  }
  json j = {{"e2e_throughput", report.e2e_throughput},
            {"bottleneck", report.bottleneck},
            {"balanced", report.balanced()},
            {"nodes", nodes}};
  if (report.improving_shift) {
    j["improving_shift"] = {{"from", report.improving_shift->from},
                            {"to", report.improving_shift->to},
                            {"new_e2e", report.improving_shift->new_e2e}};
  }
  return j;
}

json to_json(const Dataflow& dag) {
  json nodes = json::array();
  for (const auto& n : dag.nodes) {
    json profiles = json::array();
    for (const auto& p : n.profiles) {
      json cost = json::object(), lat = json::object();
      for (const auto& [b, c] : p.cost) cost[std::to_string(b)] = c;
      for (const auto& [b, l] : p.latency) lat[std::to_string(b)] = l;
      json jp = {{"device", p.device}, {"cost", cost}};
      if (!p.latency.empty()) jp["latency"] = lat;
      profiles.push_back(jp);
    }
    nodes.push_back({{"id", n.id}, {"profiles", profiles}});
  }
  json edges = json::array();
  for (const auto& [u, v] : dag.edges) edges.push_back({dag.nodes[u].id, dag.nodes[v].id});
  json budget = json::object();
  for (const auto& [d, b] : dag.budgets) budget[d] = b;
  return {{"nodes", nodes}, {"edges", edges}, {"budget", budget}};
}

}  // namespace regionpack::planner
