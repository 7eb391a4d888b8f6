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
#include "regionpack/planner.hpp"

using namespace regionpack::planner;
using nlohmann::json;

namespace {

const char* kChain = R"({
  "nodes": [{"id": "A", "cost": {"1": 1, "4": 2}},
            {"id": "B", "cost": {"1": 1, "2": 1}, "latency": {"1": 5, "2": 8}}],
  "edges": [["A", "B"]],
  "budget": 3
})";

struct RandomDag {
  json config;
  std::vector<oracle::Node> oracle_nodes;
};

// Random single-device chain or tree with integer-ish costs.
RandomDag random_dag(std::mt19937_64& rng, int max_nodes, int max_entries, int budget) {
  RandomDag out;
  const int n = 1 + static_cast<int>(rng() % max_nodes);
  out.config["nodes"] = json::array();
  out.config["edges"] = json::array();
  out.config["budget"] = budget;
  for (int i = 0; i < n; ++i) {
    json cost = json::object();
    oracle::Node on;
    const int entries = 1 + static_cast<int>(rng() % max_entries);
    for (int e = 0; e < entries; ++e) {
      const int b = 1 << (rng() % 4);
      const double c = 0.5 * static_cast<double>(1 + rng() % 8);
      cost[std::to_string(b)] = c;
      on.cost[b] = c;
    }
    out.config["nodes"].push_back({{"id", "n" + std::to_string(i)}, {"cost", cost}});
    out.oracle_nodes.push_back(on);
    if (i > 0) {
      const int parent = static_cast<int>(rng() % i);
      out.config["edges"].push_back({"n" + std::to_string(parent), "n" + std::to_string(i)});
    }
  }
  return out;
}

void check_feasible(const Dataflow& dag, const ExecutionPlan& plan, int budget) {
  CHECK(plan.total_resource() <= budget);
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    const auto& a = plan.nodes[i];
    const Node& node = dag.nodes[i];
    CHECK(a.node_id == node.id);
    bool found = false;
    for (const auto& p : node.profiles) {
      if (p.device == a.device && p.cost.count(a.batch)) {
        found = true;
        CHECK(units_for(p.cost.at(a.batch)) <= a.resource);
      }
    }
    CHECK(found);
  }
}

}  // namespace

TEST_CASE("parse a four-node chain") {
  const auto dag = parse_dag_text(R"({"nodes": [
      {"id": "decode", "cost": {"1": 1}}, {"id": "predict", "cost": {"1": 1}},
      {"id": "enhance", "cost": {"1": 1}}, {"id": "infer", "cost": {"1": 1}}],
    "edges": [["decode", "predict"], ["predict", "enhance"], ["enhance", "infer"]]})");
  CHECK(dag.nodes.size() == 4);
  CHECK(dag.edges.size() == 3);
  CHECK(dag.sinks() == std::vector<int>{3});
  CHECK(dag.budgets.at("gpu") == 100);
}

TEST_CASE("invalid dataflows are rejected") {
  const auto rejects = [](const std::string& text, const std::string& needle) {
    try {
      parse_dag_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(rejects(R"({"nodes": [{"id": "a", "cost": {"1": 1}}, {"id": "b", "cost": {"1": 1}}],
                  "edges": [["a", "b"], ["b", "a"]]})",
                "cyclic"));
  CHECK(rejects(R"({"nodes": [{"id": "a", "cost": {"1": 1}}], "edges": [["a", "x"]]})", "unknown node 'x'"));
  CHECK(rejects(R"({"nodes": [{"id": "a"}], "edges": []})", "no cost profile"));
  CHECK(rejects(R"({"nodes": [{"id": "a", "cost": {"1": 1}}, {"id": "a", "cost": {"1": 1}}], "edges": []})",
                "duplicate"));
  CHECK(rejects(R"({"nodes": [{"id": "a", "cost": {"1": -1}}], "edges": []})", "a"));
  CHECK(rejects(R"({"nodes": [{"id": "a", "cost": {"1": 1}}, {"id": "b", "cost": {"1": 1}}], "edges": []})",
                "source"));
}

TEST_CASE("a tree with two sinks is accepted and exposes both paths") {
  const auto dag = parse_dag_text(R"({"nodes": [
      {"id": "p", "cost": {"1": 1}}, {"id": "x", "cost": {"1": 1}}, {"id": "y", "cost": {"1": 2}}],
    "edges": [["p", "x"], ["p", "y"]], "budget": 4})");
  CHECK(dag.sinks().size() == 2);
  CHECK(dag.paths().size() == 2);
  const auto r = dp_plan(dag);
  REQUIRE(r.feasible());
  CHECK(r.plan->e2e_throughput == doctest::Approx(0.5));
}

TEST_CASE("single node picks the larger batch") {
  const auto dag = parse_dag_text(R"({"nodes": [{"id": "a", "cost": {"1": 1, "4": 2}}], "edges": [], "budget": 2})");
  const auto r = dp_plan(dag);
  REQUIRE(r.feasible());
  CHECK(r.plan->nodes[0].batch == 4);
  CHECK(r.plan->nodes[0].resource == 2);
  CHECK(r.plan->e2e_throughput == doctest::Approx(2.0));

  const auto one = parse_dag_text(R"({"nodes": [{"id": "a", "cost": {"1": 1}}], "edges": [], "budget": 1})");
  CHECK(brute_force_plan(one).plan->e2e_throughput == doctest::Approx(1.0));
  const auto report = verify_balance(one, *dp_plan(one).plan);
  CHECK(report.bottleneck == "a");
  CHECK(report.nodes[0].slack == doctest::Approx(0.0));
}

TEST_CASE("chain example balances both nodes at 2.0") {
  const auto dag = parse_dag_text(kChain);
  const auto r = dp_plan(dag);
  REQUIRE(r.feasible());
  const auto& p = *r.plan;
  CHECK(p.find("A")->batch == 4);
  CHECK(p.find("A")->resource == 2);
  CHECK(p.find("B")->batch == 2);
  CHECK(p.find("B")->resource == 1);
  CHECK(p.e2e_throughput == doctest::Approx(2.0));

  const auto brute = brute_force_plan(dag);
  REQUIRE(brute.feasible());
  CHECK(to_json(*brute.plan) == to_json(p));

  const auto report = verify_balance(dag, p);
  CHECK(report.balanced());
  for (const auto& n : report.nodes) {
    CHECK(n.throughput == doctest::Approx(2.0));
    CHECK(n.slack == doctest::Approx(0.0));
  }
}

TEST_CASE("budget below need is infeasible with a blocking node") {
  const auto dag = parse_dag_text(kChain);
  const auto zero = brute_force_plan(dag, 0);
  CHECK_FALSE(zero.feasible());
  CHECK_FALSE(zero.blocking_node.empty());
  const auto one = dp_plan(dag, 1);
  CHECK_FALSE(one.feasible());
  CHECK(one.blocking_node == "B");
}

TEST_CASE("a skewed plan is flagged") {
  const auto dag = parse_dag_text(kChain);
  ExecutionPlan skewed = *dp_plan(dag).plan;
  skewed.nodes[0].resource = 3;
  skewed.nodes[1].resource = 0;
  skewed.e2e_throughput = 0.0;
  const auto report = verify_balance(dag, skewed);
  CHECK_FALSE(report.balanced());
  CHECK(report.bottleneck == "B");
  CHECK(report.improving_shift->from == "A");
  CHECK(report.improving_shift->to == "B");
}

TEST_CASE("latency target pins the sink") {
  const auto dag = parse_dag_text(kChain);
  const auto r = dp_plan(dag, std::optional<double>(6.0));
  REQUIRE(r.feasible());
  CHECK(r.plan->find("B")->batch == 1);
  CHECK(r.plan->e2e_throughput == doctest::Approx(1.0));
  CHECK(r.plan->total_resource() == 2);
  CHECK(brute_force_plan(dag, std::optional<double>(6.0)).plan->e2e_throughput == doctest::Approx(1.0));

  // The sink takes the least resource and batch meeting the target, even
  // when the target is loose.
  const auto loose = dp_plan(dag, std::optional<double>(100.0));
  CHECK(loose.plan->find("B")->batch == 1);
  CHECK(loose.plan->e2e_throughput == doctest::Approx(1.0));
  CHECK(dp_plan(dag).plan->e2e_throughput == doctest::Approx(2.0));

  const auto none = dp_plan(dag, std::optional<double>(1.0));
  CHECK_FALSE(none.feasible());
  CHECK(none.blocking_node == "B");
}

TEST_CASE("per-device budgets do not pool") {
  const auto dag = parse_dag_text(R"({"nodes": [
      {"id": "a", "device": "cpu", "cost": {"1": 1, "2": 1.5}},
      {"id": "b", "profiles": [{"device": "cpu", "cost": {"1": 1}}, {"device": "gpu", "cost": {"4": 2}}]}],
    "edges": [["a", "b"]], "budget": {"cpu": 2, "gpu": 2}})");
  const auto r = dp_plan(dag);
  REQUIRE(r.feasible());
  CHECK(r.plan->find("a")->resource == 2);
  CHECK(r.plan->find("b")->device == "gpu");
  CHECK(r.plan->resource_on("cpu") <= 2);
  CHECK(r.plan->e2e_throughput == doctest::Approx(2.0 / 1.5));
  CHECK(brute_force_plan(dag).plan->e2e_throughput == doctest::Approx(r.plan->e2e_throughput));
}

TEST_CASE("brute force refuses oversized instances") {
  json big;
  big["nodes"] = json::array();
  big["edges"] = json::array();
  for (int i = 0; i < 7; ++i) {
    big["nodes"].push_back({{"id", "n" + std::to_string(i)}, {"cost", {{"1", 1}}}});
    if (i) big["edges"].push_back({"n" + std::to_string(i - 1), "n" + std::to_string(i)});
  }
  big["budget"] = 8;
  CHECK_THROWS_AS(brute_force_plan(parse_dag(big)), std::invalid_argument);
}

TEST_CASE("dp matches exhaustive search on random small trees") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 200; ++t) {
    const int budget = static_cast<int>(rng() % 9);
    const auto inst = random_dag(rng, 4, 4, budget);
    const auto dag = parse_dag(inst.config);
    const auto dp = dp_plan(dag);
    const auto bf = brute_force_plan(dag);
    const double expected = oracle::plan_optimum(inst.oracle_nodes, budget);
    CHECK(dp.feasible() == bf.feasible());
    CHECK(dp.feasible() == (expected > 0.0));
    if (!dp.feasible()) continue;
    CHECK(dp.plan->e2e_throughput == doctest::Approx(expected).epsilon(1e-12));
    CHECK(bf.plan->e2e_throughput == doctest::Approx(expected).epsilon(1e-12));
    CHECK(dp.plan->total_resource() == bf.plan->total_resource());
    check_feasible(dag, *dp.plan, budget);
    CHECK(verify_balance(dag, *dp.plan).balanced());
  }
}

TEST_CASE("throughput never drops as the budget grows") {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 100; ++t) {
    const auto inst = random_dag(rng, 5, 4, 0);
    const auto dag = parse_dag(inst.config);
    double prev = 0.0;
    for (int r = 0; r <= 30; ++r) {
      const auto res = dp_plan(dag, r);
      const double e2e = res.feasible() ? res.plan->e2e_throughput : 0.0;
      CHECK(e2e >= prev);
      prev = e2e;
    }
  }
}

TEST_CASE("plan json carries per-node fields") {
  const auto j = to_json(*dp_plan(parse_dag_text(kChain)).plan);
  CHECK(j["e2e_throughput"].get<double>() == doctest::Approx(2.0));
  CHECK(j["total_resource"] == 3);
  CHECK(j["nodes"][0]["id"] == "A");
  CHECK(j["nodes"][1]["batch"] == 2);
}
