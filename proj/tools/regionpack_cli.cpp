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

// regionpack command-line front end.
//
// Exit codes: 0 success, 1 internal error, 2 input validation failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "regionpack/grid_io.hpp"
#include "regionpack/importance.hpp"
#include "regionpack/packing.hpp"
#include "regionpack/pipeline_sim.hpp"
#include "regionpack/planner.hpp"
#include "regionpack/temporal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regionpack;

namespace {

constexpr int kSchemaVersion = 1;

/// Input validation failure (exit code 2).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

json envelope(const char* kind) { return {{"schema_version", kSchemaVersion}, {"kind", kind}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string read_input(const std::string& path) {
  if (!fs::exists(path)) throw InputError("no such file: " + path);
  return read_text_file(path);
}

// ---------------------------------------------------------------- importance

struct ImportanceArgs {
  std::string grad, diff, out, levels_out;
  int mb_size = 16;
  int levels = 10;
};

int cmd_importance(const ImportanceArgs& a) {
  const auto grad = importance::field_from_grid(read_grid(a.grad));
  const auto diff = importance::field_from_grid(read_grid(a.diff));
  if (grad.width != diff.width || grad.height != diff.height) {
    throw InputError("dimension mismatch: " + a.grad + " is " + std::to_string(grad.height) + "x" +
                     std::to_string(grad.width) + " but " + a.diff + " is " + std::to_string(diff.height) + "x" +
                     std::to_string(diff.width));
  }
  if (a.mb_size <= 0) throw InputError("--mb-size must be positive");
  if (a.levels <= 0) throw InputError("--levels must be positive");
  const auto geom = importance::MBGeometry::for_frame(grad.width, grad.height, a.mb_size);
  const auto map = importance::compute_mb_importance(grad, diff, geom);
  emit(format_grid(importance::to_grid(map)), a.out);
  if (!a.levels_out.empty()) {
    write_text_file(a.levels_out, format_grid(importance::to_grid(importance::quantize_levels(map, a.levels))));
  }
  return 0;
}

// ------------------------------------------------------------ select-frames

struct SelectArgs {
  std::string manifest, out;
  int budget = 0;
  std::string op = "inv_area";
  std::optional<double> threshold;
};

// Manifest: {"streams": [{"id": 0, "frames": ["f0.grid", ...]}
//                        | {"id": 1, "phi": [v0, v1, ...]}]}
// Frame paths are relative to the manifest's directory.
int cmd_select_frames(const SelectArgs& a) {
  json m;
  try {
    m = json::parse(read_input(a.manifest));
  } catch (const json::parse_error& e) {
    throw InputError(a.manifest + ": invalid JSON: " + e.what());
  }
  if (!m.is_object() || !m.contains("streams") || !m["streams"].is_array()) {
    throw InputError(a.manifest + ": expected an object with a 'streams' array");
  }
  if (m["streams"].empty()) throw InputError(a.manifest + ": manifest lists no streams");
  const auto op = temporal::operator_from_string(a.op);
  const fs::path base = fs::path(a.manifest).parent_path();
  std::map<int, temporal::FeatureSeries> series;
  for (const auto& js : m["streams"]) {
    if (!js.is_object() || !js.contains("id") || !js["id"].is_number_integer()) {
      throw InputError(a.manifest + ": every stream needs an integer 'id'");
    }
    const int id = js["id"].get<int>();
    if (series.count(id)) throw InputError(a.manifest + ": duplicate stream id " + std::to_string(id));
    if (js.contains("phi")) {
      if (!js["phi"].is_array() || js["phi"].empty()) throw InputError(a.manifest + ": 'phi' must be a nonempty array");
      series.emplace(id, temporal::series_from_values(js["phi"].get<std::vector<double>>(), id));
    } else if (js.contains("frames")) {
      if (!js["frames"].is_array() || js["frames"].empty()) {
        throw InputError(a.manifest + ": 'frames' must be a nonempty array");
      }
      std::vector<temporal::ResidualFrame> frames;
      for (const auto& jf : js["frames"]) {
        const fs::path p = base / jf.get<std::string>();
        const Grid g = read_grid(p);
        frames.emplace_back(static_cast<int>(g.cols), static_cast<int>(g.rows), g.values);
      }
      series.emplace(id, temporal::build_series(frames, op, a.threshold, id));
    } else {
      throw InputError(a.manifest + ": stream " + std::to_string(id) + " needs 'frames' or 'phi'");
    }
  }
  if (a.budget < static_cast<int>(series.size())) {
    throw InputError("--budget " + std::to_string(a.budget) + " is below the stream count " +
                     std::to_string(series.size()));
  }
  const auto alloc = temporal::allocate_frame_budget(series, a.budget);
  json out = envelope("selection");
  out["operator"] = temporal::to_string(op);
  out["budget"] = a.budget;
  json jalloc = json::object();
  for (const auto& [id, n] : alloc) jalloc[std::to_string(id)] = n;
  out["allocation"] = jalloc;
  json streams = json::array();
  for (const auto& [id, s] : series) {
    const auto sel = temporal::cdf_select(s, alloc.at(id));
    streams.push_back({{"stream_id", id},
                       {"chunk_len", sel.chunk_len},
                       {"total_change", s.total_change()},
                       {"phi", s.values},
                       {"selected", sel.selected},
                       {"reuse_map", sel.reuse_map}});
  }
  out["streams"] = streams;
  emit(dump(out), a.out);
  return 0;
}

// ---------------------------------------------------------------------- pack

struct PackArgs {
  std::string mbs, out;
  int bins = 1, bin_h = 256, bin_w = 256;
  std::string policy = "importance_density";
  int expand = 3, partition_limit = 0;
  int frame_w = 640, frame_h = 360, mb_size = 16;
};

json rect_json(const packing::Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

int cmd_pack(const PackArgs& a) {
  const auto mbs = packing::parse_mb_csv(read_input(a.mbs), a.mbs);
  if (a.bins <= 0 || a.bin_h <= 0 || a.bin_w <= 0) throw InputError("bin count and dimensions must be positive");
  if (a.expand < 0 || a.partition_limit < 0) throw InputError("--expand and --partition-limit must be >= 0");
  if (a.frame_w <= 0 || a.frame_h <= 0 || a.mb_size <= 0) throw InputError("frame and MB sizes must be positive");
  const int grid_w = (a.frame_w + a.mb_size - 1) / a.mb_size, grid_h = (a.frame_h + a.mb_size - 1) / a.mb_size;
  for (const auto& m : mbs) {
    if (m.loc_x >= grid_w || m.loc_y >= grid_h) {
      throw InputError(a.mbs + ": MB (" + std::to_string(m.loc_x) + "," + std::to_string(m.loc_y) +
                       ") lies outside the " + std::to_string(grid_w) + "x" + std::to_string(grid_h) + " MB grid");
    }
  }
  const auto policy = packing::policy_from_string(a.policy);
  const packing::BinSpec bins{a.bins, a.bin_h, a.bin_w};
  const packing::BoxParams params{a.mb_size, a.expand, a.frame_w, a.frame_h, a.partition_limit};
  const auto plan = packing::plan_packing(mbs, bins, policy, params);

  json out = envelope("pack");
  out["policy"] = packing::to_string(policy);
  out["bins"] = {{"count", a.bins}, {"height", a.bin_h}, {"width", a.bin_w}};
  out["occupy_ratio"] = plan.occupy_ratio;
  out["packed_importance"] = plan.packed_importance();
  json placements = json::array();
  for (const auto& p : plan.placements) {
    placements.push_back({{"stream_id", p.box.stream_id},
                          {"frame_id", p.box.frame_id},
                          {"region_id", p.box.region_id},
                          {"piece", p.box.piece},
                          {"src", rect_json(p.box.src)},
                          {"bin", p.bin},
                          {"x", p.x},
                          {"y", p.y},
                          {"rotated", p.rotated},
                          {"member_count", p.box.member_count},
                          {"total_importance", p.box.total_importance},
                          {"density", p.box.density}});
  }
  out["placements"] = placements;
  json unplaced = json::array();
  for (const auto& b : plan.unplaced) {
    unplaced.push_back({{"stream_id", b.stream_id},
                        {"frame_id", b.frame_id},
                        {"region_id", b.region_id},
                        {"piece", b.piece},
                        {"src", rect_json(b.src)}});
  }
  out["unplaced"] = unplaced;
  emit(dump(out), a.out);
  return 0;
}

// ---------------------------------------------------------------------- plan

struct PlanArgs {
  std::string dag, out;
  std::optional<int> budget;
  std::optional<double> latency_target;
  bool verify = false;
};

int cmd_plan(const PlanArgs& a) {
  const auto dag = planner::parse_dag_text(read_input(a.dag));
  if (a.budget && *a.budget < 0) throw InputError("--budget must be >= 0");
  if (a.latency_target && !(*a.latency_target > 0.0)) throw InputError("--latency-target must be > 0");
  const auto result = a.budget ? planner::dp_plan(dag, *a.budget, a.latency_target)
                               : planner::dp_plan(dag, a.latency_target);
  if (!result.feasible()) {
    json out = envelope("plan");
    out["feasible"] = false;
    out["blocking_node"] = result.blocking_node;
    out["reason"] = result.reason;
    emit(dump(out), a.out);
    std::cerr << "error: infeasible plan, blocking node '" << result.blocking_node << "': " << result.reason << "\n";
    return 2;
  }
  json out = envelope("plan");
  out["feasible"] = true;
  out["plan"] = planner::to_json(*result.plan);
  if (a.verify) out["balance"] = planner::to_json(planner::verify_balance(dag, *result.plan));
  emit(dump(out), a.out);
  return 0;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string scenario, out, latency_csv;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<double> duration;
  bool compare = false;
  bool ablation = false;
  std::vector<int> histogram;
  bool frames = false;
};

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("REGIONPACK_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used == std::string(v).size()) return s;
  } catch (const std::exception&) {
  }
  throw InputError(std::string("REGIONPACK_SEED='") + v + "' is not an unsigned integer");
}

int cmd_simulate(const SimulateArgs& a) {
  auto scenario = sim::parse_scenario_text(read_input(a.scenario));
  // Importance files are relative to the scenario file.
  const fs::path base = fs::path(a.scenario).parent_path();
  for (auto& st : scenario.streams) {
    for (auto& f : st.importance_files) {
      if (fs::path(f).is_relative()) f = (base / f).string();
    }
  }
  if (a.seed) scenario.seed = *a.seed;
  else if (const auto s = env_seed()) scenario.seed = *s;
  if (a.policy) scenario.policy = sim::sim_policy_from_string(*a.policy);
  if (a.duration) {
    if (!(*a.duration > 0.0)) throw InputError("--duration must be > 0");
    scenario.duration_s = *a.duration;
  }
  json out = envelope("simulate");
  out["seed"] = scenario.seed;
  out["scenario"] = sim::to_json(scenario);
  std::optional<sim::SimReport> primary;
  if (a.compare) {
    const auto rows = sim::compare_policies(
        scenario, {sim::SimPolicy::per_frame, sim::SimPolicy::selective_anchor, sim::SimPolicy::region_based,
                   sim::SimPolicy::only_infer});
    out["comparison"] = sim::to_json(rows);
    for (const auto& r : rows) {
      if (r.report.policy == scenario.policy) primary = r.report;
    }
  }
  if (a.ablation) out["ablation"] = sim::to_json(sim::ablation_ladder(scenario));
  if (!a.histogram.empty()) {
    out["latency_histogram"] = sim::to_json(sim::frame_latency_histogram(scenario, scenario.policy, a.histogram));
  }
  if (!primary) {
    primary = sim::simulate(sim::plan_for(scenario, scenario.policy), scenario, scenario.policy);
  }
  out["plan"] = planner::to_json(sim::plan_for(scenario, scenario.policy));
  out["report"] = sim::to_json(*primary, a.frames);
  if (!a.latency_csv.empty()) write_text_file(a.latency_csv, sim::latency_csv(*primary));
  emit(dump(out), a.out);
  return 0;
}

// --------------------------------------------------------------------- check

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

void require_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const char* k : keys) require(j.contains(k), where + ": missing key '" + k + "'");
}

void check_json(const json& j, const std::string& path) {
  require(j.is_object(), path + ": top level must be an object");
  require_keys(j, {"schema_version", "kind"}, path);
  require(j["schema_version"] == kSchemaVersion, path + ": unsupported schema_version");
  const auto kind = j["kind"].get<std::string>();
  if (kind == "selection") {
    require_keys(j, {"operator", "budget", "allocation", "streams"}, path);
    int sum = 0;
    for (const auto& [id, n] : j["allocation"].items()) sum += n.get<int>();
    require(sum == j["budget"].get<int>(), path + ": allocation does not sum to the budget");
    for (const auto& s : j["streams"]) {
      require_keys(s, {"stream_id", "chunk_len", "selected", "reuse_map"}, path + ": stream");
      require(!s["selected"].empty() && s["selected"][0] == 0, path + ": selection must start at frame 0");
      require(s["reuse_map"].size() == s["chunk_len"].get<std::size_t>(), path + ": reuse_map length mismatch");
    }
  } else if (kind == "pack") {
    require_keys(j, {"policy", "bins", "occupy_ratio", "packed_importance", "placements", "unplaced"}, path);
    const double occ = j["occupy_ratio"].get<double>();
    require(occ >= 0.0 && occ <= 1.0, path + ": occupy_ratio outside [0, 1]");
    for (const auto& p : j["placements"]) {
      require_keys(p, {"stream_id", "frame_id", "src", "bin", "x", "y", "rotated"}, path + ": placement");
    }
  } else if (kind == "plan") {
    require_keys(j, {"feasible"}, path);
    if (j["feasible"].get<bool>()) {
      require_keys(j, {"plan"}, path);
      require_keys(j["plan"], {"e2e_throughput", "total_resource", "nodes"}, path + ": plan");
      for (const auto& n : j["plan"]["nodes"]) {
        require_keys(n, {"id", "device", "resource", "batch", "throughput"}, path + ": plan node");
      }
    } else {
      require_keys(j, {"blocking_node", "reason"}, path);
    }
  } else if (kind == "simulate") {
    require_keys(j, {"seed", "scenario", "report", "plan"}, path);
    require_keys(j["report"],
                 {"policy", "frames_in", "frames_out", "throughput_fps", "latency_ms", "accuracy_proxy", "stages"},
                 path + ": report");
    require(j["report"]["frames_in"] == j["report"]["frames_out"], path + ": frames_in != frames_out");
  } else {
    throw InputError(path + ": unknown kind '" + kind + "'");
  }
}

void check_csv(const std::string& text, const std::string& path) {
  const auto header = text.substr(0, text.find('\n'));
  if (header.rfind("rows,cols", 0) == 0) {
    parse_grid(text, path);
    return;
  }
  if (header == "stream_id,frame_id,loc_x,loc_y,importance") {
    packing::parse_mb_csv(text, path);
    return;
  }
  require(header == "stream_id,frame_id,arrival_ms,done_ms,latency_ms,batch_wait_ms",
          path + ": unrecognised CSV header");
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    if (++lineno == 1 || line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    int count = 0;
    while (std::getline(ls, field, ',')) {
      try {
        std::size_t used = 0;
        std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(path, lineno, "field '" + field + "' is not a number");
      }
      ++count;
    }
    if (count != 6) throw ParseError(path, lineno, "expected 6 fields");
  }
}

int cmd_check(const std::vector<std::string>& files) {
  for (const auto& path : files) {
    const auto text = read_input(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        throw InputError(path + ": invalid JSON: " + e.what());
      }
      check_json(j, path);
    } else if (text.rfind("GRID", first == std::string::npos ? 0 : first) == first ||
               fs::path(path).extension() == ".grid") {
      parse_grid(text, path);
    } else {
      check_csv(text, path);
    }
    std::cout << path << ": ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regionpack: region-aware enhancement scheduling toolkit"};
  app.require_subcommand(1);

  ImportanceArgs ia;
  auto* imp = app.add_subcommand("importance", "Per-MB importance from gradient and difference grids");
  imp->add_option("--grad", ia.grad, "Gradient field grid file")->required();
  imp->add_option("--diff", ia.diff, "Difference field grid file")->required();
  imp->add_option("--mb-size", ia.mb_size, "Macroblock side in pixels")->capture_default_str();
  imp->add_option("--levels", ia.levels, "Quantization level count")->capture_default_str();
  imp->add_option("-o,--out", ia.out, "Importance map output (stdout if omitted)");
  imp->add_option("--levels-out", ia.levels_out, "Level map output");

  SelectArgs sa;
  auto* sel = app.add_subcommand("select-frames", "Per-stream frame selection under a shared budget");
  sel->add_option("--manifest", sa.manifest, "Residual manifest JSON")->required();
  sel->add_option("--budget", sa.budget, "Total frames to select across streams")->required();
  sel->add_option("--operator", sa.op, "inv_area or area")->capture_default_str();
  sel->add_option("--threshold", sa.threshold, "Residual binarization threshold");
  sel->add_option("-o,--out", sa.out, "Output JSON (stdout if omitted)");

  PackArgs pa;
  auto* pk = app.add_subcommand("pack", "Top-N selection and region-aware bin packing");
  pk->add_option("--mbs", pa.mbs, "MB list CSV")->required();
  pk->add_option("--bins", pa.bins, "Bin count")->capture_default_str();
  pk->add_option("--bin-h", pa.bin_h, "Bin height")->capture_default_str();
  pk->add_option("--bin-w", pa.bin_w, "Bin width")->capture_default_str();
  pk->add_option("--policy", pa.policy, "importance_density, max_area_first or block")->capture_default_str();
  pk->add_option("--expand", pa.expand, "Box expansion in pixels")->capture_default_str();
  pk->add_option("--partition-limit", pa.partition_limit, "Longest box side before splitting (0: bin side)")
      ->capture_default_str();
  pk->add_option("--frame-w", pa.frame_w, "Frame width")->capture_default_str();
  pk->add_option("--frame-h", pa.frame_h, "Frame height")->capture_default_str();
  pk->add_option("--mb-size", pa.mb_size, "Macroblock side")->capture_default_str();
  pk->add_option("-o,--out", pa.out, "Output JSON (stdout if omitted)");

  PlanArgs pl;
  auto* plan = app.add_subcommand("plan", "Throughput-optimal resource and batch plan for a dataflow");
  plan->add_option("--dag", pl.dag, "Dataflow JSON")->required();
  plan->add_option("--budget", pl.budget, "Override every device budget (units)");
  plan->add_option("--latency-target", pl.latency_target, "Sink latency target (ms)");
  plan->add_flag("--verify", pl.verify, "Append a balance report");
  plan->add_option("-o,--out", pl.out, "Output JSON (stdout if omitted)");

  SimulateArgs sm;
  auto* simc = app.add_subcommand("simulate", "Discrete-event simulation of the multi-stream pipeline");
  simc->add_option("--scenario", sm.scenario, "Scenario JSON")->required();
  simc->add_option("--seed", sm.seed, "Seed (falls back to REGIONPACK_SEED, then the scenario)");
  simc->add_option("--policy", sm.policy, "Override the scenario policy");
  simc->add_option("--duration", sm.duration, "Override the simulated seconds");
  simc->add_flag("--compare", sm.compare, "Simulate every policy");
  simc->add_flag("--ablation", sm.ablation, "Run the component ablation ladder");
  simc->add_option("--histogram", sm.histogram, "Batch sizes for the latency histogram")->delimiter(',');
  simc->add_flag("--frames", sm.frames, "Include per-frame records");
  simc->add_option("--latency-csv", sm.latency_csv, "Write per-frame latency CSV");
  simc->add_option("-o,--out", sm.out, "Output JSON (stdout if omitted)");

  std::vector<std::string> check_files;
  auto* chk = app.add_subcommand("check", "Validate regionpack output files");
  chk->add_option("files", check_files, "Files to validate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*imp) return cmd_importance(ia);
    if (*sel) return cmd_select_frames(sa);
    if (*pk) return cmd_pack(pa);
    if (*plan) return cmd_plan(pl);
    if (*simc) return cmd_simulate(sm);
    if (*chk) return cmd_check(check_files);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const planner::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sim::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
