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

#include "regionpack/pipeline_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "regionpack/grid_io.hpp"
#include "regionpack/importance.hpp"
#include "regionpack/packing.hpp"
#include "regionpack/temporal.hpp"

namespace regionpack::sim {

using nlohmann::json;

const char* to_string(SimPolicy p) {
  switch (p) {
    case SimPolicy::region_based: return "region_based";
    case SimPolicy::per_frame: return "per_frame";
    case SimPolicy::selective_anchor: return "selective_anchor";
    case SimPolicy::only_infer: return "only_infer";
  }
  return "?";
}

SimPolicy sim_policy_from_string(const std::string& name) {
  for (auto p : {SimPolicy::region_based, SimPolicy::per_frame, SimPolicy::selective_anchor, SimPolicy::only_infer}) {
    if (name == to_string(p)) return p;
  }
  throw ScenarioError("unknown policy '" + name + "'");
}

double LatencyModel::latency_ms(double pixels) const {
  if (pixels <= 0.0) return 0.0;
  if (pixels <= saturation_px) return floor_ms;
  return floor_ms + slope_ms_per_mp * (pixels - saturation_px) / 1e6;
}

LatencyModel LatencyModel::from_profile(double px_a, double ms_a, double px_b, double ms_b) {
  if (px_a > px_b) {
    std::swap(px_a, px_b);
    std::swap(ms_a, ms_b);
  }
  if (!(px_a > 0.0) || px_a == px_b) throw ScenarioError("latency profile needs two distinct positive pixel counts");
  if (!(ms_a > 0.0) || ms_b < ms_a) throw ScenarioError("latency profile must be positive and non-decreasing");
  LatencyModel m;
  m.floor_ms = ms_a;
  m.saturation_px = px_a;
  m.slope_ms_per_mp = (ms_b - ms_a) / (px_b - px_a) * 1e6;
  return m;
}

double CostTable::at(double items) const {
  if (items <= 0.0 || ms.empty()) return 0.0;
  double px = 0.0, py = 0.0;
  double lx = 0.0, ly = 0.0;
  for (const auto& [b, c] : ms) {
    if (items <= b) return py + (c - py) * (items - px) / (b - px);
    lx = px;
    ly = py;
    px = b;
    py = c;
  }
  return py + (py - ly) / (px - lx) * (items - px);
}

double SimReport::mean_latency_ms() const {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : frames) sum += f.latency_ms();
  return sum / static_cast<double>(frames.size());
}

double SimReport::mean_accuracy_proxy() const {
  if (accuracy_proxy.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [s, v] : accuracy_proxy) sum += v;
  return sum / static_cast<double>(accuracy_proxy.size());
}

Scenario default_scenario(int streams) {
  Scenario s;
  for (int i = 0; i < streams; ++i) {
    StreamSpec spec;
    spec.stream_id = i;
    s.streams.push_back(spec);
  }
  s.decode.ms = {{1, 2.0}, {2, 3.0}, {4, 5.0}, {8, 9.0}};
  s.predict.ms = {{1, 10.0}, {2, 16.0}, {4, 28.0}, {8, 54.0}};
  s.pack.ms = {{1, 1.0}, {2, 1.5}, {4, 2.5}, {8, 4.5}};
  s.infer.ms = {{1, 4.0}, {2, 6.0}, {4, 10.0}, {8, 18.0}};
  return s;
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ScenarioError(std::string("field '") + key + "' has the wrong type");
  }
}

CostTable parse_cost(const json& j, const std::string& stage) {
  if (!j.is_object() || j.empty()) throw ScenarioError("stage '" + stage + "' needs a nonempty batch->ms table");
  CostTable t;
  for (const auto& [k, v] : j.items()) {
    int b = 0;
    try {
      std::size_t used = 0;
      b = std::stoi(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      throw ScenarioError("stage '" + stage + "': batch '" + k + "' is not an integer");
    }
    if (b <= 0 || !v.is_number() || !(v.get<double>() > 0.0)) {
      throw ScenarioError("stage '" + stage + "': batches and costs must be positive");
    }
    t.ms[b] = v.get<double>();
  }
  double prev = 0.0;
  for (const auto& [b, c] : t.ms) {
    if (c < prev) throw ScenarioError("stage '" + stage + "': cost must not decrease with batch size");
    prev = c;
  }
  return t;
}

json cost_json(const CostTable& t) {
  json j = json::object();
  for (const auto& [b, c] : t.ms) j[std::to_string(b)] = c;
  return j;
}

StreamSpec parse_stream(const json& j, int fallback_id, const StreamSpec& defaults) {
  StreamSpec s = defaults;
  s.stream_id = get_or<int>(j, "id", fallback_id);
  s.fps = get_or<double>(j, "fps", s.fps);
  s.chunk_len = get_or<int>(j, "chunk_len", s.chunk_len);
  s.sparsity = get_or<double>(j, "sparsity", s.sparsity);
  s.hotspots = get_or<int>(j, "hotspots", s.hotspots);
  if (j.contains("importance_files")) s.importance_files = get_or<std::vector<std::string>>(j, "importance_files", {});
  return s;
}

void validate(const Scenario& s) {
  if (s.streams.empty()) throw ScenarioError("scenario needs at least one stream");
  if (!(s.duration_s > 0.0)) throw ScenarioError("duration_s must be > 0");
  if (s.frame_w <= 0 || s.frame_h <= 0 || s.mb_size <= 0) throw ScenarioError("frame dimensions must be positive");
  if (s.bin_w <= 0 || s.bin_h <= 0) throw ScenarioError("bin dimensions must be positive");
  if (s.partition_limit < 0) throw ScenarioError("partition_limit must be >= 0");
  if (!(s.anchor_fraction > 0.0) || s.anchor_fraction > 1.0) throw ScenarioError("anchor_fraction must be in (0, 1]");
  if (s.reuse_ms < 0.0) throw ScenarioError("reuse_ms must be >= 0");
  if (s.eregion_threshold < 0.0 || s.eregion_threshold >= 1.0) {
    throw ScenarioError("eregion_threshold must be in [0, 1)");
  }
  if (s.jitter < 0.0 || s.jitter > 1.0) throw ScenarioError("jitter must be in [0, 1]");
  if (!(s.prediction_fraction > 0.0) || s.prediction_fraction > 1.0) {
    throw ScenarioError("prediction fraction must be in (0, 1]");
  }
  if (s.plan_batches.empty()) throw ScenarioError("planning needs at least one batch size");
  for (int b : s.plan_batches) {
    if (b <= 0) throw ScenarioError("planning batch sizes must be positive");
  }
  if (s.plan_mode != "dp" && s.plan_mode != "unplanned" && s.plan_mode != "fixed") {
    throw ScenarioError("plan must be \"dp\", \"unplanned\" or an object of stage batch sizes");
  }
  std::set<int> ids;
  for (const auto& st : s.streams) {
    if (!(st.fps > 0.0)) throw ScenarioError("stream " + std::to_string(st.stream_id) + ": fps must be > 0");
    if (st.chunk_len <= 0) throw ScenarioError("stream " + std::to_string(st.stream_id) + ": chunk_len must be > 0");
    if (!(st.sparsity > 0.0) || st.sparsity > 1.0) {
      throw ScenarioError("stream " + std::to_string(st.stream_id) + ": sparsity must be in (0, 1]");
    }
    if (st.hotspots < 0) throw ScenarioError("stream " + std::to_string(st.stream_id) + ": hotspots must be >= 0");
    if (!ids.insert(st.stream_id).second) throw ScenarioError("duplicate stream id " + std::to_string(st.stream_id));
  }
  for (const auto* t : {&s.decode, &s.predict, &s.pack, &s.infer}) {
    if (t->ms.empty()) throw ScenarioError("every stage needs a cost table");
  }
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  Scenario s = default_scenario(0);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.duration_s = get_or<double>(j, "duration_s", s.duration_s);
  if (j.contains("policy")) s.policy = sim_policy_from_string(get_or<std::string>(j, "policy", ""));
  if (j.contains("frame")) {
    const auto& f = j["frame"];
    s.frame_w = get_or<int>(f, "width", s.frame_w);
    s.frame_h = get_or<int>(f, "height", s.frame_h);
    s.mb_size = get_or<int>(f, "mb_size", s.mb_size);
  }
  if (!j.contains("streams")) throw ScenarioError("scenario needs 'streams'");
  const auto& js = j["streams"];
  if (js.is_array()) {
    for (std::size_t i = 0; i < js.size(); ++i) s.streams.push_back(parse_stream(js[i], static_cast<int>(i), {}));
  } else if (js.is_object()) {
    const int count = get_or<int>(js, "count", 1);
    if (count <= 0) throw ScenarioError("streams.count must be > 0");
    const StreamSpec defaults = parse_stream(js, 0, {});
    for (int i = 0; i < count; ++i) {
      StreamSpec spec = defaults;
      spec.stream_id = i;
      s.streams.push_back(spec);
    }
  } else {
    throw ScenarioError("'streams' must be an array or an object with a count");
  }
  if (j.contains("enhancement")) {
    const auto& e = j["enhancement"];
    if (e.contains("profile")) {
      const auto& p = e["profile"];
      if (!p.is_array() || p.size() != 2 || !p[0].is_array() || !p[1].is_array() || p[0].size() != 2 ||
          p[1].size() != 2) {
        throw ScenarioError("enhancement.profile must be [[pixels, ms], [pixels, ms]]");
      }
      s.enhance = LatencyModel::from_profile(p[0][0].get<double>(), p[0][1].get<double>(), p[1][0].get<double>(),
                                             p[1][1].get<double>());
    } else {
      s.enhance.floor_ms = get_or<double>(e, "floor_ms", s.enhance.floor_ms);
      s.enhance.saturation_px = get_or<double>(e, "saturation_px", s.enhance.saturation_px);
      s.enhance.slope_ms_per_mp = get_or<double>(e, "slope_ms_per_mp", s.enhance.slope_ms_per_mp);
      if (!(s.enhance.floor_ms >= 0.0) || s.enhance.saturation_px < 0.0 || s.enhance.slope_ms_per_mp < 0.0) {
        throw ScenarioError("enhancement latency parameters must be nonnegative");
      }
    }
    s.bin_w = get_or<int>(e, "bin_w", s.bin_w);
    s.bin_h = get_or<int>(e, "bin_h", s.bin_h);
    s.partition_limit = get_or<int>(e, "partition_limit", s.partition_limit);
    s.anchor_fraction = get_or<double>(e, "anchor_fraction", s.anchor_fraction);
    s.reuse_ms = get_or<double>(e, "reuse_ms", s.reuse_ms);
    s.eregion_threshold = get_or<double>(e, "eregion_threshold", s.eregion_threshold);
  }
  if (j.contains("importance")) s.jitter = get_or<double>(j["importance"], "jitter", s.jitter);
  if (j.contains("stages")) {
    const auto& st = j["stages"];
    if (!st.is_object()) throw ScenarioError("'stages' must be an object");
    for (const auto& [name, table] : st.items()) {
      CostTable t = parse_cost(table, name);
      if (name == "decode") s.decode = t;
      else if (name == "predict") s.predict = t;
      else if (name == "pack") s.pack = t;
      else if (name == "infer") s.infer = t;
      else throw ScenarioError("unknown stage '" + name + "' (enhance is set by the latency model)");
    }
  }
  if (j.contains("prediction")) {
    s.selective_prediction = get_or<bool>(j["prediction"], "selective", s.selective_prediction);
    s.prediction_fraction = get_or<double>(j["prediction"], "fraction", s.prediction_fraction);
  }
  if (j.contains("planning")) {
    s.plan_budget = get_or<int>(j["planning"], "budget", s.plan_budget);
    s.plan_batches = get_or<std::vector<int>>(j["planning"], "batches", s.plan_batches);
  }
  if (j.contains("plan")) {
    const auto& p = j["plan"];
    if (p.is_string()) {
      s.plan_mode = p.get<std::string>();
    } else if (p.is_object()) {
      s.plan_mode = "fixed";
      for (const auto& [stage, b] : p.items()) {
        if (!b.is_number_integer() || b.get<int>() <= 0) {
          throw ScenarioError("plan batch for '" + stage + "' must be a positive integer");
        }
        s.fixed_batches[stage] = b.get<int>();
      }
    } else {
      throw ScenarioError("'plan' must be a string or an object");
    }
  }
  validate(s);
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

json to_json(const Scenario& s) {
  json streams = json::array();
  for (const auto& st : s.streams) {
    json js = {{"id", st.stream_id},
               {"fps", st.fps},
               {"chunk_len", st.chunk_len},
               {"sparsity", st.sparsity},
               {"hotspots", st.hotspots}};
    if (!st.importance_files.empty()) js["importance_files"] = st.importance_files;
    streams.push_back(js);
  }
  json plan;
  if (s.plan_mode == "fixed") {
    plan = json::object();
    for (const auto& [k, v] : s.fixed_batches) plan[k] = v;
  } else {
    plan = s.plan_mode;
  }
  return {{"seed", s.seed},
          {"duration_s", s.duration_s},
          {"policy", to_string(s.policy)},
          {"frame", {{"width", s.frame_w}, {"height", s.frame_h}, {"mb_size", s.mb_size}}},
          {"streams", streams},
          {"enhancement",
           {{"floor_ms", s.enhance.floor_ms},
            {"saturation_px", s.enhance.saturation_px},
            {"slope_ms_per_mp", s.enhance.slope_ms_per_mp},
            {"bin_w", s.bin_w},
            {"bin_h", s.bin_h},
            {"partition_limit", s.partition_limit},
            {"anchor_fraction", s.anchor_fraction},
            {"reuse_ms", s.reuse_ms},
            {"eregion_threshold", s.eregion_threshold}}},
          {"importance", {{"jitter", s.jitter}}},
          {"stages",
           {{"decode", cost_json(s.decode)},
            {"predict", cost_json(s.predict)},
            {"pack", cost_json(s.pack)},
            {"infer", cost_json(s.infer)}}},
          {"prediction", {{"selective", s.selective_prediction}, {"fraction", s.prediction_fraction}}},
          {"planning", {{"budget", s.plan_budget}, {"batches", s.plan_batches}}},
          {"plan", plan}};
}

std::vector<std::string> stages_for(SimPolicy policy) {
  switch (policy) {
    case SimPolicy::region_based: return {"decode", "predict", "pack", "enhance", "infer"};
    case SimPolicy::per_frame:
    case SimPolicy::selective_anchor: return {"decode", "enhance", "infer"};
    case SimPolicy::only_infer: return {"decode", "infer"};
  }
  return {};
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d = 0) {
  return mix(mix(mix(mix(a) ^ b) ^ c) ^ d);
}

constexpr std::uint64_t kMapTag = 1, kJitterTag = 2, kPhiTag = 3;

int frames_of(const Scenario& s, const StreamSpec& st) {
  return std::max(1, static_cast<int>(std::floor(s.duration_s * st.fps + 1e-9)));
}

// Importance maps and temporal selections for every (stream, frame),
// generated on demand and cached per chunk.
class Workload {
 public:
  Workload(const Scenario& s, bool selective) : s_(s), selective_(selective) {
    geom_ = importance::MBGeometry::for_frame(s.frame_w, s.frame_h, s.mb_size);
    for (std::size_t i = 0; i < s.streams.size(); ++i) {
      const auto& st = s.streams[i];
      frames_.push_back(frames_of(s, st));
      std::vector<importance::ImportanceMap> files;
      for (const auto& path : st.importance_files) {
        const Grid g = read_grid(path);
        if (g.rows != static_cast<std::size_t>(geom_.grid_h) || g.cols != static_cast<std::size_t>(geom_.grid_w)) {
          throw ScenarioError("importance file '" + path + "' is " + std::to_string(g.rows) + "x" +
                              std::to_string(g.cols) + " MBs, expected " + std::to_string(geom_.grid_h) + "x" +
                              std::to_string(geom_.grid_w));
        }
        importance::ImportanceMap m{geom_, g.values};
        for (double v : m.scores) {
          if (v < 0.0) throw ScenarioError("importance file '" + path + "' has a negative score");
        }
        files.push_back(std::move(m));
      }
      files_.push_back(std::move(files));
    }
  }

  const importance::MBGeometry& geometry() const { return geom_; }
  int frames(std::size_t stream) const { return frames_[stream]; }

  /// True importance of a frame: chunk base map times per-MB jitter.
  importance::ImportanceMap truth(std::size_t stream, int frame) {
    const auto& st = s_.streams[stream];
    const auto& base = base_map(stream, frame / st.chunk_len, frame);
    importance::ImportanceMap m = base;
    std::mt19937_64 rng(mix(s_.seed, kJitterTag, static_cast<std::uint64_t>(st.stream_id),
                            static_cast<std::uint64_t>(frame)));
    std::uniform_real_distribution<double> u(1.0 - s_.jitter / 2.0, 1.0 + s_.jitter / 2.0);
    for (double& v : m.scores) v *= u(rng);
    return m;
  }

  /// Frame whose prediction this frame reuses (itself when predicted).
  int reference(std::size_t stream, int frame) {
    if (!selective_) return frame;
    const int chunk_len = s_.streams[stream].chunk_len;
    const int chunk = frame / chunk_len;
    const auto& sel = selection(chunk);
    return chunk * chunk_len + sel.at(stream).reuse_map[frame - chunk * chunk_len];
  }

  bool needs_prediction(std::size_t stream, int frame) { return reference(stream, frame) == frame; }

 private:
  const importance::ImportanceMap& base_map(std::size_t stream, int chunk, int frame) {
    const auto& files = files_[stream];
    if (!files.empty()) return files[static_cast<std::size_t>(frame) % files.size()];
    const auto key = std::make_pair(stream, chunk);
    auto it = base_.find(key);
    if (it == base_.end()) {
      const auto& st = s_.streams[stream];
      const auto seed = mix(s_.seed, kMapTag, static_cast<std::uint64_t>(st.stream_id),
                            static_cast<std::uint64_t>(chunk));
      it = base_.emplace(key, importance::synth_importance(seed, geom_, st.sparsity, st.hotspots)).first;
      // Keep the cache small: chunks are consumed roughly in order.
      for (auto old = base_.begin(); old != base_.end();) {
        if (old->first.first == stream && old->first.second + 2 < chunk) old = base_.erase(old);
        else ++old;
      }
    }
    return it->second;
  }

  // Budget allocation couples streams that share a chunk index, so chunks
  // are selected jointly. Streams with a different chunk_len get their own
  // per-stream budget at the same fraction.
  const std::map<std::size_t, temporal::FrameSelection>& selection(int chunk) {
    auto it = selections_.find(chunk);
    if (it != selections_.end()) return it->second;
    std::map<int, temporal::FeatureSeries> series;
    std::map<int, std::size_t> index;
    std::map<int, int> lengths;
    for (std::size_t i = 0; i < s_.streams.size(); ++i) {
      const auto& st = s_.streams[i];
      const int start = chunk * st.chunk_len;
      if (start >= frames_[i]) continue;
      const int len = std::min(st.chunk_len, frames_[i] - start);
      // Synthetic feature series: quiet drift with occasional bursts.
      std::mt19937_64 rng(mix(s_.seed, kPhiTag, static_cast<std::uint64_t>(st.stream_id),
                              static_cast<std::uint64_t>(chunk)));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> values(len);
      double v = 1.0;
      for (int f = 0; f < len; ++f) {
        values[f] = v;
        v += u(rng) < 0.15 ? 0.5 + u(rng) : 0.02 * u(rng);
      }
      series.emplace(st.stream_id, temporal::series_from_values(values, st.stream_id));
      index[st.stream_id] = i;
      lengths[st.stream_id] = len;
    }
    int total_len = 0;
    for (const auto& [id, len] : lengths) total_len += len;
    const int streams = static_cast<int>(series.size());
    const int budget = std::max(streams, static_cast<int>(std::lround(s_.prediction_fraction * total_len)));
    const auto alloc = temporal::allocate_frame_budget(series, budget);
    std::map<std::size_t, temporal::FrameSelection> out;
    for (const auto& [id, ser] : series) out.emplace(index[id], temporal::cdf_select(ser, alloc.at(id)));
    if (selections_.size() > 4) selections_.erase(selections_.begin());
    return selections_.emplace(chunk, std::move(out)).first->second;
  }

  const Scenario& s_;
  bool selective_;
  importance::MBGeometry geom_;
  std::vector<int> frames_;
  std::vector<std::vector<importance::ImportanceMap>> files_;
  std::map<std::pair<std::size_t, int>, importance::ImportanceMap> base_;
  std::map<int, std::map<std::size_t, temporal::FrameSelection>> selections_;
};

struct FrameRef {
  std::size_t stream = 0;
  int frame = 0;
};

struct RegionOutcome {
  double pixels = 0.0;  // bins * bin area
  double occupy = 0.0;
  // (stream index, frame) -> enhanced MB grid indices
  std::map<std::pair<std::size_t, int>, std::set<int>> enhanced;
};

// Packs the batch's eregion MBs from the (possibly reused) predicted maps,
// adding bins until every box is placed.
RegionOutcome pack_batch(const Scenario& s, Workload& w, const std::vector<FrameRef>& batch) {
  RegionOutcome out;
  std::vector<packing::MBIndex> mbs;
  for (const auto& fr : batch) {
    const auto predicted = w.truth(fr.stream, w.reference(fr.stream, fr.frame));
    const double cut = s.eregion_threshold * predicted.max_score();
    const auto& g = predicted.geometry;
    for (int y = 0; y < g.grid_h; ++y) {
      for (int x = 0; x < g.grid_w; ++x) {
        const double v = predicted.at(x, y);
        if (v > cut && v > 0.0) {
          mbs.push_back({static_cast<int>(fr.stream), fr.frame, x, y, v});
        }
      }
    }
  }
  if (mbs.empty()) return out;
  const packing::BoxParams params{s.mb_size, 3, s.frame_w, s.frame_h, s.partition_limit};
  packing::BinSpec bins{1, s.bin_h, s.bin_w};
  const auto boxes = packing::make_boxes(mbs, packing::Policy::importance_density, params, bins);
  long long area = 0;
  for (const auto& b : boxes) area += b.src.area();
  const long long bin_area = static_cast<long long>(s.bin_h) * s.bin_w;
  bins.count = static_cast<int>(std::max<long long>(1, (area + bin_area - 1) / bin_area));
  packing::PackingPlan plan;
  while (true) {
    plan = packing::pack(boxes, bins, packing::Policy::importance_density);
    if (plan.unplaced.empty()) break;
    ++bins.count;
  }
  out.pixels = static_cast<double>(bins.total_area());
  out.occupy = plan.occupy_ratio;
  const int grid_w = w.geometry().grid_w;
  for (const auto& p : plan.placements) {
    for (const auto& m : p.box.members) {
      out.enhanced[{static_cast<std::size_t>(m.stream_id), m.frame_id}].insert(m.loc_y * grid_w + m.loc_x);
    }
  }
  return out;
}

std::vector<int> anchors_of(int chunk_len, double fraction) {
  const int count = std::clamp(static_cast<int>(std::lround(fraction * chunk_len)), 1, chunk_len);
  std::vector<int> a;
  for (int i = 0; i < count; ++i) a.push_back(static_cast<int>(static_cast<long long>(i) * chunk_len / count));
  return a;
}

bool is_anchor(const StreamSpec& st, int frame, double fraction) {
  const auto a = anchors_of(st.chunk_len, fraction);
  return std::binary_search(a.begin(), a.end(), frame % st.chunk_len);
}

double frame_pixels(const Scenario& s) { return static_cast<double>(s.frame_w) * s.frame_h; }

}  // namespace

planner::Dataflow profile_dataflow(const Scenario& scenario, SimPolicy policy) {
  validate(scenario);
  const bool selective = policy == SimPolicy::region_based && scenario.selective_prediction;
  Workload w(scenario, selective);
  const double fpx = frame_pixels(scenario);
  planner::Dataflow dag;
  const auto stages = stages_for(policy);
  for (const auto& name : stages) {
    planner::Node node;
    node.id = name;
    planner::DeviceProfile prof;
    prof.device = "gpu";
    for (int b : scenario.plan_batches) {
      double ms = 0.0;
      if (name == "decode") ms = scenario.decode.at(b);
      else if (name == "pack") ms = scenario.pack.at(b);
      else if (name == "infer") ms = scenario.infer.at(b);
      else if (name == "predict") {
        ms = scenario.predict.at(selective ? b * scenario.prediction_fraction : b);
      } else if (policy == SimPolicy::per_frame) {
        ms = scenario.enhance.latency_ms(b * fpx);
      } else if (policy == SimPolicy::selective_anchor) {
        const double anchors = b * scenario.anchor_fraction;
        ms = scenario.enhance.latency_ms(anchors * fpx) + scenario.reuse_ms * (b - anchors);
      } else {
        // Sample batches mixing streams the way arrivals interleave.
        const int samples = 8;
        double sum = 0.0;
        for (int k = 0; k < samples; ++k) {
          std::vector<FrameRef> batch;
          for (int i = 0; i < b; ++i) {
            const std::size_t st = static_cast<std::size_t>(k * b + i) % scenario.streams.size();
            const int frame = std::min(w.frames(st) - 1, k * scenario.streams[st].chunk_len + i);
            batch.push_back({st, frame});
          }
          sum += scenario.enhance.latency_ms(pack_batch(scenario, w, batch).pixels);
        }
        ms = sum / samples;
      }
      prof.cost[b] = std::max(ms, 1e-3);
    }
    node.profiles.push_back(prof);
    dag.nodes.push_back(node);
  }
  for (std::size_t i = 0; i + 1 < stages.size(); ++i) {
    dag.edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }
  dag.budgets["gpu"] = scenario.plan_budget;
  return dag;
}

planner::ExecutionPlan unplanned(const Scenario& scenario, SimPolicy policy) {
  const auto dag = profile_dataflow(scenario, policy);
  planner::ExecutionPlan plan;
  plan.e2e_throughput = std::numeric_limits<double>::infinity();
  for (const auto& node : dag.nodes) {
    const auto& cost = node.profiles.front().cost;
    const auto it = cost.count(1) ? cost.find(1) : cost.begin();
    const double tput = it->first / it->second;
    plan.nodes.push_back({node.id, "gpu", planner::units_for(it->second), it->first, tput});
    plan.e2e_throughput = std::min(plan.e2e_throughput, tput);
  }
  return plan;
}

planner::ExecutionPlan planned(const Scenario& scenario, SimPolicy policy) {
  const auto result = planner::dp_plan(profile_dataflow(scenario, policy));
  if (!result.feasible()) {
    throw ScenarioError("planning budget is infeasible: " + result.reason);
  }
  return *result.plan;
}

planner::ExecutionPlan plan_for(const Scenario& scenario, SimPolicy policy) {
  if (scenario.plan_mode == "dp") return planned(scenario, policy);
  auto plan = unplanned(scenario, policy);
  if (scenario.plan_mode == "fixed") {
    for (auto& n : plan.nodes) {
      const auto it = scenario.fixed_batches.find(n.node_id);
      if (it != scenario.fixed_batches.end()) n.batch = it->second;
    }
  }
  return plan;
}

namespace {

using Tick = long long;
constexpr double kTicksPerMs = 10.0;

Tick to_ticks(double ms) { return static_cast<Tick>(std::llround(ms * kTicksPerMs)); }
double to_ms(Tick t) { return static_cast<double>(t) / kTicksPerMs; }

struct Item {
  std::size_t stream = 0;
  int frame = 0;
  Tick ready = 0;
};

struct Stage {
  std::string name;
  int batch = 1;
  Tick timeout = 0;
  std::deque<Item> queue;
  std::vector<Item> in_flight;
  bool busy = false;
  Tick idle_since = 0;
  Tick pending_timeout = -1;
  long long expected = 0;
  long long entered = 0;
  StageStats stats;
};

enum EventKind { kCompletion = 0, kArrival = 1, kTimeout = 2 };

struct Event {
  Tick t = 0;
  int kind = 0;
  int stage = 0;
  std::size_t stream = 0;
  int frame = 0;

  bool operator>(const Event& o) const {
    return std::tie(t, kind, stage, stream, frame) > std::tie(o.t, o.kind, o.stage, o.stream, o.frame);
  }
};

}  // namespace

SimReport simulate(const planner::ExecutionPlan& plan, const Scenario& scenario, SimPolicy policy) {
  validate(scenario);
  const auto names = stages_for(policy);
  const bool selective = policy == SimPolicy::region_based && scenario.selective_prediction;
  Workload w(scenario, selective);
  const double fpx = frame_pixels(scenario);
  double min_fps = std::numeric_limits<double>::infinity();
  for (const auto& st : scenario.streams) min_fps = std::min(min_fps, st.fps);
  const double period_ms = 1000.0 / min_fps;

  std::vector<Stage> stages;
  for (const auto& name : names) {
    const auto* node = plan.find(name);
    if (!node) {
      throw ScenarioError(std::string("plan has no '") + name + "' node, which policy " + to_string(policy) +
                          " needs");
    }
    if (node->batch <= 0) throw ScenarioError("plan batch for '" + name + "' must be positive");
    Stage st;
    st.name = name;
    st.batch = node->batch;
    // Floor keeps the wait within the exact bound despite tick rounding.
    st.timeout = static_cast<Tick>(std::floor((node->batch - 1) * period_ms * kTicksPerMs));
    st.stats.name = name;
    st.stats.batch = node->batch;
    st.stats.batch_wait_bound_ms = (node->batch - 1) * period_ms;
    stages.push_back(std::move(st));
  }

  const std::size_t n_streams = scenario.streams.size();
  std::vector<std::size_t> offset(n_streams + 1, 0);
  for (std::size_t i = 0; i < n_streams; ++i) offset[i + 1] = offset[i] + w.frames(i);
  const long long total = static_cast<long long>(offset.back());
  for (auto& st : stages) st.expected = total;

  SimReport report;
  report.policy = policy;
  report.label = to_string(policy);
  report.frames_in = total;
  report.frames.resize(static_cast<std::size_t>(total));
  std::vector<char> done(static_cast<std::size_t>(total), 0);

  std::vector<double> total_importance(n_streams, 0.0), enhanced_importance(n_streams, 0.0);
  double occupy_sum = 0.0;
  long long occupy_batches = 0;

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
  for (std::size_t i = 0; i < n_streams; ++i) {
    const auto& st = scenario.streams[i];
    // Streams are phase-shifted evenly inside one frame period.
    const double phase = 1000.0 / st.fps * static_cast<double>(i) / static_cast<double>(n_streams);
    for (int f = 0; f < w.frames(i); ++f) {
      const double arrival = 1000.0 * f / st.fps + phase;
      auto& rec = report.frames[offset[i] + f];
      rec.stream_id = st.stream_id;
      rec.frame_id = f;
      rec.arrival_ms = to_ms(to_ticks(arrival));
      events.push({to_ticks(arrival), kArrival, 0, i, f});
      if (policy != SimPolicy::only_infer) {
        const auto truth = w.truth(i, f);
        for (double v : truth.scores) total_importance[i] += v;
      }
    }
  }

  auto service_ms = [&](const Stage& st, const std::vector<Item>& batch) -> double {
    const double k = static_cast<double>(batch.size());
    if (st.name == "decode") return scenario.decode.at(k);
    if (st.name == "pack") return scenario.pack.at(k);
    if (st.name == "infer") return scenario.infer.at(k);
    if (st.name == "predict") {
      int need = 0;
      for (const auto& it : batch) need += w.needs_prediction(it.stream, it.frame) ? 1 : 0;
      return scenario.predict.at(need);
    }
    // enhance
    if (policy == SimPolicy::per_frame) {
      for (const auto& it : batch) {
        const auto truth = w.truth(it.stream, it.frame);
        for (double v : truth.scores) enhanced_importance[it.stream] += v;
      }
      return scenario.enhance.latency_ms(k * fpx);
    }
    if (policy == SimPolicy::selective_anchor) {
      int anchors = 0;
      for (const auto& it : batch) {
        if (!is_anchor(scenario.streams[it.stream], it.frame, scenario.anchor_fraction)) continue;
        ++anchors;
        const auto truth = w.truth(it.stream, it.frame);
        for (double v : truth.scores) enhanced_importance[it.stream] += v;
      }
      return scenario.enhance.latency_ms(anchors * fpx) + scenario.reuse_ms * (k - anchors);
    }
    std::vector<FrameRef> refs;
    for (const auto& it : batch) refs.push_back({it.stream, it.frame});
    const auto outcome = pack_batch(scenario, w, refs);
    for (const auto& [key, cells] : outcome.enhanced) {
      const auto truth = w.truth(key.first, key.second);
      for (int c : cells) enhanced_importance[key.first] += truth.scores[static_cast<std::size_t>(c)];
    }
    occupy_sum += outcome.occupy;
    ++occupy_batches;
    return scenario.enhance.latency_ms(outcome.pixels);
  };

  auto try_dispatch = [&](int s, Tick now) {
    auto& st = stages[s];
    if (st.busy || st.queue.empty()) return;
    const Tick start = std::max(st.queue.front().ready, st.idle_since);
    const bool full = static_cast<int>(st.queue.size()) >= st.batch;
    const bool all_in = st.entered == st.expected;
    if (!full && !all_in && now < start + st.timeout) {
      if (st.pending_timeout != start + st.timeout) {
        st.pending_timeout = start + st.timeout;
        events.push({st.pending_timeout, kTimeout, s, 0, 0});
      }
      return;
    }
    const std::size_t k = std::min<std::size_t>(st.queue.size(), static_cast<std::size_t>(st.batch));
    st.in_flight.assign(st.queue.begin(), st.queue.begin() + static_cast<std::ptrdiff_t>(k));
    st.queue.erase(st.queue.begin(), st.queue.begin() + static_cast<std::ptrdiff_t>(k));
    for (const auto& it : st.in_flight) {
      const double wait = to_ms(now - std::max(it.ready, st.idle_since));
      st.stats.max_batch_wait_ms = std::max(st.stats.max_batch_wait_ms, wait);
      report.frames[offset[it.stream] + it.frame].batch_wait_ms += wait;
    }
    const double ms = service_ms(st, st.in_flight);
    st.busy = true;
    st.pending_timeout = -1;
    ++st.stats.batches;
    st.stats.busy_ms += ms;
    events.push({now + to_ticks(ms), kCompletion, s, 0, 0});
  };

  Tick last = 0;
  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    auto& st = stages[ev.stage];
    switch (ev.kind) {
      case kArrival:
        st.queue.push_back({ev.stream, ev.frame, ev.t});
        ++st.entered;
        try_dispatch(ev.stage, ev.t);
        break;
      case kTimeout:
        if (st.pending_timeout == ev.t) {
          st.pending_timeout = -1;
          try_dispatch(ev.stage, ev.t);
        }
        break;
      case kCompletion: {
        auto items = std::move(st.in_flight);
        st.in_flight.clear();
        st.busy = false;
        st.idle_since = ev.t;
        if (ev.stage + 1 < static_cast<int>(stages.size())) {
          auto& next = stages[ev.stage + 1];
          for (const auto& it : items) {
            next.queue.push_back({it.stream, it.frame, ev.t});
            ++next.entered;
          }
          try_dispatch(ev.stage + 1, ev.t);
        } else {
          for (const auto& it : items) {
            const std::size_t idx = offset[it.stream] + it.frame;
            if (done[idx]) throw std::logic_error("frame completed twice");
            done[idx] = 1;
            report.frames[idx].done_ms = to_ms(ev.t);
            ++report.frames_out;
          }
          last = std::max(last, ev.t);
        }
        try_dispatch(ev.stage, ev.t);
        break;
      }
    }
  }
  if (report.frames_out != report.frames_in) throw std::logic_error("simulation lost frames");

  report.makespan_s = to_ms(last) / 1000.0;
  report.throughput_fps = report.makespan_s > 0.0 ? report.frames_out / report.makespan_s : 0.0;
  double max_fps = 0.0;
  for (const auto& st : scenario.streams) max_fps = std::max(max_fps, st.fps);
  report.sustainable_streams = static_cast<int>(std::floor(report.throughput_fps / max_fps + 1e-9));
  for (std::size_t i = 0; i < n_streams; ++i) {
    const auto& st = scenario.streams[i];
    const int frames = w.frames(i);
    for (int c = 0; c * st.chunk_len < frames; ++c) {
      const int first = c * st.chunk_len;
      const int lastf = std::min(frames, first + st.chunk_len) - 1;
      double finish = 0.0;
      for (int f = first; f <= lastf; ++f) finish = std::max(finish, report.frames[offset[i] + f].done_ms);
      report.chunk_latency_ms.push_back(finish - report.frames[offset[i] + lastf].arrival_ms);
    }
    report.accuracy_proxy[st.stream_id] =
        total_importance[i] > 0.0 ? std::min(1.0, enhanced_importance[i] / total_importance[i]) : 0.0;
  }
  report.occupy_ratio = occupy_batches > 0 ? occupy_sum / static_cast<double>(occupy_batches) : 0.0;
  for (const auto& st : stages) report.stages.push_back(st.stats);
  return report;
}

namespace {

ComparisonRow make_row(std::string label, SimReport report, const SimReport* base) {
  ComparisonRow row;
  row.label = std::move(label);
  row.report = std::move(report);
  row.report.label = row.label;
  if (base) {
    row.throughput_ratio = base->throughput_fps > 0.0 ? row.report.throughput_fps / base->throughput_fps : 0.0;
    row.throughput_delta = row.report.throughput_fps - base->throughput_fps;
    row.proxy_delta = row.report.mean_accuracy_proxy() - base->mean_accuracy_proxy();
  }
  return row;
}

}  // namespace

std::vector<ComparisonRow> compare_policies(const Scenario& scenario, const std::vector<SimPolicy>& policies) {
  std::vector<ComparisonRow> rows;
  for (auto p : policies) {
    auto r = simulate(plan_for(scenario, p), scenario, p);
    rows.push_back(make_row(to_string(p), std::move(r), rows.empty() ? nullptr : &rows.front().report));
  }
  if (!rows.empty()) rows.front() = make_row(rows.front().label, rows.front().report, &rows.front().report);
  return rows;
}

std::vector<ComparisonRow> ablation_ladder(const Scenario& scenario) {
  Scenario every = scenario;
  every.selective_prediction = false;
  Scenario full = scenario;
  full.selective_prediction = true;
  std::vector<ComparisonRow> rows;
  auto add = [&](const char* label, const planner::ExecutionPlan& plan, const Scenario& s, SimPolicy p) {
    auto r = simulate(plan, s, p);
    rows.push_back(make_row(label, std::move(r), rows.empty() ? nullptr : &rows.front().report));
  };
  add("per_frame", unplanned(scenario, SimPolicy::per_frame), scenario, SimPolicy::per_frame);
  rows.front() = make_row(rows.front().label, rows.front().report, &rows.front().report);
  add("+planning", planned(scenario, SimPolicy::per_frame), scenario, SimPolicy::per_frame);
  add("+packing", planned(every, SimPolicy::region_based), every, SimPolicy::region_based);
  add("full", planned(full, SimPolicy::region_based), full, SimPolicy::region_based);
  return rows;
}

std::vector<LatencyHistogramRow> frame_latency_histogram(const Scenario& scenario, SimPolicy policy,
                                                         const std::vector<int>& batch_sizes, double bucket_ms) {
  if (!(bucket_ms > 0.0)) throw std::invalid_argument("bucket_ms must be > 0");
  auto run = [&](int b) {
    auto plan = unplanned(scenario, policy);
    for (auto& n : plan.nodes) n.batch = b;
    return simulate(plan, scenario, policy);
  };
  const SimReport base = run(1);
  std::vector<LatencyHistogramRow> rows;
  for (int b : batch_sizes) {
    if (b <= 0) throw std::invalid_argument("batch sizes must be positive");
    const SimReport r = b == 1 ? base : run(b);
    LatencyHistogramRow row;
    row.batch = b;
    row.bucket_ms = bucket_ms;
    double delta = 0.0;
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
      const double lat = r.frames[i].latency_ms();
      const auto bucket = static_cast<std::size_t>(std::max(0.0, std::floor(lat / bucket_ms)));
      if (row.counts.size() <= bucket) row.counts.resize(bucket + 1, 0);
      ++row.counts[bucket];
      delta += lat - base.frames[i].latency_ms();
    }
    row.mean_latency_ms = r.mean_latency_ms();
    row.mean_delta_ms = r.frames.empty() ? 0.0 : delta / static_cast<double>(r.frames.size());
    for (const auto& st : r.stages) {
      row.max_batch_wait_ms = std::max(row.max_batch_wait_ms, st.max_batch_wait_ms);
      row.bound_ms = std::max(row.bound_ms, st.batch_wait_bound_ms);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const SimReport& r, bool include_frames) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name},
                      {"batch", s.batch},
                      {"batches", s.batches},
                      {"busy_ms", s.busy_ms},
                      {"max_batch_wait_ms", s.max_batch_wait_ms},
                      {"batch_wait_bound_ms", s.batch_wait_bound_ms}});
  }
  json proxy = json::object();
  for (const auto& [id, v] : r.accuracy_proxy) proxy[std::to_string(id)] = v;
  std::vector<double> lat;
  lat.reserve(r.frames.size());
  for (const auto& f : r.frames) lat.push_back(f.latency_ms());
  std::sort(lat.begin(), lat.end());
  auto pct = [&](double q) {
    if (lat.empty()) return 0.0;
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lat.size())));
    return lat[std::clamp<std::size_t>(rank, 1, lat.size()) - 1];
  };
  double chunk_mean = 0.0;
  for (double c : r.chunk_latency_ms) chunk_mean += c;
  if (!r.chunk_latency_ms.empty()) chunk_mean /= static_cast<double>(r.chunk_latency_ms.size());
  json j = {{"label", r.label},
            {"policy", to_string(r.policy)},
            {"frames_in", r.frames_in},
            {"frames_out", r.frames_out},
            {"makespan_s", r.makespan_s},
            {"throughput_fps", r.throughput_fps},
            {"sustainable_streams", r.sustainable_streams},
            {"latency_ms", {{"mean", r.mean_latency_ms()}, {"p50", pct(0.5)}, {"p95", pct(0.95)}, {"max", pct(1.0)}}},
            {"chunk_latency_ms", {{"mean", chunk_mean}, {"count", r.chunk_latency_ms.size()}}},
            {"occupy_ratio", r.occupy_ratio},
            {"accuracy_proxy", {{"note", "importance-coverage proxy, not a task accuracy"},
                                {"mean", r.mean_accuracy_proxy()},
                                {"per_stream", proxy}}},
            {"stages", stages}};
  if (include_frames) {
    json frames = json::array();
    for (const auto& f : r.frames) {
      frames.push_back({f.stream_id, f.frame_id, f.arrival_ms, f.done_ms, f.batch_wait_ms});
    }
    j["frames"] = frames;
  }
  return j;
}

json to_json(const std::vector<ComparisonRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json j = to_json(row.report);
    j["throughput_ratio"] = row.throughput_ratio;
    j["throughput_delta"] = row.throughput_delta;
    j["proxy_delta"] = row.proxy_delta;
    out.push_back(j);
  }
  return out;
}

json to_json(const std::vector<LatencyHistogramRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"batch", r.batch},
                   {"bucket_ms", r.bucket_ms},
                   {"counts", r.counts},
                   {"mean_latency_ms", r.mean_latency_ms},
                   {"mean_delta_ms", r.mean_delta_ms},
                   {"max_batch_wait_ms", r.max_batch_wait_ms},
                   {"bound_ms", r.bound_ms}});
  }
  return out;
}

std::string latency_csv(const SimReport& r) {
  std::ostringstream os;
  os << "stream_id,frame_id,arrival_ms,done_ms,latency_ms,batch_wait_ms\n";
  char buf[160];
  for (const auto& f : r.frames) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.1f,%.1f,%.1f,%.1f\n", f.stream_id, f.frame_id, f.arrival_ms, f.done_ms,
                  f.latency_ms(), f.batch_wait_ms);
    os << buf;
  }
  return os.str();
}

}  // namespace regionpack::sim
