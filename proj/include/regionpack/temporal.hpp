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
#include <span>
#include <vector>

#include "regionpack/importance.hpp"

namespace regionpack::temporal {

/// Y-channel residual magnitudes of one frame, row-major.
struct ResidualFrame {
  int width = 0;
  int height = 0;
  std::vector<double> magnitudes;

  ResidualFrame() = default;
  ResidualFrame(int w, int h, std::vector<double> m);
  ResidualFrame(int w, int h, double fill);

  double max_magnitude() const;
};

enum class Operator { inv_area, area };

const char* to_string(Operator op);
Operator operator_from_string(const std::string& name);

/// Sum of 1/area over 4-connected components of {magnitude > threshold}.
double phi_inv_area(const ResidualFrame& res, double threshold);
/// Total foreground pixel count of {magnitude > threshold}.
double phi_area(const ResidualFrame& res, double threshold);
double phi(const ResidualFrame& res, Operator op, double threshold);

struct FeatureSeries {
  int stream_id = 0;
  std::vector<double> values;
  std::vector<double> deltas;      // values[i+1] - values[i]
  std::vector<double> normalized;  // |deltas| / sum |deltas|, all zero if no change

  double total_change() const;
};

/// Default binarization threshold for a chunk: 5% of its largest magnitude.
double default_threshold(std::span<const ResidualFrame> frames);

FeatureSeries build_series(std::span<const ResidualFrame> frames, Operator op,
                           std::optional<double> threshold = std::nullopt, int stream_id = 0);
/// Series from precomputed operator values.
FeatureSeries series_from_values(std::vector<double> values, int stream_id = 0);

struct FrameSelection {
  int stream_id = 0;
  int chunk_len = 0;
  std::vector<int> selected;   // strictly increasing, always contains 0
  std::vector<int> reuse_map;  // frame -> selected frame whose result it reuses
};

// Splits the CDF of `normalized` into `budget` even intervals and picks, for
// each interval midpoint, the first frame whose CDF reaches it. Delta k is the
// change arriving at frame k + 1. Duplicates collapse and frame 0 is always
// kept as the chunk anchor. A budget above the chunk length selects every
// frame.
FrameSelection cdf_select(const FeatureSeries& series, int budget);

/// Splits `total_budget` across streams in proportion to their total |ΔΦ|,
/// exactly summing to the budget, every stream receiving at least one frame.
std::map<int, int> allocate_frame_budget(const std::map<int, FeatureSeries>& series_by_stream,
                                         int total_budget);

/// Pearson correlation. Throws on length mismatch, < 2 samples, or a constant
/// input.
double correlation(std::span<const double> a, std::span<const double> b);

/// One sequence of the small-moving-blob suite: residual frames plus the
/// per-frame importance maps computed from the same scene.
struct BlobSequence {
  std::vector<ResidualFrame> residuals;
  std::vector<importance::ImportanceMap> masks;
};

// Scene: a few large slowly-deforming blocks that dominate the residual area
// but carry no analytic importance, plus small objects that drift, appear and
// vanish. Importance is the MB metric with the gradient field supported on the
// small objects.
BlobSequence synth_blob_sequence(std::uint64_t seed, int frames = 30, int width = 128,
                                 int height = 96);

/// Per-MB L1 difference between consecutive importance maps.
std::vector<double> mask_change_series(std::span<const importance::ImportanceMap> masks);

}  // namespace regionpack::temporal
