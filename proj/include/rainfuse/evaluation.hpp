// Copyright 2026 The Rainfuse Authors
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

#ifndef RAINFUSE_EVALUATION_HPP
#define RAINFUSE_EVALUATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "rainfuse/core.hpp"
#include "rainfuse/fusion.hpp"
#include "rainfuse/ingestion.hpp"

namespace rainfuse {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

struct Rates {
  double tpr = 0.0;
  double tnr = 0.0;
};

/// tpr = tp / (tp + fn), tnr = tn / (tn + fp). Throws InsufficientDataError
/// when a denominator is zero.
Rates rates(const ConfusionCounts& c);

/// Binary state readers for each source.
bool radar_state(const RainField& radar, Position p, double tau);
/// nullopt when no gage lies within the radius (excluded from scoring).
std::optional<bool> gage_state(const std::vector<GageReading>& gages, Position p, double t,
                               double tau, double radius = 2000.0, double time_slack = 150.0);
BinaryRainState wiper_state(const AggregatedWiperBin& bin);

/// Label lookup: the labeled state covering time t for the vehicle.
std::optional<bool> label_state_at(const std::vector<LabelInterval>& labels,
                                   const std::string& vehicle_id, double t);

/// Confusion tally of predictions against a ground-truth stream, aligned by
/// vehicle and nearest-in-time within half a bin. Unmatched predictions are
/// dropped and counted.
ConfusionCounts score_against_truth(const std::vector<BinaryRainState>& predictions,
                                    const std::vector<BinaryRainState>& truth,
                                    const std::vector<std::string>& prediction_vehicles,
                                    const std::vector<std::string>& truth_vehicles,
                                    std::int64_t bin_width, std::size_t* unmatched = nullptr);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) and (1,1) endpoints included
  double auc = 0.0;
};

/// Trapezoidal area under (fpr, tpr) points sorted by fpr.
double auc(const std::vector<RocPoint>& points);

/// ROC from scored samples: one point per distinct score (ties grouped),
/// threshold swept descending, endpoints augmented.
RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<bool>& labels);

/// One scored sample from a leave-one-out fold.
struct LooSample {
  std::string vehicle_id;
  std::int64_t bin_start = 0;
  double fused_score = 0.0;  // posterior probability of rain at the vehicle cell
  double radar_score = 0.0;  // radar intensity at the vehicle cell
  bool wiper_reference = false;
  std::optional<bool> truth_reference;
};

struct LooResult {
  RocCurve radar_only;
  RocCurve fused;
  std::optional<RocCurve> radar_only_vs_truth;
  std::optional<RocCurve> fused_vs_truth;
  std::vector<LooSample> samples;
};

/// Vehicle evidence prepared for fusion: per-vehicle aggregated wiper bins.
struct VehicleTrack {
  std::string vehicle_id;
  std::vector<AggregatedWiperBin> bins;
};

/// Iterated leave-one-out validation: for each vehicle, fuse all other
/// vehicles' evidence through the radar sequence, then score the withheld
/// vehicle's bins against the posterior probability of rain (fused) and the
/// raw radar intensity (radar-only). The withheld vehicle's own wiper state
/// is the reference; truth labels, when supplied, give a second reference
/// reported separately.
LooResult leave_one_out(const std::vector<VehicleTrack>& vehicles,
                        const std::vector<RainField>& radar_sequence, const FusionConfig& cfg,
                        const std::vector<LabelInterval>* truth_labels = nullptr);

}  // namespace rainfuse

#endif  // RAINFUSE_EVALUATION_HPP
