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

#include "rainfuse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rainfuse/errors.hpp"

namespace rainfuse {

Rates rates(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw InsufficientDataError("no positive samples: true positive rate undefined");
  if (c.tn + c.fp == 0) throw InsufficientDataError("no negative samples: true negative rate undefined");
  return {static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn),
          static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp)};
}

bool radar_state(const RainField& radar, Position p, double tau) {
  const auto cell = cell_of(p, radar.grid);
  if (!cell) return false;
  return radar.at(cell->ix, cell->iy) > tau;
}

std::optional<bool> gage_state(const std::vector<GageReading>& gages, Position p, double t,
                               double tau, double radius, double time_slack) {
  bool any_in_range = false;
  bool raining = false;
  for (const auto& g : gages) {
    if (!within_range(p, g.position(), radius)) continue;
    if (std::abs(g.timestamp - t) > time_slack) continue;
    any_in_range = true;
    if (g.intensity > tau) raining = true;
  }
  if (!any_in_range) return std::nullopt;
  return raining;
}

BinaryRainState wiper_state(const AggregatedWiperBin& bin) {
  return {bin.on, StateSource::kWiper, static_cast<double>(bin.bin.start), bin.x, bin.y};
}

std::optional<bool> label_state_at(const std::vector<LabelInterval>& labels,
                                   const std::string& vehicle_id, double t) {
  for (const auto& l : labels)
    if (l.vehicle_id == vehicle_id && l.interval.contains(t)) return l.raining;
  return std::nullopt;
}

ConfusionCounts score_against_truth(const std::vector<BinaryRainState>& predictions,
                                    const std::vector<BinaryRainState>& truth,
                                    const std::vector<std::string>& prediction_vehicles,
                                    const std::vector<std::string>& truth_vehicles,
                                    std::int64_t bin_width, std::size_t* unmatched) {
  if (predictions.size() != prediction_vehicles.size() || truth.size() != truth_vehicles.size())
    throw InputError("score_against_truth: vehicle tags must parallel the state streams");

  std::map<std::string, std::vector<std::pair<double, bool>>> truth_by_vehicle;
  for (std::size_t i = 0; i < truth.size(); ++i)
    truth_by_vehicle[truth_vehicles[i]].push_back({truth[i].timestamp, truth[i].raining});
  for (auto& [id, samples] : truth_by_vehicle) std::sort(samples.begin(), samples.end());

  ConfusionCounts counts;
  std::size_t dropped = 0;
  const double half_bin = static_cast<double>(bin_width) / 2.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto it = truth_by_vehicle.find(prediction_vehicles[i]);
    if (it == truth_by_vehicle.end()) {
      ++dropped;
      continue;
    }
    const auto& samples = it->second;
    const double t = predictions[i].timestamp;
    auto lo = std::lower_bound(samples.begin(), samples.end(), std::make_pair(t, false));
    double best_dt = std::numeric_limits<double>::infinity();
    bool best_state = false;
    for (auto probe : {lo, lo == samples.begin() ? lo : std::prev(lo)}) {
      if (probe == samples.end()) continue;
      const double dt = std::abs(probe->first - t);
      if (dt < best_dt) {
        best_dt = dt;
        best_state = probe->second;
      }
    }
    if (best_dt > half_bin) {
      ++dropped;
      continue;
    }
    const bool predicted = predictions[i].raining;
    if (predicted && best_state) ++counts.tp;
    else if (predicted && !best_state) ++counts.fp;
    else if (!predicted && best_state) ++counts.fn;
    else ++counts.tn;
  }
  if (unmatched) *unmatched = dropped;
  return counts;
}

double auc(const std::vector<RocPoint>& points) {
  if (points.size() < 2) throw InputError("auc needs at least two ROC points");
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dx = points[i].fpr - points[i - 1].fpr;
    area += dx * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw InputError("roc_from_scores: size mismatch");
  std::size_t positives = 0;
  std::size_t negatives = 0;
  for (bool l : labels) (l ? positives : negatives)++;
  if (positives == 0 || negatives == 0)
    throw InsufficientDataError("roc needs both positive and negative samples");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double score = scores[order[i]];
    // group ties: one point per distinct score
    while (i < order.size() && scores[order[i]] == score) {
      if (labels[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), score});
  }
  if (curve.points.back().fpr != 1.0 || curve.points.back().tpr != 1.0)
    curve.points.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
  curve.auc = auc(curve.points);
  return curve;
}

LooResult leave_one_out(const std::vector<VehicleTrack>& vehicles,
                        const std::vector<RainField>& radar_sequence, const FusionConfig& cfg,
                        const std::vector<LabelInterval>* truth_labels) {
  if (vehicles.size() < 2)
    throw InsufficientDataError("leave-one-out validation needs at least 2 vehicles");
  if (radar_sequence.empty()) throw InputError("leave-one-out needs at least one radar field");
  cfg.validate();

  // fold order is sorted by vehicle id so results do not depend on input order
  std::vector<std::size_t> fold_order(vehicles.size());
  for (std::size_t i = 0; i < fold_order.size(); ++i) fold_order[i] = i;
  std::sort(fold_order.begin(), fold_order.end(), [&](std::size_t a, std::size_t b) {
    return vehicles[a].vehicle_id < vehicles[b].vehicle_id;
  });

  // radar fields indexed by time bin; iteration starts at the earliest bin
  std::map<std::int64_t, const RainField*> radar_by_bin;
  for (const auto& field : radar_sequence) {
    const TimeBin bin = bin_of(field.timestamp, cfg.time_bin_width);
    if (!radar_by_bin.emplace(bin.index(), &field).second)
      throw InputError("two radar fields fall into the same time bin");
  }
  const RainField& first_radar = *radar_by_bin.begin()->second;

  LooResult result;
  for (std::size_t fold : fold_order) {
    const VehicleTrack& held_out = vehicles[fold];
    if (held_out.bins.empty()) continue;

    // evidence per fusion bin from every other vehicle
    std::map<std::int64_t, std::vector<VehicleObservation>> evidence;
    for (std::size_t v = 0; v < vehicles.size(); ++v) {
      if (v == fold) continue;
      for (const auto& agg : vehicles[v].bins)
        evidence[bin_of(static_cast<double>(agg.bin.start), cfg.time_bin_width).index()]
            .push_back(agg.as_observation());
    }
    std::map<std::int64_t, std::vector<const AggregatedWiperBin*>> held_out_by_bin;
    for (const auto& agg : held_out.bins)
      held_out_by_bin[bin_of(static_cast<double>(agg.bin.start), cfg.time_bin_width).index()]
          .push_back(&agg);

    PosteriorField posterior = build_prior(first_radar, cfg);
    const RainField* current_radar = &first_radar;
    for (;;) {
      const std::int64_t bin_index = posterior.time_bin.index();
      auto ev = evidence.find(bin_index);
      posterior = assimilate_bin(posterior, ev != evidence.end() ? ev->second : std::vector<VehicleObservation>{}, cfg);

      // score the withheld vehicle's bins that fall into this fusion bin
      auto ho = held_out_by_bin.find(bin_index);
      if (ho != held_out_by_bin.end()) {
        for (const AggregatedWiperBin* agg : ho->second) {
          const auto cell = cell_of({agg->x, agg->y}, posterior.grid);
          if (!cell) continue;
          const int linear = posterior.grid.linear(cell->ix, cell->iy);
          LooSample sample;
          sample.vehicle_id = held_out.vehicle_id;
          sample.bin_start = agg->bin.start;
          sample.fused_score = posterior.summary_prob_rain[static_cast<std::size_t>(linear)];
          sample.radar_score = current_radar->intensity[static_cast<std::size_t>(linear)];
          sample.wiper_reference = agg->on;
          if (truth_labels)
            sample.truth_reference = label_state_at(*truth_labels, held_out.vehicle_id,
                                                    static_cast<double>(agg->bin.start) +
                                                        static_cast<double>(agg->bin.width) / 2.0);
          result.samples.push_back(std::move(sample));
        }
      }

      auto next = radar_by_bin.find(bin_index + 1);
      if (next == radar_by_bin.end()) break;
      current_radar = next->second;
      posterior = advance_bin(posterior, *next->second, cfg);
    }
  }

  if (result.samples.empty())
    throw InsufficientDataError("leave-one-out produced no scored samples");

  std::vector<double> fused_scores, radar_scores;
  std::vector<bool> wiper_ref;
  std::vector<double> fused_scores_t, radar_scores_t;
  std::vector<bool> truth_ref;
  for (const auto& s : result.samples) {
    fused_scores.push_back(s.fused_score);
    radar_scores.push_back(s.radar_score);
    wiper_ref.push_back(s.wiper_reference);
    if (s.truth_reference) {
      fused_scores_t.push_back(s.fused_score);
      radar_scores_t.push_back(s.radar_score);
      truth_ref.push_back(*s.truth_reference);
    }
  }
  result.fused = roc_from_scores(fused_scores, wiper_ref);
  result.radar_only = roc_from_scores(radar_scores, wiper_ref);
  if (!truth_ref.empty()) {
    result.fused_vs_truth = roc_from_scores(fused_scores_t, truth_ref);
    result.radar_only_vs_truth = roc_from_scores(radar_scores_t, truth_ref);
  }
  return result;
}

}  // namespace rainfuse
