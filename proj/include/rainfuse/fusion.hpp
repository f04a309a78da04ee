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

#ifndef RAINFUSE_FUSION_HPP
#define RAINFUSE_FUSION_HPP

#include <cstdint>
#include <vector>

#include "rainfuse/core.hpp"
#include "rainfuse/detection_kernel.hpp"
#include "rainfuse/particle_filter.hpp"
#include "rainfuse/sensor_model.hpp"

namespace rainfuse {

struct FusionConfig {
  KernelParams kernel;
  WiperSensorModel sensor;
  EmpiricalIntensityDistribution injection;
  int n_particles = 500;
  double ess_fraction = 0.5;
  double prior_epsilon = 0.1;
  double prior_cv = 0.3;
  double roughening_fraction = 0.05;
  double persistence_alpha = 0.5;
  std::int64_t time_bin_width = 300;
  std::uint64_t global_seed = 0;
  int workers = 1;

  void validate() const;
};

/// Per-cell particle posteriors for one time bin, plus derived summary
/// fields. Summaries are rebuilt by every operation that changes cells, so a
/// returned field never exposes stale summaries.
struct PosteriorField {
  GridSpec grid;
  TimeBin time_bin;
  std::vector<ParticleSet> cells;
  RainField summary_mean;
  std::vector<double> summary_prob_rain;

  void recompute_summaries(double tau);
  void recompute_summary(int cell, double tau);
};

/// Counters logged by each assimilation step.
struct AssimilationStats {
  std::size_t observations_in = 0;
  std::size_t aggregates = 0;
  std::size_t dropped_mister = 0;
  std::size_t dropped_out_of_domain = 0;
  std::size_t cells_updated = 0;
  std::size_t cells_resampled = 0;
};

/// One observation's worth of binary evidence after per-vehicle, per-cell
/// aggregation within a time bin.
struct AggregatedObservation {
  std::string vehicle_id;
  Position position;
  bool wiper_on = false;
  int modal_level = 0;
  double timestamp = 0.0;
  int cell = 0;
};

/// Aggregate raw observations to one binary value per (vehicle, cell): on if
/// any non-mister level >= 1 occurred there; position is the last fix in the
/// cell. Mister and out-of-domain observations are dropped and counted.
std::vector<AggregatedObservation> aggregate_observations(const std::vector<VehicleObservation>& obs,
                                                          const GridSpec& grid,
                                                          AssimilationStats& stats);

/// Radar-informed prior: per cell, particles drawn from a mixture of a
/// radar-faithful component and an epsilon mass on the opposite binary state.
/// Where the radar reads rain the epsilon mass is dry (exactly zero); where
/// it reads dry the epsilon mass proposes rain from the pooled empirical
/// intensity distribution. Without the opposite-state mass, reweighting could
/// never move a cell across the rain threshold in either direction.
PosteriorField build_prior(const RainField& radar, const FusionConfig& cfg);

/// One evidence update: every cell within the kernel cutoff of at least one
/// aggregated observation is reweighted by the product of total likelihoods,
/// resampled when its effective sample size degenerates, and re-summarized.
/// Cells outside every cutoff are returned bit-identical.
PosteriorField assimilate_bin(const PosteriorField& field, const std::vector<VehicleObservation>& obs,
                              const FusionConfig& cfg, AssimilationStats* stats = nullptr);

/// Temporal chaining: the next bin's prior mixes resampled belief carried
/// from the previous posterior (weight alpha) with a fresh radar prior.
/// alpha = 0 is memoryless per-bin correction, alpha = 1 pure persistence.
PosteriorField advance_bin(const PosteriorField& prev, const RainField& next_radar,
                           const FusionConfig& cfg);

enum class CaseLabel : std::uint8_t { kBothDry = 0, kBothRain = 1, kHole = 2, kAddition = 3 };

const char* case_label_name(CaseLabel label);

/// Per-cell agreement between the radar field and the posterior: a hole is
/// radar rain turned dry by evidence, an addition is rain where radar saw
/// none.
std::vector<CaseLabel> four_case_report(const RainField& radar, const PosteriorField& posterior,
                                        double tau);

}  // namespace rainfuse

#endif  // RAINFUSE_FUSION_HPP
