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

#include "rainfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <utility>

#include "rainfuse/errors.hpp"

namespace rainfuse {

namespace {

/// Static chunking over cells. Each cell is written by exactly one worker and
/// owns its rng stream, so results do not depend on the worker count.
template <typename Fn>
void parallel_for_cells(int n_cells, int workers, Fn&& fn) {
  if (workers <= 1 || n_cells < 2 * workers) {
    for (int i = 0; i < n_cells; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (n_cells + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n_cells, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Draw one prior particle for a cell with radar reading r.
double sample_prior_particle(double r, const FusionConfig& cfg, Rng& rng) {
  const bool radar_rain = r > cfg.sensor.rain_threshold_tau;
  if (cfg.prior_epsilon > 0.0 && rng.uniform() < cfg.prior_epsilon) {
    if (radar_rain) return 0.0;
    return sample_pooled_injection(cfg.injection, rng);
  }
  if (r == 0.0) return 0.0;
  const double cv = cfg.prior_cv;
  return rng.gamma(1.0 / (cv * cv), r * cv * cv);
}

/// Weighted index draw via inverse CDF; uniform-weight sets short-circuit.
std::size_t draw_index(const ParticleSet& p, Rng& rng) {
  if (p.uniform_weights()) return static_cast<std::size_t>(rng.uniform_index(p.size()));
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += p.weights[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

}  // namespace

void FusionConfig::validate() const {
  require_valid(kernel);
  require_valid(sensor);
  if (n_particles < 1) throw InputError("n_particles must be >= 1");
  if (ess_fraction < 0.0 || ess_fraction > 1.0) throw InputError("ess_fraction must be in [0, 1]");
  if (prior_epsilon < 0.0 || prior_epsilon >= 1.0) throw InputError("prior_epsilon must be in [0, 1)");
  if (prior_cv <= 0.0) throw InputError("prior_cv must be > 0");
  if (roughening_fraction < 0.0) throw InputError("roughening_fraction must be >= 0");
  if (persistence_alpha < 0.0 || persistence_alpha > 1.0)
    throw InputError("persistence_alpha must be in [0, 1]");
  if (time_bin_width <= 0) throw InputError("time_bin_width must be > 0");
  if (workers < 1) throw InputError("workers must be >= 1");
  if (prior_epsilon > 0.0) injection.validate();
}

void PosteriorField::recompute_summary(int cell, double tau) {
  const auto idx = static_cast<std::size_t>(cell);
  summary_mean.intensity[idx] = posterior_mean(cells[idx]);
  summary_prob_rain[idx] = prob_above(cells[idx], tau);
}

void PosteriorField::recompute_summaries(double tau) {
  summary_mean.grid = grid;
  summary_mean.timestamp = time_bin.start;
  summary_mean.intensity.resize(cells.size());
  summary_prob_rain.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) recompute_summary(static_cast<int>(i), tau);
}

std::vector<AggregatedObservation> aggregate_observations(const std::vector<VehicleObservation>& obs,
                                                          const GridSpec& grid,
                                                          AssimilationStats& stats) {
  stats.observations_in += obs.size();
  struct Group {
    AggregatedObservation agg;
    int level_counts[kWiperMax + 1] = {0, 0, 0, 0};
    bool has_fix = false;
  };
  // key: (vehicle, cell), ordered so the aggregate list is deterministic.
  std::map<std::pair<std::string, int>, Group> groups;
  for (const auto& o : obs) {
    if (o.is_mister()) {
      ++stats.dropped_mister;
      continue;
    }
    const auto cell = cell_of(o.position(), grid);
    if (!cell) {
      ++stats.dropped_out_of_domain;
      continue;
    }
    const int linear = grid.linear(cell->ix, cell->iy);
    auto [it, inserted] = groups.try_emplace({o.vehicle_id, linear});
    Group& g = it->second;
    if (inserted) {
      g.agg.vehicle_id = o.vehicle_id;
      g.agg.cell = linear;
    }
    if (o.wiper_on()) {
      g.agg.wiper_on = true;
      ++g.level_counts[o.wiper_level];
    }
    if (!g.has_fix || o.timestamp >= g.agg.timestamp) {
      g.has_fix = true;
      g.agg.timestamp = o.timestamp;
      g.agg.position = o.position();
    }
  }
  std::vector<AggregatedObservation> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    // modal nonzero level; ties resolve to the smaller level
    int best = 0;
    for (int lvl = 1; lvl <= kWiperMax; ++lvl)
      if (g.level_counts[lvl] > (best == 0 ? 0 : g.level_counts[best])) best = lvl;
    g.agg.modal_level = best;
    out.push_back(std::move(g.agg));
  }
  stats.aggregates += out.size();
  return out;
}

PosteriorField build_prior(const RainField& radar, const FusionConfig& cfg) {
  cfg.validate();
  require_valid(radar);

  PosteriorField field;
  field.grid = radar.grid;
  field.time_bin = bin_of(radar.timestamp, cfg.time_bin_width);
  const int n_cells = radar.grid.cell_count();
  field.cells.resize(static_cast<std::size_t>(n_cells));
  field.summary_mean = make_uniform_field(radar.grid, field.time_bin.start, 0.0);
  field.summary_prob_rain.assign(static_cast<std::size_t>(n_cells), 0.0);

  const auto bin_index = static_cast<std::uint64_t>(field.time_bin.index());
  parallel_for_cells(n_cells, cfg.workers, [&](int cell) {
    Rng rng = Rng::stream(cfg.global_seed, StreamPurpose::kPrior, static_cast<std::uint64_t>(cell),
                          bin_index);
    const double r = radar.intensity[static_cast<std::size_t>(cell)];
    auto& p = field.cells[static_cast<std::size_t>(cell)];
    p = init_particles([&](Rng& g) { return sample_prior_particle(r, cfg, g); },
                       static_cast<std::size_t>(cfg.n_particles), rng);
    p.rng_seed = cfg.global_seed;
    field.recompute_summary(cell, cfg.sensor.rain_threshold_tau);
  });
  return field;
}

PosteriorField assimilate_bin(const PosteriorField& field, const std::vector<VehicleObservation>& obs,
                              const FusionConfig& cfg, AssimilationStats* stats_out) {
  cfg.validate();
  AssimilationStats stats;
  for (const auto& o : obs) {
    if (!o.is_mister() && !field.time_bin.contains(o.timestamp))
      throw InputError("observation timestamp outside the field's time bin");
  }
  const auto aggregates = aggregate_observations(obs, field.grid, stats);

  PosteriorField out = field;
  if (aggregates.empty()) {
    if (stats_out) *stats_out = stats;
    return out;
  }

  const double tau = cfg.sensor.rain_threshold_tau;
  const double cutoff = cfg.kernel.cutoff_distance();
  const double ess_threshold = cfg.ess_fraction * static_cast<double>(cfg.n_particles);
  const auto bin_index = static_cast<std::uint64_t>(field.time_bin.index());
  const int n_cells = field.grid.cell_count();
  std::vector<std::uint8_t> updated(static_cast<std::size_t>(n_cells), 0);
  std::vector<std::uint8_t> resampled(static_cast<std::size_t>(n_cells), 0);

  parallel_for_cells(n_cells, cfg.workers, [&](int cell) {
    const Position center = field.grid.center(cell);
    // Product of per-observation likelihood factors; the step likelihood only
    // depends on the particle's binary state, so the product collapses to one
    // rain factor and one dry factor.
    double factor_rain = 1.0;
    double factor_dry = 1.0;
    bool touched = false;
    for (const auto& agg : aggregates) {
      const double d = distance(center, agg.position);
      if (d > cutoff) continue;
      touched = true;
      const double p_d = detection_probability_at_distance(d, cfg.kernel);
      factor_rain *= p_d * likelihood_detected_rain(agg.wiper_on, cfg.sensor) + (1.0 - p_d) * 0.5;
      factor_dry *= p_d * likelihood_detected_dry(agg.wiper_on, cfg.sensor) + (1.0 - p_d) * 0.5;
    }
    if (!touched) return;

    const auto idx = static_cast<std::size_t>(cell);
    auto& p = out.cells[idx];
    p = reweight(p, [&](double v) { return v > tau ? factor_rain : factor_dry; });
    updated[idx] = 1;
    if (effective_sample_size(p) < ess_threshold) {
      Rng rng = Rng::stream(cfg.global_seed, StreamPurpose::kAssimilate,
                            static_cast<std::uint64_t>(cell), bin_index);
      p = systematic_resample(p, rng);
      roughen(p, cfg.roughening_fraction, tau, rng);
      resampled[idx] = 1;
    }
    out.recompute_summary(cell, tau);
  });

  for (int i = 0; i < n_cells; ++i) {
    stats.cells_updated += updated[static_cast<std::size_t>(i)];
    stats.cells_resampled += resampled[static_cast<std::size_t>(i)];
  }
  if (stats_out) *stats_out = stats;
  return out;
}

PosteriorField advance_bin(const PosteriorField& prev, const RainField& next_radar,
                           const FusionConfig& cfg) {
  cfg.validate();
  require_valid(next_radar);
  if (!(next_radar.grid == prev.grid)) throw InputError("radar grid does not match posterior grid");
  const TimeBin next_bin = bin_of(next_radar.timestamp, cfg.time_bin_width);
  if (next_bin.index() != prev.time_bin.index() + 1)
    throw InputError("next radar timestamp is not in the bin after the posterior's");

  if (cfg.persistence_alpha == 0.0) return build_prior(next_radar, cfg);

  PosteriorField field;
  field.grid = prev.grid;
  field.time_bin = next_bin;
  const int n_cells = prev.grid.cell_count();
  field.cells.resize(static_cast<std::size_t>(n_cells));
  field.summary_mean = make_uniform_field(prev.grid, next_bin.start, 0.0);
  field.summary_prob_rain.assign(static_cast<std::size_t>(n_cells), 0.0);

  const auto bin_index = static_cast<std::uint64_t>(next_bin.index());
  parallel_for_cells(n_cells, cfg.workers, [&](int cell) {
    const auto idx = static_cast<std::size_t>(cell);
    Rng rng = Rng::stream(cfg.global_seed, StreamPurpose::kAdvance, static_cast<std::uint64_t>(cell),
                          bin_index);
    const double r = next_radar.intensity[idx];
    const auto& carried = prev.cells[idx];
    auto& p = field.cells[idx];
    const auto n = static_cast<std::size_t>(cfg.n_particles);
    p.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < cfg.persistence_alpha)
        p.values.push_back(carried.values[draw_index(carried, rng)]);
      else
        p.values.push_back(sample_prior_particle(r, cfg, rng));
    }
    p.weights.assign(n, 1.0 / static_cast<double>(n));
    p.rng_seed = cfg.global_seed;
    field.recompute_summary(cell, cfg.sensor.rain_threshold_tau);
  });
  return field;
}

const char* case_label_name(CaseLabel label) {
  switch (label) {
    case CaseLabel::kBothDry: return "both-dry";
    case CaseLabel::kBothRain: return "both-rain";
    case CaseLabel::kHole: return "hole";
    case CaseLabel::kAddition: return "addition";
  }
  return "unknown";
}

std::vector<CaseLabel> four_case_report(const RainField& radar, const PosteriorField& posterior,
                                        double tau) {
  if (!(radar.grid == posterior.grid)) throw InputError("four-case report requires matching grids");
  std::vector<CaseLabel> labels(radar.intensity.size());
  for (std::size_t i = 0; i < radar.intensity.size(); ++i) {
    const bool radar_rain = radar.intensity[i] > tau;
    const bool posterior_rain = posterior.summary_prob_rain[i] > 0.5;
    if (radar_rain && posterior_rain) labels[i] = CaseLabel::kBothRain;
    else if (!radar_rain && !posterior_rain) labels[i] = CaseLabel::kBothDry;
    else if (radar_rain) labels[i] = CaseLabel::kHole;
    else labels[i] = CaseLabel::kAddition;
  }
  return labels;
}

}  // namespace rainfuse
