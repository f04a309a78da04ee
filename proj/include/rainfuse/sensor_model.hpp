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

#ifndef RAINFUSE_SENSOR_MODEL_HPP
#define RAINFUSE_SENSOR_MODEL_HPP

#include <map>
#include <vector>

#include "rainfuse/core.hpp"
#include "rainfuse/detection_kernel.hpp"
#include "rainfuse/rng.hpp"

namespace rainfuse {

/// Binary wiper sensor characteristic. tpr is the probability of the wiper
/// being on when the (detected) cell is raining; tnr the probability of it
/// being off when the cell is dry. A cell counts as raining when its
/// intensity exceeds rain_threshold_tau.
struct WiperSensorModel {
  double tpr = 0.931;
  double tnr = 0.982;
  double rain_threshold_tau = 0.1;

  bool valid() const {
    return tpr > 0.0 && tpr <= 1.0 && tnr > 0.0 && tnr <= 1.0 && rain_threshold_tau >= 0.0;
  }
};

inline void require_valid(const WiperSensorModel& model) {
  if (!model.valid()) throw InputError("invalid wiper sensor model");
}

/// One normalized intensity histogram: contiguous-or-not bins with
/// probabilities summing to 1.
struct IntensityHistogram {
  struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    double probability = 0.0;
  };
  std::vector<Bin> bins;

  bool empty() const { return bins.empty(); }

  void validate() const {
    if (bins.empty()) throw InputError("empty intensity histogram");
    double total = 0.0;
    for (const auto& b : bins) {
      if (b.lo < 0.0 || b.hi < b.lo) throw InputError("intensity histogram bin edges must be increasing and >= 0");
      if (b.probability < 0.0) throw InputError("intensity histogram probability must be >= 0");
      total += b.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("intensity histogram probabilities must sum to 1");
  }

  /// Draw a bin by probability, then uniform within the bin.
  double sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& b : bins) {
      acc += b.probability;
      if (u < acc) return rng.uniform(b.lo, b.hi);
    }
    const auto& last = bins.back();
    return rng.uniform(last.lo, last.hi);
  }
};

/// Empirical rain-intensity histograms per wiper level 1..3, used to propose
/// nonzero intensities where the radar prior is dry.
struct EmpiricalIntensityDistribution {
  std::map<int, IntensityHistogram> per_level;

  bool has_level(int level) const {
    auto it = per_level.find(level);
    return it != per_level.end() && !it->second.empty();
  }

  const IntensityHistogram& level(int lvl) const {
    auto it = per_level.find(lvl);
    if (it == per_level.end() || it->second.empty())
      throw InputError("no intensity distribution for wiper level " + std::to_string(lvl));
    return it->second;
  }

  void validate() const {
    if (per_level.empty()) throw InputError("empty intensity distribution");
    for (const auto& [lvl, hist] : per_level) {
      if (lvl < 1 || lvl > kWiperMax) throw InputError("intensity distribution level out of range");
      hist.validate();
    }
  }

  /// Point-mass helper, mostly for tests and minimal configs.
  static EmpiricalIntensityDistribution point_mass(double intensity) {
    EmpiricalIntensityDistribution dist;
    for (int lvl = 1; lvl <= kWiperMax; ++lvl)
      dist.per_level[lvl] = IntensityHistogram{{{intensity, intensity, 1.0}}};
    return dist;
  }
};

/// Detected-branch likelihoods for the two binary states.
inline double likelihood_detected_rain(bool wiper_on, const WiperSensorModel& model) {
  return wiper_on ? model.tpr : 1.0 - model.tpr;
}

inline double likelihood_detected_dry(bool wiper_on, const WiperSensorModel& model) {
  return wiper_on ? 1.0 - model.tnr : model.tnr;
}

/// Measurement likelihood given that the sensor detected the cell: the
/// confusion rates keyed off the binary state of the intensity.
inline double likelihood_given_detected(bool wiper_on, double intensity,
                                        const WiperSensorModel& model) {
  return intensity > model.rain_threshold_tau ? likelihood_detected_rain(wiper_on, model)
                                              : likelihood_detected_dry(wiper_on, model);
}

/// Total measurement likelihood: detection-weighted mixture of the confusion
/// model and an uninformative 1/2 for the non-detected branch.
inline double likelihood_total(bool wiper_on, double intensity, Position target, Position sensor,
                               const KernelParams& kernel, const WiperSensorModel& model) {
  const double p_d = detection_probability(target, sensor, kernel);
  return p_d * likelihood_given_detected(wiper_on, intensity, model) + (1.0 - p_d) * 0.5;
}

/// Intensity draw for injecting rain at a cell the radar saw as dry, from the
/// histogram of the observed wiper level.
inline double sample_injection_intensity(int wiper_level, const EmpiricalIntensityDistribution& dist,
                                         Rng& rng) {
  if (wiper_level < 1 || wiper_level > kWiperMax)
    throw InputError("injection sampling requires wiper level in 1..3");
  return dist.level(wiper_level).sample(rng);
}

/// Draw from the levels pooled uniformly; used by the prior mixture where no
/// particular wiper level is in evidence.
inline double sample_pooled_injection(const EmpiricalIntensityDistribution& dist, Rng& rng) {
  std::vector<int> levels;
  for (int lvl = 1; lvl <= kWiperMax; ++lvl)
    if (dist.has_level(lvl)) levels.push_back(lvl);
  if (levels.empty()) throw InputError("intensity distribution has no usable level");
  const int lvl = levels[static_cast<std::size_t>(rng.uniform_index(levels.size()))];
  return dist.level(lvl).sample(rng);
}

}  // namespace rainfuse

#endif  // RAINFUSE_SENSOR_MODEL_HPP
