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

#ifndef RAINFUSE_DETECTION_KERNEL_HPP
#define RAINFUSE_DETECTION_KERNEL_HPP

#include <cmath>

#include "rainfuse/core.hpp"
#include "rainfuse/errors.hpp"

namespace rainfuse {

/// Isotropic Gaussian detection kernel: the probability that a wiper sensor
/// senses conditions at a target location decays with distance as
/// p_max * exp(-d^2 / (2 sigma^2)), peaking at p_max when the sensor sits on
/// the target. Beyond cutoff_sigmas the kernel is treated as exactly zero,
/// which bounds each observation's footprint to a finite set of cells.
struct KernelParams {
  double sigma = 1000.0;
  double p_max = 1.0;
  double cutoff_sigmas = 6.0;

  bool valid() const { return sigma > 0.0 && p_max > 0.0 && p_max <= 1.0 && cutoff_sigmas > 0.0; }
  double cutoff_distance() const { return cutoff_sigmas * sigma; }
};

inline void require_valid(const KernelParams& params) {
  if (!params.valid()) throw InputError("invalid kernel params");
}

inline double detection_probability_at_distance(double d, const KernelParams& params) {
  if (d > params.cutoff_distance()) return 0.0;
  return params.p_max * std::exp(-(d * d) / (2.0 * params.sigma * params.sigma));
}

inline double detection_probability(Position target, Position sensor, const KernelParams& params) {
  return detection_probability_at_distance(distance(target, sensor), params);
}

inline double miss_probability(Position target, Position sensor, const KernelParams& params) {
  return 1.0 - detection_probability(target, sensor, params);
}

}  // namespace rainfuse

#endif  // RAINFUSE_DETECTION_KERNEL_HPP
