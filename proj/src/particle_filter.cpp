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

#include "rainfuse/particle_filter.hpp"

#include <algorithm>
#include <cmath>

#include "rainfuse/errors.hpp"

namespace rainfuse {

bool ParticleSet::uniform_weights() const {
  if (weights.empty()) return true;
  const double expected = 1.0 / static_cast<double>(weights.size());
  for (double w : weights)
    if (w != expected) return false;
  return true;
}

ParticleSet init_particles(const std::function<double(Rng&)>& prior_sampler, std::size_t n, Rng& rng) {
  if (n == 0) throw InputError("particle count must be >= 1");
  ParticleSet p;
  p.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) p.values.push_back(prior_sampler(rng));
  p.weights.assign(n, 1.0 / static_cast<double>(n));
  return p;
}

ParticleSet reweight(const ParticleSet& p, const std::function<double(double)>& likelihood) {
  ParticleSet out;
  out.values = p.values;
  out.rng_seed = p.rng_seed;
  out.weights.resize(p.weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double l = likelihood(p.values[i]);
    if (!std::isfinite(l) || l < 0.0) throw NumericalError("likelihood must be finite and >= 0");
    out.weights[i] = p.weights[i] * l;
    total += out.weights[i];
  }
  if (total <= 0.0) throw NumericalError("degenerate likelihood: all particle weights are zero");
  for (double& w : out.weights) w /= total;
  return out;
}

double effective_sample_size(const ParticleSet& p) {
  double sum_sq = 0.0;
  for (double w : p.weights) sum_sq += w * w;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

ParticleSet systematic_resample(const ParticleSet& p, std::size_t n, Rng& rng) {
  if (n == 0 || p.size() == 0) throw InputError("systematic resampling needs n >= 1");
  ParticleSet out;
  out.rng_seed = p.rng_seed;
  out.values.reserve(n);
  out.weights.assign(n, 1.0 / static_cast<double>(n));

  const double offset = rng.uniform();
  double cumulative = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pointer = (offset + static_cast<double>(k)) / static_cast<double>(n);
    while (i + 1 < p.size() && cumulative + p.weights[i] <= pointer) {
      cumulative += p.weights[i];
      ++i;
    }
    out.values.push_back(p.values[i]);
  }
  return out;
}

ParticleSet systematic_resample(const ParticleSet& p, Rng& rng) {
  return systematic_resample(p, p.size(), rng);
}

double posterior_mean(const ParticleSet& p) {
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p.weights[i] * p.values[i];
  return mean;
}

double prob_above(const ParticleSet& p, double tau) {
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.values[i] > tau) mass += p.weights[i];
  return mass;
}

void roughen(ParticleSet& p, double spread_fraction, double tau, Rng& rng) {
  if (spread_fraction <= 0.0 || p.values.empty()) return;
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  const double spread = spread_fraction * (*hi - *lo);
  if (spread <= 0.0) return;
  for (double& v : p.values) {
    if (v == 0.0) continue;
    const bool was_raining = v > tau;
    double jittered = v + rng.normal(0.0, spread);
    // keep the particle on its side of the threshold by reflecting
    if (was_raining && jittered <= tau) jittered = 2.0 * tau - jittered;
    if (!was_raining && jittered > tau) jittered = 2.0 * tau - jittered;
    v = std::max(0.0, jittered);
  }
}

}  // namespace rainfuse
