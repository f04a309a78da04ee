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

#ifndef RAINFUSE_PARTICLE_FILTER_HPP
#define RAINFUSE_PARTICLE_FILTER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "rainfuse/rng.hpp"

namespace rainfuse {

/// Weighted intensity samples representing one grid cell's posterior belief.
/// values and weights have equal length; weights are kept normalized to 1.
struct ParticleSet {
  std::vector<double> values;
  std::vector<double> weights;
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return values.size(); }
  bool uniform_weights() const;
};

/// n i.i.d. draws from the prior sampler with uniform weights.
ParticleSet init_particles(const std::function<double(Rng&)>& prior_sampler, std::size_t n, Rng& rng);

/// Bayes reweighting: w_i' proportional to w_i * likelihood(v_i), renormalized.
/// Throws NumericalError if every product is zero.
ParticleSet reweight(const ParticleSet& p, const std::function<double(double)>& likelihood);

/// 1 / sum(w_i^2); ranges from 1 (degenerate) to n (uniform).
double effective_sample_size(const ParticleSet& p);

/// Low-variance systematic resampling with a single uniform offset. Output
/// has n particles with uniform weights; input particle i is copied between
/// floor(n*w_i) and ceil(n*w_i) times. The one-argument form keeps the count.
ParticleSet systematic_resample(const ParticleSet& p, std::size_t n, Rng& rng);
ParticleSet systematic_resample(const ParticleSet& p, Rng& rng);

/// Weighted mean intensity.
double posterior_mean(const ParticleSet& p);

/// Total weight of particles with value strictly above tau.
double prob_above(const ParticleSet& p, double tau);

/// Post-resample roughening: zero-mean Gaussian jitter on nonzero particles,
/// std = spread_fraction * (max - min), clamped at zero. Jitter that would
/// carry a particle across the rain threshold tau is reflected back, so the
/// probability-of-rain summary is invariant under roughening; zero-valued
/// particles stay exactly zero so a dry point mass survives. A fraction of 0
/// recovers pure sequential importance resampling.
void roughen(ParticleSet& p, double spread_fraction, double tau, Rng& rng);

}  // namespace rainfuse

#endif  // RAINFUSE_PARTICLE_FILTER_HPP
