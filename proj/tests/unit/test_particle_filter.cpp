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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "rainfuse/particle_filter.hpp"
#include "rainfuse/sensor_model.hpp"
#include "support/discrete_bayes.hpp"

using namespace rainfuse;

TEST_CASE("init_particles draws from the prior with uniform weights") {
  Rng rng(1);
  const auto p = init_particles([](Rng&) { return 2.0; }, 4, rng);
  REQUIRE(p.size() == 4);
  for (double v : p.values) CHECK(v == 2.0);
  for (double w : p.weights) CHECK(w == 0.25);
}

TEST_CASE("init_particles reproduces the prior mean at scale") {
  Rng rng(2);
  const auto p = init_particles([](Rng& g) { return g.uniform(0.0, 10.0); }, 100000, rng);
  CHECK(posterior_mean(p) == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("init_particles rejects an empty set") {
  Rng rng(3);
  CHECK_THROWS_AS(init_particles([](Rng&) { return 0.0; }, 0, rng), InputError);
}

TEST_CASE("reweight with a constant likelihood is the identity") {
  Rng rng(4);
  auto p = init_particles([](Rng& g) { return g.uniform(0.0, 5.0); }, 64, rng);
  const auto q = reweight(p, [](double) { return 1.0; });
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(q.values[i] == p.values[i]);
    CHECK(q.weights[i] == doctest::Approx(p.weights[i]).epsilon(1e-14));
  }
}

TEST_CASE("reweight performs the two-particle Bayes update") {
  ParticleSet p;
  p.values = {0.0, 5.0};
  p.weights = {0.5, 0.5};
  const WiperSensorModel sensor{0.931, 0.982, 0.1};
  const auto q = reweight(p, [&](double v) { return likelihood_given_detected(true, v, sensor); });
  // independent route: hand-normalized likelihood pair {0.018, 0.931}
  const double l_dry = 1.0 - 0.982;
  const double l_rain = 0.931;
  CHECK(q.weights[0] == doctest::Approx(l_dry / (l_dry + l_rain)).epsilon(1e-12));
  CHECK(q.weights[1] == doctest::Approx(l_rain / (l_dry + l_rain)).epsilon(1e-12));
  CHECK(q.weights[0] == doctest::Approx(0.01897).epsilon(1e-3));
  CHECK(q.weights[1] == doctest::Approx(0.98103).epsilon(1e-3));
}

TEST_CASE("reweight raises on an annihilating likelihood") {
  ParticleSet p;
  p.values = {1.0, 2.0};
  p.weights = {0.5, 0.5};
  CHECK_THROWS_AS(reweight(p, [](double) { return 0.0; }), NumericalError);
  CHECK_THROWS_AS(reweight(p, [](double) { return -1.0; }), NumericalError);
}

TEST_CASE("reweight is order-independent across evidence") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = init_particles([](Rng& g) { return g.uniform(0.0, 10.0); }, 128, rng);
    auto l1 = [](double v) { return 0.2 + 0.7 * (v > 3.0 ? 1.0 : 0.1); };
    auto l2 = [](double v) { return 0.9 - 0.05 * v / 10.0; };
    const auto sequential = reweight(reweight(p, l1), l2);
    const auto product = reweight(p, [&](double v) { return l1(v) * l2(v); });
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(std::abs(sequential.weights[i] - product.weights[i]) < 1e-9);
  }
}

TEST_CASE("effective sample size spans [1, n]") {
  ParticleSet uniform;
  uniform.values.assign(100, 1.0);
  uniform.weights.assign(100, 0.01);
  CHECK(effective_sample_size(uniform) == doctest::Approx(100.0).epsilon(1e-9));

  ParticleSet degenerate;
  degenerate.values = {1.0, 2.0, 3.0};
  degenerate.weights = {1.0, 0.0, 0.0};
  CHECK(effective_sample_size(degenerate) == doctest::Approx(1.0).epsilon(1e-12));

  ParticleSet mixed;
  mixed.values = {1.0, 2.0, 3.0};
  mixed.weights = {0.5, 0.25, 0.25};
  CHECK(effective_sample_size(mixed) == doctest::Approx(1.0 / 0.375).epsilon(1e-12));
}

TEST_CASE("ess never increases when reweighting from uniform weights") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = init_particles([](Rng& g) { return g.uniform(0.0, 10.0); }, 64, rng);
    const double scale = rng.uniform(0.5, 2.0);
    auto q = reweight(p, [scale](double v) { return 0.05 + scale * v; });
    CHECK(effective_sample_size(q) <= effective_sample_size(p) + 1e-9);
  }
}

TEST_CASE("systematic resampling preserves an equal-weight multiset") {
  Rng init_rng(7);
  auto p = init_particles([](Rng& g) { return g.uniform(0.0, 10.0); }, 50, init_rng);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto q = systematic_resample(p, rng);
    auto sorted_in = p.values;
    auto sorted_out = q.values;
    std::sort(sorted_in.begin(), sorted_in.end());
    std::sort(sorted_out.begin(), sorted_out.end());
    CHECK(sorted_in == sorted_out);
  }
}

TEST_CASE("systematic resampling copies {0.75, 0.25} as exactly {3, 1} for any offset") {
  ParticleSet p;
  p.values = {1.0, 2.0};
  p.weights = {0.75, 0.25};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto q = systematic_resample(p, 4, rng);
    REQUIRE(q.values.size() == 4);
    const auto copies_of_first = std::count(q.values.begin(), q.values.end(), 1.0);
    CHECK(copies_of_first == 3);
    CHECK(std::count(q.values.begin(), q.values.end(), 2.0) == 1);
  }
}

TEST_CASE("systematic resampling copy counts stay within floor/ceil of n*w") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_index(63));
    ParticleSet p;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p.values.push_back(static_cast<double>(i));
      p.weights.push_back(rng.uniform(0.0, 1.0) + 1e-9);
      total += p.weights.back();
    }
    for (double& w : p.weights) w /= total;
    const auto q = systematic_resample(p, rng);
    std::map<double, int> counts;
    for (double v : q.values) ++counts[v];
    for (std::size_t i = 0; i < n; ++i) {
      const double expected = static_cast<double>(n) * p.weights[i];
      const int count = counts.count(static_cast<double>(i)) ? counts[static_cast<double>(i)] : 0;
      CHECK(count >= static_cast<int>(std::floor(expected)) - 0);
      CHECK(count <= static_cast<int>(std::ceil(expected)));
    }
  }
}

TEST_CASE("systematic resampling is unbiased on a two-particle set") {
  ParticleSet p;
  p.values = {1.0, 0.0};
  p.weights = {0.6, 0.4};
  double total_fraction = 0.0;
  const int trials = 10000;
  Rng rng(9);
  for (int i = 0; i < trials; ++i) {
    const auto q = systematic_resample(p, rng);
    total_fraction += static_cast<double>(std::count(q.values.begin(), q.values.end(), 1.0)) /
                      static_cast<double>(q.values.size());
  }
  CHECK(total_fraction / trials == doctest::Approx(0.6).epsilon(0.0167));
}

TEST_CASE("systematic resampling preserves the posterior mean in expectation") {
  Rng rng(10);
  auto p = init_particles([](Rng& g) { return g.uniform(0.0, 10.0); }, 64, rng);
  p = reweight(p, [](double v) { return 0.1 + v; });
  const double target = posterior_mean(p);
  double sum = 0.0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const auto q = systematic_resample(p, rng);
    sum += posterior_mean(q);
  }
  CHECK(std::abs(sum / trials - target) / target < 0.01);
}

TEST_CASE("posterior_mean is the weighted mean") {
  ParticleSet single;
  single.values = {3.3};
  single.weights = {1.0};
  CHECK(posterior_mean(single) == 3.3);

  ParticleSet pair;
  pair.values = {0.0, 10.0};
  pair.weights = {0.5, 0.5};
  CHECK(posterior_mean(pair) == 5.0);

  ParticleSet triple;
  triple.values = {1.0, 2.0, 3.0};
  triple.weights = {0.2, 0.3, 0.5};
  CHECK(posterior_mean(triple) == doctest::Approx(2.3).epsilon(1e-12));
}

TEST_CASE("prob_above sums the weights of strictly wetter particles") {
  ParticleSet dry;
  dry.values.assign(10, 0.0);
  dry.weights.assign(10, 0.1);
  CHECK(prob_above(dry, 0.1) == 0.0);

  ParticleSet wet;
  wet.values.assign(10, 5.0);
  wet.weights.assign(10, 0.1);
  CHECK(prob_above(wet, 0.1) == doctest::Approx(1.0).epsilon(1e-12));

  ParticleSet mixed;
  mixed.values = {0.0, 5.0};
  mixed.weights = {0.3, 0.7};
  CHECK(prob_above(mixed, 0.1) == 0.7);
}

TEST_CASE("roughening leaves zeros alone and can be disabled") {
  ParticleSet p;
  p.values = {0.0, 1.0, 2.0, 0.0};
  p.weights = {0.25, 0.25, 0.25, 0.25};
  Rng rng(11);
  auto q = p;
  roughen(q, 0.0, 0.1, rng);
  CHECK(q.values == p.values);
  roughen(q, 0.1, 0.1, rng);
  CHECK(q.values[0] == 0.0);
  CHECK(q.values[3] == 0.0);
  for (double v : q.values) CHECK(v >= 0.0);
}

TEST_CASE("roughening never moves a particle across the rain threshold") {
  const double tau = 0.1;
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    ParticleSet p;
    for (int i = 0; i < 50; ++i) {
      const double u = rng.uniform();
      p.values.push_back(u < 0.3 ? 0.0 : (u < 0.6 ? rng.uniform(0.0, tau) : rng.uniform(tau, 12.0)));
      p.weights.push_back(0.02);
    }
    const double before = prob_above(p, tau);
    roughen(p, 0.05, tau, rng);
    CHECK(prob_above(p, tau) == before);
    for (double v : p.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("particle posterior tracks the exact discrete recursion") {
  // 8-point support, one update: the reweighted particle mass must match the
  // exact Bayes posterior to Monte Carlo accuracy.
  std::vector<double> support{0.0, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  std::vector<double> prior{0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  testing::DiscreteBayes oracle(support, prior);

  Rng rng(12);
  auto p = init_particles(
      [&](Rng& g) {
        const double u = g.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
          acc += prior[i];
          if (u < acc) return support[i];
        }
        return support.back();
      },
      10000, rng);

  const WiperSensorModel sensor{0.931, 0.982, 0.1};
  auto likelihood = [&](double v) { return likelihood_given_detected(false, v, sensor); };
  oracle.update(likelihood);
  p = reweight(p, likelihood);
  CHECK(oracle.total_variation(p.values, p.weights) < 0.03);
  CHECK(posterior_mean(p) == doctest::Approx(oracle.mean()).epsilon(0.05));
}
