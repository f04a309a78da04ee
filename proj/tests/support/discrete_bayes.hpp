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

#ifndef RAINFUSE_TESTS_DISCRETE_BAYES_HPP
#define RAINFUSE_TESTS_DISCRETE_BAYES_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rainfuse::testing {

// Exact Bayes recursion on a small discretized intensity support. This is the
// reference the particle filter is checked against; it shares no code with
// the implementation under test.
class DiscreteBayes {
 public:
  DiscreteBayes(std::vector<double> support, std::vector<double> probabilities)
      : support_(std::move(support)), probs_(std::move(probabilities)) {
    if (support_.size() != probs_.size() || support_.empty())
      throw std::invalid_argument("support/probability size mismatch");
    normalize();
  }

  void update(const std::function<double(double)>& likelihood) {
    for (std::size_t i = 0; i < support_.size(); ++i) probs_[i] *= likelihood(support_[i]);
    normalize();
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) m += support_[i] * probs_[i];
    return m;
  }

  double prob_above(double tau) const {
    double p = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i)
      if (support_[i] > tau) p += probs_[i];
    return p;
  }

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& probabilities() const { return probs_; }

  // Total variation distance between this posterior and a weighted particle
  // set whose values lie on (or near) the support; particle mass is assigned
  // to the nearest support point.
  double total_variation(const std::vector<double>& values, const std::vector<double>& weights) const {
    std::vector<double> mass(support_.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::abs(values[i] - support_[0]);
      for (std::size_t j = 1; j < support_.size(); ++j) {
        const double d = std::abs(values[i] - support_[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      mass[best] += weights[i];
    }
    double tv = 0.0;
    for (std::size_t j = 0; j < support_.size(); ++j) tv += std::abs(mass[j] - probs_[j]);
    return tv / 2.0;
  }

 private:
  void normalize() {
    double total = 0.0;
    for (double p : probs_) total += p;
    if (total <= 0.0) throw std::runtime_error("discrete Bayes update annihilated all mass");
    for (double& p : probs_) p /= total;
  }

  std::vector<double> support_;
  std::vector<double> probs_;
};

}  // namespace rainfuse::testing

#endif  // RAINFUSE_TESTS_DISCRETE_BAYES_HPP
