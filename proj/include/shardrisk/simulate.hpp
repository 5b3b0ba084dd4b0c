// Copyright 2026 The shardrisk Authors.
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

// Seeded Monte Carlo estimates of the failure probability.
//
// Every sample draws from its own stream keyed by (seed, sample index), so
// an estimate depends only on (query, samples, seed) and not on how the
// samples are split across worker threads.

#ifndef SHARDRISK_SIMULATE_HPP_
#define SHARDRISK_SIMULATE_HPP_

#include <cstdint>
#include <vector>

#include "shardrisk/failure.hpp"
#include "shardrisk/partitions.hpp"
#include "shardrisk/probcore.hpp"

namespace shardrisk {

/// SplitMix64 sequence started from a hash of (seed, index).
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_double();

 private:
  std::uint64_t state_;
};

/// Independent Binomial(N_mu, P(alpha|mu)) counts by table inversion.
class AverageSampler {
 public:
  AverageSampler(const CommitteeLayout& layout, const AverageAdversary& adversary);

  CountVector draw(SampleStream& stream) const;
  /// Whether the draw that `draw` would make on the same stream has a
  /// committee holding at least floor(A N_mu) + 1 adversaries; stops at the
  /// first failing committee.
  bool draw_fails(SampleStream& stream, Rate threshold) const;

 private:
  std::vector<std::int64_t> sizes_;
  std::vector<std::size_t> table_of_;       // committee -> table
  std::vector<std::vector<double>> cdfs_;  // one per distinct (size, rate)
};

/// Multivariate hypergeometric counts: committee mu receives
/// Hypergeometric(remaining nodes, remaining adversaries, N_mu), each drawn
/// by inversion outward from the mode.
class ExactSampler {
 public:
  ExactSampler(const CommitteeLayout& layout, std::int64_t adversaries);

  CountVector draw(SampleStream& stream) const;
  bool draw_fails(SampleStream& stream, Rate threshold) const;

 private:
  std::int64_t draw_one(double u, std::int64_t pool, std::int64_t marked,
                        std::int64_t draws) const;

  std::vector<std::int64_t> sizes_;
  std::int64_t total_ = 0;
  std::int64_t adversaries_ = 0;
  std::vector<double> log_factorials_;  // 0..N
};

CountVector sample_counts_average(const CommitteeLayout& layout,
                                  const AverageAdversary& adversary,
                                  SampleStream& stream);

CountVector sample_counts_exact(const CommitteeLayout& layout, std::int64_t adversaries,
                                SampleStream& stream);

struct SimulationPlan {
  FailureQuery query;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct DeltaEstimate {
  std::int64_t failures = 0;
  std::int64_t samples = 0;
  double delta_hat = 0.0;
  double std_error = 0.0;  ///< sqrt(delta_hat (1 - delta_hat) / samples)
  /// 95% interval: normal approximation, or for fewer than 5 failures (or
  /// successes) the rule of three at 0 and exact Poisson limits for 1 to 4.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

DeltaEstimate make_estimate(std::int64_t failures, std::int64_t samples);

DeltaEstimate estimate_delta(const SimulationPlan& plan);

}  // namespace shardrisk

#endif  // SHARDRISK_SIMULATE_HPP_
