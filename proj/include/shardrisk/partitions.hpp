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

// Committee layouts, adversary models and the distributions over adversarial
// counts per committee: multinomial committee sizes, independent binomial
// counts, and the multivariate hypergeometric with its univariate marginal.

#ifndef SHARDRISK_PARTITIONS_HPP_
#define SHARDRISK_PARTITIONS_HPP_

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "shardrisk/probcore.hpp"

namespace shardrisk {

/// Distinct committee size together with how many committees have it.
struct SizeGroup {
  std::int64_t size = 0;
  std::int64_t count = 0;
};

/// Fixed committee sizes N_1..N_K with total N. Every size is >= 1.
class CommitteeLayout {
 public:
  explicit CommitteeLayout(std::vector<std::int64_t> sizes);

  /// K - r committees of size floor(N/K) followed by r = N mod K committees
  /// of size floor(N/K) + 1.
  static CommitteeLayout from_split(std::int64_t nodes, std::int64_t committees);

  std::span<const std::int64_t> sizes() const { return sizes_; }
  std::int64_t size(std::size_t committee) const { return sizes_.at(committee); }
  std::int64_t total() const { return total_; }
  std::int64_t committee_count() const {
    return static_cast<std::int64_t>(sizes_.size());
  }
  /// Distinct sizes in ascending order.
  std::vector<SizeGroup> groups() const;

  friend bool operator==(const CommitteeLayout&, const CommitteeLayout&) = default;

 private:
  std::vector<std::int64_t> sizes_;
  std::int64_t total_ = 0;
};

/// Each node is adversarial independently. One rate is broadcast to every
/// committee; otherwise one rate per committee.
struct AverageAdversary {
  std::vector<Rate> rates;

  static AverageAdversary uniform(Rate p) { return AverageAdversary{{p}}; }
  Rate rate_for(std::size_t committee) const;
  void validate(const CommitteeLayout& layout) const;
};

/// Exactly `count` adversarial nodes in the whole network.
struct ExactAdversary {
  std::int64_t count = 0;

  /// M = round(N * P), half to even.
  static ExactAdversary from_fraction(std::int64_t nodes, Rate p);
  void validate(const CommitteeLayout& layout) const;
};

using AdversaryModel = std::variant<AverageAdversary, ExactAdversary>;

/// Adversarial nodes per committee, N^alpha_1..N^alpha_K.
using CountVector = std::vector<std::int64_t>;

void validate_counts(std::span<const std::int64_t> counts,
                     const CommitteeLayout& layout);

LogProb multinomial_log_pmf(std::span<const std::int64_t> counts,
                            std::int64_t nodes,
                            std::span<const Rate> committee_probs);

LogProb product_binomial_log_pmf(std::span<const std::int64_t> counts,
                                 const CommitteeLayout& layout,
                                 const AverageAdversary& adversary);

LogProb multivariate_hypergeometric_log_pmf(
    std::span<const std::int64_t> counts, const CommitteeLayout& layout,
    std::int64_t adversaries);

/// P(N^alpha_mu = n_alpha | N_mu; M) as C(N_mu, n) C(N - N_mu, M - n) / C(N, M).
LogProb hypergeometric_marginal_log_pmf(std::int64_t n_alpha,
                                        std::int64_t committee_size,
                                        std::int64_t total,
                                        std::int64_t adversaries);

/// The same marginal in its second form C(M, n) C(N - M, N_mu - n) / C(N, N_mu).
LogProb hypergeometric_marginal_log_pmf_by_adversaries(
    std::int64_t n_alpha, std::int64_t committee_size, std::int64_t total,
    std::int64_t adversaries);

}  // namespace shardrisk

#endif  // SHARDRISK_PARTITIONS_HPP_
