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

#include "shardrisk/partitions.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <string>

namespace shardrisk {

CommitteeLayout::CommitteeLayout(std::vector<std::int64_t> sizes)
    : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw DomainError("a layout needs at least one committee");
  for (std::int64_t s : sizes_) {
    if (s < 1) throw DomainError("committee sizes must be >= 1");
    total_ += s;
  }
}

CommitteeLayout CommitteeLayout::from_split(std::int64_t nodes,
                                            std::int64_t committees) {
  if (committees < 1) throw DomainError("need at least one committee");
  if (nodes < 1) throw DomainError("need at least one node");
  if (committees > nodes) {
    throw DomainError("more committees than nodes: a committee would be empty");
  }
  const std::int64_t n = nodes / committees;
  const std::int64_t r = nodes % committees;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(committees), n);
  std::fill(sizes.end() - r, sizes.end(), n + 1);
  return CommitteeLayout(std::move(sizes));
}

std::vector<SizeGroup> CommitteeLayout::groups() const {
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t s : sizes_) ++counts[s];
  std::vector<SizeGroup> out;
  out.reserve(counts.size());
  for (auto [size, count] : counts) out.push_back({size, count});
  return out;
}

Rate AverageAdversary::rate_for(std::size_t committee) const {
  if (rates.size() == 1) return rates.front();
  return rates.at(committee);
}

void AverageAdversary::validate(const CommitteeLayout& layout) const {
  if (rates.empty()) throw DomainError("average adversary needs a rate");
  if (rates.size() != 1 &&
      static_cast<std::int64_t>(rates.size()) != layout.committee_count()) {
    throw DomainError("need one adversary rate per committee (got " +
                      std::to_string(rates.size()) + " for " +
                      std::to_string(layout.committee_count()) + ")");
  }
}

ExactAdversary ExactAdversary::from_fraction(std::int64_t nodes, Rate p) {
  return ExactAdversary{p.round_times(nodes)};
}

void ExactAdversary::validate(const CommitteeLayout& layout) const {
  if (count < 0 || count > layout.total()) {
    throw DomainError("adversary count must lie in [0, N]");
  }
}

void validate_counts(std::span<const std::int64_t> counts,
                     const CommitteeLayout& layout) {
  if (static_cast<std::int64_t>(counts.size()) != layout.committee_count()) {
    throw DomainError("count vector length does not match the layout");
  }
  for (std::size_t mu = 0; mu < counts.size(); ++mu) {
    if (counts[mu] < 0 || counts[mu] > layout.size(mu)) {
      throw DomainError("adversarial count exceeds its committee size");
    }
  }
}

LogProb multinomial_log_pmf(std::span<const std::int64_t> counts,
                            std::int64_t nodes,
                            std::span<const Rate> committee_probs) {
  if (counts.size() != committee_probs.size()) {
    throw DomainError("one committee probability per count is required");
  }
  double prob_sum = 0.0;
  for (Rate p : committee_probs) prob_sum += p.value();
  if (std::abs(prob_sum - 1.0) > 1e-12) {
    throw DomainError("committee probabilities must sum to 1");
  }
  std::int64_t count_sum = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw DomainError("committee counts must be non-negative");
    count_sum += c;
  }
  if (count_sum != nodes) return LogProb::zero();

  double log_p = log_factorial(nodes);
  for (std::size_t mu = 0; mu < counts.size(); ++mu) {
    log_p -= log_factorial(counts[mu]);
    if (counts[mu] == 0) continue;
    const double p = committee_probs[mu].value();
    if (p == 0.0) return LogProb::zero();
    log_p += static_cast<double>(counts[mu]) * std::log(p);
  }
  return LogProb::from_log(log_p);
}

LogProb product_binomial_log_pmf(std::span<const std::int64_t> counts,
                                 const CommitteeLayout& layout,
                                 const AverageAdversary& adversary) {
  validate_counts(counts, layout);
  adversary.validate(layout);
  double log_p = 0.0;
  for (std::size_t mu = 0; mu < counts.size(); ++mu) {
    log_p += binomial_log_pmf(layout.size(mu), adversary.rate_for(mu).value(),
                              counts[mu]);
  }
  return LogProb::from_log(log_p);
}

LogProb multivariate_hypergeometric_log_pmf(
    std::span<const std::int64_t> counts, const CommitteeLayout& layout,
    std::int64_t adversaries) {
  validate_counts(counts, layout);
  ExactAdversary{adversaries}.validate(layout);
  std::int64_t sum = 0;
  for (std::int64_t c : counts) sum += c;
  if (sum != adversaries) return LogProb::zero();
  const double q =
      static_cast<double>(adversaries) / static_cast<double>(layout.total());
  double log_p = -binomial_log_pmf(layout.total(), q, adversaries);
  for (std::size_t mu = 0; mu < counts.size(); ++mu) {
    log_p += binomial_log_pmf(layout.size(mu), q, counts[mu]);
  }
  return LogProb::from_log(std::min(0.0, log_p));
}

namespace {

void check_marginal_args(std::int64_t n_alpha, std::int64_t committee_size,
                         std::int64_t total, std::int64_t adversaries) {
  if (n_alpha < 0 || committee_size < 0 || total < 0 || adversaries < 0) {
    throw DomainError("hypergeometric arguments must be non-negative");
  }
  if (committee_size > total || adversaries > total) {
    throw DomainError("committee size and adversary count must not exceed N");
  }
}

bool in_marginal_support(std::int64_t n_alpha, std::int64_t committee_size,
                         std::int64_t total, std::int64_t adversaries) {
  return n_alpha <= committee_size && n_alpha <= adversaries &&
         adversaries - n_alpha <= total - committee_size;
}

}  // namespace

LogProb hypergeometric_marginal_log_pmf(std::int64_t n_alpha,
                                        std::int64_t committee_size,
                                        std::int64_t total,
                                        std::int64_t adversaries) {
  check_marginal_args(n_alpha, committee_size, total, adversaries);
  if (!in_marginal_support(n_alpha, committee_size, total, adversaries)) {
    return LogProb::zero();
  }
  if (total == 0) return LogProb::one();
  // Each binomial coefficient is written as a Binomial(., M/N) pmf, whose
  // q^j (1-q)^(n-j) factors cancel; unlike lgamma differences this keeps
  // full relative accuracy for large N.
  const double q = static_cast<double>(adversaries) / static_cast<double>(total);
  const double log_p =
      binomial_log_pmf(committee_size, q, n_alpha) +
      binomial_log_pmf(total - committee_size, q, adversaries - n_alpha) -
      binomial_log_pmf(total, q, adversaries);
#ifndef NDEBUG
  const double other = hypergeometric_marginal_log_pmf_by_adversaries(
                           n_alpha, committee_size, total, adversaries)
                           .log();
  assert(std::abs(std::exp(log_p) - std::exp(other)) <= 1e-12);
#endif
  return LogProb::from_log(std::min(0.0, log_p));
}

LogProb hypergeometric_marginal_log_pmf_by_adversaries(
    std::int64_t n_alpha, std::int64_t committee_size, std::int64_t total,
    std::int64_t adversaries) {
  check_marginal_args(n_alpha, committee_size, total, adversaries);
  if (!in_marginal_support(n_alpha, committee_size, total, adversaries)) {
    return LogProb::zero();
  }
  if (total == 0) return LogProb::one();
  const double q =
      static_cast<double>(committee_size) / static_cast<double>(total);
  return LogProb::from_log(std::min(
      0.0, binomial_log_pmf(adversaries, q, n_alpha) +
               binomial_log_pmf(total - adversaries, q, committee_size - n_alpha) -
               binomial_log_pmf(total, q, committee_size)));
}

}  // namespace shardrisk
