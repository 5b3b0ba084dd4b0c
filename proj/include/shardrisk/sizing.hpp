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

// Committee sizing: how many committees N nodes support at a target failure
// probability, how large K committees must be, and the analytic bracket on
// that size.

#ifndef SHARDRISK_SIZING_HPP_
#define SHARDRISK_SIZING_HPP_

#include <cstdint>

#include "shardrisk/failure.hpp"
#include "shardrisk/probcore.hpp"

namespace shardrisk {

struct SizingResult {
  std::int64_t K = 1;
  std::int64_t n = 0;
  std::int64_t r = 0;
  double prob = 0.0;
  std::int64_t iterations = 0;  ///< number of K values evaluated
};

/// delta(K) = 1 - CDF_n^(K-r) CDF_{n+1}^r for the N = nK + r split under
/// the average model.
DeltaResult split_delta(std::int64_t nodes, std::int64_t committees, Rate threshold,
                        Rate adversary_rate);

/// Largest K in [1, N] with delta(K) <= target. K = 1 is always admissible
/// and reported with prob = 0, the initial state of the sizing loop.
SizingResult max_committees(std::int64_t nodes, Rate delta_target, Rate threshold,
                            Rate adversary_rate);

/// The sizing loop stopped at the first K whose delta exceeds the target.
/// Differs from max_committees where delta(K) is not monotone in K.
SizingResult max_committees_first_exceedance(std::int64_t nodes, Rate delta_target,
                                             Rate threshold, Rate adversary_rate);

enum class AdversaryMode { kAverage, kExact };

struct MinSizeOptions {
  std::int64_t n_max = 1000000;
  /// Exact-count layouts up to this many nodes are evaluated by the DP.
  std::int64_t exact_max_nodes = 100000;
};

struct MinSizeResult {
  std::int64_t n = 0;      ///< smallest n feasible at both n and n+1
  std::int64_t raw_n = 0;  ///< smallest feasible n
  double delta = 0.0;      ///< failure probability at n
  /// Method that produced `delta`; for the exact model the DP up to
  /// exact_max_nodes and the asymptotic above.
  Method method = Method::kExactBinomial;
  std::int64_t evaluations = 0;
};

/// Raised when no n <= n_max meets the target.
class NotFoundError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Smallest committee size for K equal committees. The exact model places
/// M = round(nK P) adversaries.
MinSizeResult min_committee_size(std::int64_t committees, Rate delta_target,
                                 Rate threshold, Rate adversary_rate,
                                 AdversaryMode mode, const MinSizeOptions& = {});

/// Same search driven by a single evaluation method, e.g. a bound. Methods
/// whose precondition fails at some n treat that n as infeasible.
MinSizeResult min_committee_size_by(Method method, std::int64_t committees,
                                    Rate delta_target, Rate threshold,
                                    Rate adversary_rate, const MinSizeOptions& = {});

struct SizeBracket {
  double lower = 0.0;
  double upper = 0.0;
  double f_tilde = 0.0;
};

/// -log(1 - (1 - delta)^(1/K)), stable for K up to 1e9 and beyond.
double log_target_term(double delta_target, std::int64_t committees);

/// max over n in [1, scan_limit] of D(A + 1/n || P) +
/// log((A + 1/n)(1 - A - 1/n)) / (2n), over arguments inside (P, 1).
double f_tilde(Rate threshold, Rate adversary_rate, std::int64_t scan_limit = 10000);

SizeBracket size_bracket(std::int64_t committees, Rate delta_target, Rate threshold,
                         Rate adversary_rate, std::int64_t scan_limit = 10000);

struct BracketExpansions {
  double large_k = 0.0;      ///< through the K^-4 term
  double small_delta = 0.0;  ///< through the delta^1 term
  double exact = 0.0;        ///< log_target_term
};

BracketExpansions bracket_expansions(double delta_target, std::int64_t committees);

}  // namespace shardrisk

#endif  // SHARDRISK_SIZING_HPP_
