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

// Failure probabilities of a committee partition.
//
// A committee of size N_mu fails when it holds at least floor(A N_mu) + 1
// adversarial nodes; the partition fails when any committee does. This
// header provides the exact failure probability under both adversary models
// and the family of Chernoff-type and union bounds around it.

#ifndef SHARDRISK_FAILURE_HPP_
#define SHARDRISK_FAILURE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shardrisk/partitions.hpp"
#include "shardrisk/probcore.hpp"

namespace shardrisk {

enum class Method {
  kExactBinomial,
  kExactHypergeometric,
  kTheorem1Lower,
  kTheorem1UpperAsh,
  kTheorem1UpperFerrante,
  kUnionRandom,
  kUnionRandomSimple,
  kUnionFixed,
  kUnionHyperExact,
  kUnionHyperHoeffding,
  kAsymptotic,
  kMonteCarlo,
};

/// Stable external name, e.g. "exact-binomial" or "theorem1-upper-ash".
std::string_view method_tag(Method method);
std::optional<Method> method_from_tag(std::string_view tag);
std::span<const Method> all_methods();

struct Diagnostics {
  /// The raw value lay outside [0,1] and was clamped.
  bool clamped = false;
  /// Every committee satisfied the method's precondition.
  bool precondition_satisfied = true;
  /// log of the raw (unclamped) failure quantity; may be > 0 for bounds.
  double raw_log_value = kNegInf;
  /// Committees whose threshold exceeds their size (they can never fail),
  /// or, for the asymptotic, committees left unconstrained by the threshold.
  std::int64_t excluded_committees = 0;
  std::string note;
};

/// A failure probability delta in [0,1] with its log-domain companions.
struct DeltaResult {
  double delta = 0.0;
  double log_delta = kNegInf;
  double log_survival = 0.0;  ///< log(1 - delta)
  Method method = Method::kExactBinomial;
  Diagnostics diagnostics;

  static DeltaResult from_log_survival(Method method, LogProb survival);
  static DeltaResult from_log_failure(Method method, LogProb failure);
  /// Bounds and approximations whose raw log-value may exceed 0.
  static DeltaResult from_raw_log(Method method, double raw_log_failure);
};

struct FailureQuery {
  CommitteeLayout layout;
  AdversaryModel adversary;
  Rate threshold;  ///< A

  const AverageAdversary& average() const;
  const ExactAdversary& exact() const;
};

enum class Strictness {
  kFlagAndDegrade,  ///< violating committees get trivial per-committee bounds
  kStrict,          ///< violations throw PreconditionError
};

class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// floor(A N_mu) + 1, the adversarial count at which a committee fails.
std::int64_t failure_threshold(Rate threshold, std::int64_t committee_size);

/// Q(mu) = (floor(A N_mu) + 1) / N_mu.
double threshold_fraction(Rate threshold, std::int64_t committee_size);

/// Independent per-committee counts: 1 - prod_mu P(X_mu <= floor(A N_mu)).
DeltaResult delta_exact_binomial(const FailureQuery& query);

struct ExactHypergeometricOptions {
  /// Layouts above this many nodes are rejected.
  std::int64_t max_nodes = 100000;
};

/// Exactly M adversaries. The survival probability is the z^M coefficient of
/// prod_mu sum_{j <= floor(A N_mu)} C(N_mu, j) z^j divided by C(N, M); the
/// coefficient is extracted by convolving committee rows one at a time.
DeltaResult delta_exact_hypergeometric(const FailureQuery& query,
                                       const ExactHypergeometricOptions& = {});

struct Theorem1Bounds {
  DeltaResult lower;
  DeltaResult upper_ash;
  DeltaResult upper_ferrante;
};

Theorem1Bounds theorem1_bounds(const FailureQuery& query,
                               Strictness strictness = Strictness::kFlagAndDegrade);

struct UnionRandomBounds {
  DeltaResult phi_form;     ///< sum_mu exp(-N Phi)
  DeltaResult simple_form;  ///< sum_mu exp(-N P(mu) (1 - exp(-D)))
};

/// Union bounds when every node picks its committee independently with
/// probability P(mu). Q(mu) is evaluated at `reference_sizes[mu]`; when that
/// span is empty the expected size max(1, round(N P(mu))) is used.
UnionRandomBounds union_bound_random_sizes(
    std::int64_t nodes, std::span<const Rate> committee_probs,
    const AverageAdversary& adversary, Rate threshold,
    std::span<const std::int64_t> reference_sizes = {},
    Strictness strictness = Strictness::kFlagAndDegrade);

/// sum_mu exp(-N_mu D(Q(mu) || P(alpha|mu))).
DeltaResult union_bound_fixed_sizes(
    const FailureQuery& query,
    Strictness strictness = Strictness::kFlagAndDegrade);

struct HypergeometricUnionBounds {
  DeltaResult exact_tail_sum;
  DeltaResult hoeffding;
};

HypergeometricUnionBounds union_bound_hypergeometric(
    const FailureQuery& query,
    Strictness strictness = Strictness::kFlagAndDegrade);

/// log P(X >= threshold) for the univariate hypergeometric marginal.
LogProb hypergeometric_marginal_log_tail(std::int64_t threshold,
                                         std::int64_t committee_size,
                                         std::int64_t total,
                                         std::int64_t adversaries);

}  // namespace shardrisk

#endif  // SHARDRISK_FAILURE_HPP_
