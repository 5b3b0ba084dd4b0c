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

// Saddle-point asymptotics for the exact-count (hypergeometric) failure
// probability.
//
// The survival probability is a ratio of generating-function coefficients.
// For large N it is approximated by tilting every committee's count to a
// Binomial(N_mu, Q) truncated at floor(A N_mu), with Q chosen so that the
// truncated means add up to M:
//
//   P(no committee fails) ~ sqrt(N P (1-P) / sum_mu Var_mu) * exp(N Psi[Q])
//   Psi[Q] = D(P || Q) + (1/N) sum_mu log P_Q(X_mu <= floor(A N_mu))
//
// where P = M / N.

#ifndef SHARDRISK_SADDLE_HPP_
#define SHARDRISK_SADDLE_HPP_

#include <cstdint>

#include "shardrisk/failure.hpp"
#include "shardrisk/partitions.hpp"
#include "shardrisk/probcore.hpp"

namespace shardrisk {

/// Moments of Binomial(N_mu, Q) conditioned on X <= cap.
struct TruncatedBinomialSummary {
  LogProb log_mass;  ///< log P(X <= cap)
  double mean = 0.0;
  double second_moment = 0.0;

  double variance() const { return second_moment - mean * mean; }
};

TruncatedBinomialSummary truncated_binomial_summary(std::int64_t committee_size,
                                                    double q, Rate threshold);

/// Same, with the cap given directly (cap >= size means untruncated).
TruncatedBinomialSummary truncated_binomial_summary_capped(
    std::int64_t committee_size, double q, std::int64_t cap);

struct SaddleSolution {
  double q = 0.0;
  double psi = 0.0;           ///< Psi[Q]
  double variance_sum = 0.0;  ///< sum_mu Var of the truncated Q-binomial
  double mean_residual = 0.0; ///< |P - (1/N) sum_mu mean_mu|
  bool converged = false;
  int iterations = 0;
  /// Committees with floor(A N_mu) >= N_mu.
  std::int64_t unconstrained_committees = 0;
};

struct SaddleOptions {
  double bracket_low = 1e-12;
  double bracket_high = 1.0 - 1e-12;
  double tolerance = 1e-12;
  int max_iterations = 200;
};

/// Raised when the saddle equation has no solution (P >= A).
class NoSaddleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Solves P = (1/N) sum_mu <X_mu>_{A,Q,N_mu} for Q by bisection; the
/// truncated mean is strictly increasing in Q.
SaddleSolution solve_saddle(const CommitteeLayout& layout, double p,
                            Rate threshold, const SaddleOptions& options = {});

/// sqrt(N P (1-P) / variance_sum).
double saddle_prefactor(const CommitteeLayout& layout, double p,
                        const SaddleSolution& solution);

/// The prefactor in its contour-integral form
/// (z0(1) / z0(A)) sqrt(Psi''_1(z0(1)) / Psi''_A(z0(A))), with the second
/// derivatives built from the truncated generating function and its
/// z-derivatives. Agrees with saddle_prefactor at the saddle.
double saddle_prefactor_contour_form(const CommitteeLayout& layout, double p,
                                     Rate threshold,
                                     const SaddleSolution& solution);

/// Leading-order asymptotic failure probability for exactly M adversaries.
/// Requires 0 < M < N and M / N < A.
DeltaResult delta_asymptotic(const CommitteeLayout& layout, std::int64_t adversaries,
                             Rate threshold);

/// Same, also returning the saddle it was evaluated at.
DeltaResult delta_asymptotic(const CommitteeLayout& layout, std::int64_t adversaries,
                             Rate threshold, SaddleSolution& solution_out);

}  // namespace shardrisk

#endif  // SHARDRISK_SADDLE_HPP_
