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

// Log-domain probability primitives shared by every other module.
//
// Probabilities cross module boundaries as LogProb values. Linear values are
// produced only when results are presented.

#ifndef SHARDRISK_PROBCORE_HPP_
#define SHARDRISK_PROBCORE_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace shardrisk {

/// Raised when an argument lies outside the mathematical domain of an
/// operation (k > n, a rate outside [0,1], an empty layout, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Text that is not a rate at all, as opposed to a rate outside [0,1].
class RateSyntaxError : public DomainError {
 public:
  using DomainError::DomainError;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Natural logarithm of a probability. Probability 0 is the log-value -inf.
class LogProb {
 public:
  /// Probability 1.
  constexpr LogProb() = default;

  /// Accepts `log_value <= 0`. Positive values within 1e-12 are rounding
  /// noise from a sum of probabilities and are snapped to 0.
  static LogProb from_log(double log_value);
  static LogProb from_linear(double probability);

  static constexpr LogProb zero() { return LogProb(kNegInf, Unchecked{}); }
  static constexpr LogProb one() { return LogProb(); }

  constexpr double log() const { return value_; }
  double linear() const;
  constexpr bool is_zero() const { return value_ == kNegInf; }

  /// log(1 - p), exact in both tails.
  LogProb complement() const;

  friend constexpr bool operator==(LogProb, LogProb) = default;
  friend constexpr auto operator<=>(LogProb a, LogProb b) {
    return a.value_ <=> b.value_;
  }

 private:
  struct Unchecked {};
  constexpr LogProb(double v, Unchecked) : value_(v) {}

  double value_ = 0.0;
};

/// A probability-like parameter in [0,1] (P, A, Q, P(mu), P(alpha|mu)).
///
/// A rate may carry an exact rational form num/den. Threshold arithmetic such
/// as floor(A * n) is then done in integers, so A = 1/3 with n = 3 yields 1.
class Rate {
 public:
  constexpr Rate() = default;

  static Rate of(double value);
  static Rate fraction(std::int64_t numerator, std::int64_t denominator);
  /// Parses "0.25", "1e-3" or "1/3".
  static Rate parse(std::string_view text);

  constexpr double value() const { return value_; }
  constexpr bool is_exact() const { return denominator_ != 0; }
  std::optional<std::pair<std::int64_t, std::int64_t>> exact() const;

  /// floor(value * n), exact when the rate is rational.
  std::int64_t floor_times(std::int64_t n) const;
  /// value * n rounded half to even, exact when the rate is rational.
  std::int64_t round_times(std::int64_t n) const;

  std::string to_string() const;

 private:
  double value_ = 0.0;
  std::int64_t numerator_ = 0;
  std::int64_t denominator_ = 0;  // 0 when only the double is known
};

// --- scalar helpers --------------------------------------------------------

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
double log_add_exp(double a, double b);

/// log(1 - exp(x)) for x <= 0, accurate for x near 0 and for x << 0.
double log1m_exp(double x);

/// Streaming log-sum-exp accumulator. Terms are folded in the order added,
/// so a fixed summation order gives bit-reproducible results.
class LogSumExp {
 public:
  void add(double log_term);
  double value() const;

 private:
  double max_ = kNegInf;
  double scaled_sum_ = 0.0;
};

double log_sum_exp(std::span<const double> log_terms);

/// ln n!, via lgamma.
double log_factorial(std::int64_t n);

// --- operations ------------------------------------------------------------

/// ln C(n, k). Throws DomainError for negative arguments or k > n.
double log_binomial_coefficient(std::int64_t n, std::int64_t k);

/// ln of the Binomial(n, p) pmf at k; -inf outside the support.
double binomial_log_pmf(std::int64_t n, double p, std::int64_t k);

struct BinomialSplit {
  LogProb cdf;   ///< log P(X <= k)
  LogProb tail;  ///< log P(X >= k + 1)
};

/// Both sides of the Binomial(n, p) distribution split after k. Each side is
/// an independent ascending-order log-sum-exp over pmf terms.
BinomialSplit binomial_tail_and_cdf(std::int64_t n, Rate p, std::int64_t k);

/// D(q || p) for Bernoulli laws, with 0 log 0 = 0. Returns +inf when p is 0
/// or 1 and q differs from it.
double kl_divergence(Rate q, Rate p);
double kl_divergence(double q, double p);

/// log(1 - prod(1 - p_mu)) for p_mu given as log-probabilities.
LogProb stable_complement_product(std::span<const LogProb> log_terms);

/// log(1 - prod(s_mu)) for survival factors s_mu given directly. Used when
/// the caller holds log(1 - p_mu) exactly (e.g. a binomial CDF).
LogProb complement_of_product(std::span<const LogProb> log_survivals);

}  // namespace shardrisk

#endif  // SHARDRISK_PROBCORE_HPP_
