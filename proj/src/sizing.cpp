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

#include "shardrisk/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "shardrisk/partitions.hpp"
#include "shardrisk/saddle.hpp"

namespace shardrisk {
namespace {

// Searches with an O(n) evaluation per size stop here when P >= A, where
// delta tends to 1 and only floor effects can make small sizes feasible.
constexpr std::int64_t kSaturatedScanLimit = 4096;

void check_sizing_args(Rate delta_target, Rate threshold, Rate adversary_rate) {
  const double d = delta_target.value();
  const double a = threshold.value();
  const double p = adversary_rate.value();
  if (!(d > 0.0 && d < 1.0)) throw DomainError("delta target must lie in (0,1)");
  if (!(a > 0.0 && a < 1.0)) throw DomainError("threshold A must lie in (0,1)");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("adversary fraction P must lie in [0,1)");
}

LogProb committee_cdf(std::int64_t size, Rate threshold, Rate p) {
  const std::int64_t keep = std::min(threshold.floor_times(size), size);
  const BinomialSplit split = binomial_tail_and_cdf(size, p, keep);
  return split.tail < split.cdf ? LogProb::from_log(log1m_exp(split.tail.log()))
                                : split.cdf;
}

CommitteeLayout uniform_layout(std::int64_t committees, std::int64_t size) {
  return CommitteeLayout(
      std::vector<std::int64_t>(static_cast<std::size_t>(committees), size));
}

// log P(X >= k) for X ~ Hypergeometric(total, adversaries, size). Above the
// mode the terms fall off geometrically, so the sum stops once they no
// longer register.
double log_hyper_tail(std::int64_t k, std::int64_t size, std::int64_t total,
                      std::int64_t adversaries) {
  const std::int64_t lo = std::max<std::int64_t>(
      {k, 0, adversaries - (total - size)});
  const std::int64_t hi = std::min(size, adversaries);
  const double mode = static_cast<double>((size + 1) * (adversaries + 1)) /
                      static_cast<double>(total + 2);
  LogSumExp acc;
  for (std::int64_t j = lo; j <= hi; ++j) {
    const double t =
        hypergeometric_marginal_log_pmf(j, size, total, adversaries).log();
    acc.add(t);
    if (static_cast<double>(j) > mode && t < acc.value() - 40.0) break;
  }
  return acc.value();
}

// log P(X1 >= k, X2 >= k) for two committees of `size` drawn together.
double log_pair_tail(std::int64_t k, std::int64_t size, std::int64_t total,
                     std::int64_t adversaries) {
  const std::int64_t hi = std::min(size, adversaries);
  const double mode = static_cast<double>((size + 1) * (adversaries + 1)) /
                      static_cast<double>(total + 2);
  LogSumExp acc;
  for (std::int64_t a = std::max<std::int64_t>(k, 0); a <= hi; ++a) {
    const double first =
        hypergeometric_marginal_log_pmf(a, size, total, adversaries).log();
    if (first == kNegInf) continue;
    const double t = first + log_hyper_tail(k, size, total - size, adversaries - a);
    acc.add(t);
    if (static_cast<double>(a) > mode && t < acc.value() - 40.0) break;
  }
  return acc.value();
}

struct Verdict {
  bool feasible = false;
  bool decided_by_screen = false;
};

// Feasibility of K committees of `size` under exactly round(N P) adversaries.
// Up to the DP cap, the single-committee tail, the union bound and the de
// Caen lower bound settle most sizes rigorously; the DP decides the rest.
// Above the cap the asymptotic decides.
Verdict exact_feasible(std::int64_t committees, std::int64_t size, double target,
                       Rate threshold, Rate p, const MinSizeOptions& options,
                       Method& method_out) {
  const std::int64_t total = committees * size;
  const std::int64_t m = p.round_times(total);
  const std::int64_t k = failure_threshold(threshold, size);
  if (total <= options.exact_max_nodes) {
    method_out = Method::kExactHypergeometric;
    if (m == 0 || k > size || k > m) return {true, true};
    const double log_target = std::log(target);
    const double t1 = log_hyper_tail(k, size, total, m);
    if (t1 > log_target) return {false, true};
    const double kd = static_cast<double>(committees);
    if (std::log(kd) + t1 <= log_target) return {true, true};
    if (committees >= 2) {
      const double t2 = log_pair_tail(k, size, total, m);
      const double denom = log_add_exp(t1, std::log(kd - 1.0) + t2);
      if (std::log(kd) + 2.0 * t1 - denom > log_target) return {false, true};
    }
    const DeltaResult r = delta_exact_hypergeometric(
        {uniform_layout(committees, size), ExactAdversary{m}, threshold},
        {.max_nodes = options.exact_max_nodes});
    return {r.delta <= target, false};
  }
  method_out = Method::kAsymptotic;
  if (m == 0) return {true, false};
  if (m >= total || static_cast<double>(m) / static_cast<double>(total) >=
                        threshold.value()) {
    return {false, false};
  }
  try {
    return {delta_asymptotic(uniform_layout(committees, size), m, threshold).delta <=
                target,
            false};
  } catch (const NoSaddleError&) {
    return {false, false};
  }
}

// Failure probability of K committees of `size` for one method.
DeltaResult evaluate_uniform(Method method, std::int64_t committees, std::int64_t size,
                             Rate threshold, Rate p, const MinSizeOptions& options) {
  const std::int64_t total = committees * size;
  switch (method) {
    case Method::kExactBinomial: {
      const LogProb cdf = committee_cdf(size, threshold, p);
      return DeltaResult::from_log_survival(
          method, LogProb::from_log(static_cast<double>(committees) * cdf.log()));
    }
    case Method::kTheorem1Lower:
    case Method::kTheorem1UpperAsh:
    case Method::kTheorem1UpperFerrante: {
      const Theorem1Bounds one = theorem1_bounds(
          {CommitteeLayout({size}), AverageAdversary::uniform(p), threshold});
      const DeltaResult& single = method == Method::kTheorem1Lower ? one.lower
                                  : method == Method::kTheorem1UpperAsh
                                      ? one.upper_ash
                                      : one.upper_ferrante;
      DeltaResult r = DeltaResult::from_log_survival(
          method,
          LogProb::from_log(static_cast<double>(committees) * single.log_survival));
      r.diagnostics.precondition_satisfied = single.diagnostics.precondition_satisfied;
      return r;
    }
    case Method::kUnionFixed: {
      const DeltaResult single = union_bound_fixed_sizes(
          {CommitteeLayout({size}), AverageAdversary::uniform(p), threshold});
      DeltaResult r = DeltaResult::from_raw_log(
          method, std::log(static_cast<double>(committees)) +
                      single.diagnostics.raw_log_value);
      r.diagnostics.precondition_satisfied = single.diagnostics.precondition_satisfied;
      return r;
    }
    case Method::kUnionRandom:
    case Method::kUnionRandomSimple: {
      const std::vector<Rate> probs(static_cast<std::size_t>(committees),
                                    Rate::fraction(1, committees));
      const std::vector<std::int64_t> refs(static_cast<std::size_t>(committees), size);
      const UnionRandomBounds b = union_bound_random_sizes(
          total, probs, AverageAdversary::uniform(p), threshold, refs);
      return method == Method::kUnionRandom ? b.phi_form : b.simple_form;
    }
    case Method::kExactHypergeometric:
    case Method::kUnionHyperExact:
    case Method::kUnionHyperHoeffding:
    case Method::kAsymptotic: {
      const std::int64_t m = p.round_times(total);
      const CommitteeLayout layout = uniform_layout(committees, size);
      if (method == Method::kExactHypergeometric) {
        return delta_exact_hypergeometric({layout, ExactAdversary{m}, threshold},
                                          {.max_nodes = options.exact_max_nodes});
      }
      if (method == Method::kAsymptotic) {
        if (m == 0) {
          return DeltaResult::from_log_survival(method, LogProb::one());
        }
        return delta_asymptotic(layout, m, threshold);
      }
      const HypergeometricUnionBounds b =
          union_bound_hypergeometric({layout, ExactAdversary{m}, threshold});
      return method == Method::kUnionHyperExact ? b.exact_tail_sum : b.hoeffding;
    }
    case Method::kMonteCarlo:
      break;
  }
  throw DomainError("method '" + std::string(method_tag(method)) +
                    "' cannot drive a committee-size search");
}

bool method_feasible(Method method, std::int64_t committees, std::int64_t size,
                     double target, Rate threshold, Rate p,
                     const MinSizeOptions& options) {
  if (method == Method::kExactBinomial) {
    // The lower bound is rigorous and O(1); it rejects most small sizes.
    const DeltaResult lower = evaluate_uniform(Method::kTheorem1Lower, committees,
                                               size, threshold, p, options);
    if (lower.diagnostics.precondition_satisfied && lower.delta > target) return false;
  }
  if (method == Method::kExactHypergeometric) {
    Method unused = method;
    return exact_feasible(committees, size, target, threshold, p, options, unused)
        .feasible;
  }
  try {
    const DeltaResult r = evaluate_uniform(method, committees, size, threshold, p, options);
    return r.diagnostics.precondition_satisfied && r.delta <= target;
  } catch (const NoSaddleError&) {
    return false;
  }
}

// Smallest n with feasible(n) and feasible(n + 1).
template <typename Feasible>
MinSizeResult two_point_search(std::int64_t limit, Feasible&& feasible) {
  MinSizeResult out;
  std::optional<bool> previous;
  for (std::int64_t n = 1; n <= limit + 1; ++n) {
    const bool ok = feasible(n);
    ++out.evaluations;
    if (ok && out.raw_n == 0) out.raw_n = n;
    if (ok && previous.value_or(false)) {
      out.n = n - 1;
      return out;
    }
    previous = ok;
  }
  throw NotFoundError("no committee size up to " + std::to_string(limit) +
                      " meets the failure target");
}

}  // namespace

DeltaResult split_delta(std::int64_t nodes, std::int64_t committees, Rate threshold,
                        Rate adversary_rate) {
  if (committees < 1 || committees > nodes) {
    throw DomainError("need 1 <= K <= N committees");
  }
  const std::int64_t n = nodes / committees;
  const std::int64_t r = nodes % committees;
  double log_survival = static_cast<double>(committees - r) *
                        committee_cdf(n, threshold, adversary_rate).log();
  if (r > 0) {
    log_survival += static_cast<double>(r) *
                    committee_cdf(n + 1, threshold, adversary_rate).log();
  }
  return DeltaResult::from_log_survival(Method::kExactBinomial,
                                        LogProb::from_log(log_survival));
}

SizingResult max_committees(std::int64_t nodes, Rate delta_target, Rate threshold,
                            Rate adversary_rate) {
  if (nodes < 1) throw DomainError("need at least one node");
  check_sizing_args(delta_target, threshold, adversary_rate);
  SizingResult best{.K = 1, .n = nodes, .r = 0, .prob = 0.0, .iterations = 0};
  for (std::int64_t k = 2; k <= nodes; ++k) {
    const double prob = split_delta(nodes, k, threshold, adversary_rate).delta;
    ++best.iterations;
    if (prob <= delta_target.value()) {
      best.K = k;
      best.n = nodes / k;
      best.r = nodes % k;
      best.prob = prob;
    }
  }
  return best;
}

SizingResult max_committees_first_exceedance(std::int64_t nodes, Rate delta_target,
                                             Rate threshold, Rate adversary_rate) {
  if (nodes < 1) throw DomainError("need at least one node");
  check_sizing_args(delta_target, threshold, adversary_rate);
  SizingResult saved{.K = 1, .n = nodes, .r = 0, .prob = 0.0, .iterations = 0};
  for (std::int64_t k = 2; k <= nodes; ++k) {
    const double prob = split_delta(nodes, k, threshold, adversary_rate).delta;
    ++saved.iterations;
    if (prob > delta_target.value()) break;
    saved.K = k;
    saved.n = nodes / k;
    saved.r = nodes % k;
    saved.prob = prob;
  }
  return saved;
}

MinSizeResult min_committee_size(std::int64_t committees, Rate delta_target,
                                 Rate threshold, Rate adversary_rate,
                                 AdversaryMode mode, const MinSizeOptions& options) {
  if (committees < 1) throw DomainError("need at least one committee");
  check_sizing_args(delta_target, threshold, adversary_rate);
  if (mode == AdversaryMode::kAverage) {
    return min_committee_size_by(Method::kExactBinomial, committees, delta_target,
                                 threshold, adversary_rate, options);
  }
  if (adversary_rate.value() >= threshold.value()) {
    throw DomainError("the exact-count model needs P < A");
  }
  const double target = delta_target.value();
  MinSizeResult out = two_point_search(options.n_max, [&](std::int64_t n) {
    Method unused = Method::kExactHypergeometric;
    return exact_feasible(committees, n, target, threshold, adversary_rate, options,
                          unused)
        .feasible;
  });
  Method decided = Method::kExactHypergeometric;
  exact_feasible(committees, out.n, target, threshold, adversary_rate, options,
                 decided);
  out.method = decided;
  out.delta = evaluate_uniform(decided, committees, out.n, threshold, adversary_rate,
                               options)
                  .delta;
  return out;
}

MinSizeResult min_committee_size_by(Method method, std::int64_t committees,
                                    Rate delta_target, Rate threshold,
                                    Rate adversary_rate, const MinSizeOptions& options) {
  if (committees < 1) throw DomainError("need at least one committee");
  check_sizing_args(delta_target, threshold, adversary_rate);
  if (method == Method::kMonteCarlo) {
    throw DomainError("monte-carlo cannot drive a committee-size search");
  }
  const double target = delta_target.value();
  const std::int64_t limit = adversary_rate.value() >= threshold.value()
                                 ? std::min(options.n_max, kSaturatedScanLimit)
                                 : options.n_max;
  MinSizeResult out = two_point_search(limit, [&](std::int64_t n) {
    return method_feasible(method, committees, n, target, threshold, adversary_rate,
                           options);
  });
  out.method = method;
  out.delta =
      evaluate_uniform(method, committees, out.n, threshold, adversary_rate, options)
          .delta;
  return out;
}

double log_target_term(double delta_target, std::int64_t committees) {
  if (!(delta_target > 0.0 && delta_target < 1.0)) {
    throw DomainError("delta target must lie in (0,1)");
  }
  if (committees < 1) throw DomainError("need at least one committee");
  // 1 - (1 - delta)^(1/K) = -expm1(log1p(-delta) / K)
  return -std::log(
      -std::expm1(std::log1p(-delta_target) / static_cast<double>(committees)));
}

double f_tilde(Rate threshold, Rate adversary_rate, std::int64_t scan_limit) {
  const double a = threshold.value();
  const double p = adversary_rate.value();
  double best = kNegInf;
  for (std::int64_t n = 1; n <= scan_limit; ++n) {
    const double nd = static_cast<double>(n);
    const double x = a + 1.0 / nd;
    if (!(x > p && x < 1.0)) continue;
    const double f = kl_divergence(x, p) + std::log(x * (1.0 - x)) / (2.0 * nd);
    best = std::max(best, f);
  }
  if (best == kNegInf) {
    throw DomainError("no n in the scan range gives A + 1/n inside (P, 1)");
  }
  return best;
}

SizeBracket size_bracket(std::int64_t committees, Rate delta_target, Rate threshold,
                         Rate adversary_rate, std::int64_t scan_limit) {
  const double a = threshold.value();
  const double p = adversary_rate.value();
  if (!(p > 0.0 && p < a && a < 1.0)) {
    throw DomainError("the size bracket needs 0 < P < A < 1");
  }
  const double term = log_target_term(delta_target.value(), committees);
  SizeBracket out;
  out.f_tilde = f_tilde(threshold, adversary_rate, scan_limit);
  out.upper = term / kl_divergence(a, p);
  out.lower = (1.0 - std::log(8.0) + 2.0 * term) / (2.0 * out.f_tilde + 1.0);
  return out;
}

BracketExpansions bracket_expansions(double delta_target, std::int64_t committees) {
  BracketExpansions out;
  out.exact = log_target_term(delta_target, committees);
  const double k = static_cast<double>(committees);
  const double l = std::log1p(-delta_target);  // log(1 - delta)
  out.large_k = -std::log(-l) + std::log(k) - l / (2.0 * k) -
                l * l / (24.0 * k * k) + (l * l * l * l) / (2880.0 * k * k * k * k);
  out.small_delta =
      std::log(k) - std::log(delta_target) - (k - 1.0) * delta_target / (2.0 * k);
  return out;
}

}  // namespace shardrisk
