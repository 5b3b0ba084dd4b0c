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

#include "shardrisk/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace shardrisk {
namespace {

void check_tilt(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("tilt Q must lie strictly inside (0,1)");
  }
}

// One committee size with its truncation cap.
struct CommitteeGroup {
  std::int64_t size = 0;
  std::int64_t count = 0;
  std::int64_t cap = 0;

  bool unconstrained() const { return cap >= size; }
};

std::vector<CommitteeGroup> make_groups(const CommitteeLayout& layout,
                                        Rate threshold) {
  std::vector<CommitteeGroup> groups;
  for (const SizeGroup& g : layout.groups()) {
    CommitteeGroup group;
    group.size = g.size;
    group.count = g.count;
    group.cap = std::min(threshold.floor_times(g.size), g.size);
    groups.push_back(group);
  }
  return groups;
}

TruncatedBinomialSummary untruncated(std::int64_t size, double q) {
  const double n = static_cast<double>(size);
  TruncatedBinomialSummary s;
  s.log_mass = LogProb::one();
  s.mean = n * q;
  s.second_moment = n * q * (1.0 - q) + s.mean * s.mean;
  return s;
}

TruncatedBinomialSummary summarize(const CommitteeGroup& group, double q) {
  if (group.unconstrained()) return untruncated(group.size, q);
  const std::size_t kept = static_cast<std::size_t>(group.cap + 1);
  std::vector<double> weights(kept);
  double max_log = kNegInf;
  for (std::size_t j = 0; j < kept; ++j) {
    weights[j] = binomial_log_pmf(group.size, q, static_cast<std::int64_t>(j));
    max_log = std::max(max_log, weights[j]);
  }
  double weight_sum = 0.0;
  double first = 0.0;
  for (std::size_t j = 0; j < kept; ++j) {
    const double w = std::exp(weights[j] - max_log);
    weights[j] = w;
    weight_sum += w;
    first += static_cast<double>(j) * w;
  }
  const double mean = first / weight_sum;
  // Centered second pass keeps the variance accurate when mean^2 >> Var.
  double centered = 0.0;
  for (std::size_t j = 0; j < kept; ++j) {
    const double d = static_cast<double>(j) - mean;
    centered += d * d * weights[j];
  }
  double log_mass = max_log + std::log(weight_sum);
  if (log_mass > -std::log(2.0)) {
    // A mass near 1 is known only to the absolute error of the log
    // coefficients; the cut-off tail is small and known to relative error.
    LogSumExp tail;
    for (std::int64_t j = group.cap + 1; j <= group.size; ++j) {
      tail.add(binomial_log_pmf(group.size, q, j));
    }
    log_mass = log1m_exp(std::min(tail.value(), 0.0));
  }
  TruncatedBinomialSummary s;
  // Rounding in the log coefficients can push a near-1 mass just above 1.
  s.log_mass = LogProb::from_log(std::min(0.0, log_mass));
  s.mean = mean;
  s.second_moment = centered / weight_sum + mean * mean;
  return s;
}

// log phi, log phi', log phi'' of sum_{j<=cap} C(n,j) z^j at log z, all
// shifted by the same constant -n log(1 + z); only their ratios are used.
struct PhiDerivatives {
  double log_phi = kNegInf;
  double log_d1 = kNegInf;
  double log_d2 = kNegInf;
};

PhiDerivatives phi_derivatives(std::int64_t size, std::int64_t cap,
                               double log_z) {
  PhiDerivatives out;
  LogSumExp s0;
  LogSumExp s1;
  LogSumExp s2;
  const std::int64_t top = std::min(cap, size);
  const double q = 1.0 / (1.0 + std::exp(-log_z));
  for (std::int64_t j = 0; j <= top; ++j) {
    const double jd = static_cast<double>(j);
    const double t = binomial_log_pmf(size, q, j);
    s0.add(t);
    if (j >= 1) s1.add(t + std::log(jd) - log_z);
    if (j >= 2) s2.add(t + std::log(jd * (jd - 1.0)) - 2.0 * log_z);
  }
  out.log_phi = s0.value();
  out.log_d1 = s1.value();
  out.log_d2 = s2.value();
  return out;
}

// Psi''(z) = P / z^2 + (1/N) sum_mu [phi''/phi - (phi'/phi)^2].
double psi_second_derivative(const CommitteeLayout& layout, double p,
                             Rate threshold, double log_z, bool truncate) {
  const double n_total = static_cast<double>(layout.total());
  double acc = 0.0;
  for (const SizeGroup& g : layout.groups()) {
    const std::int64_t cap =
        truncate ? std::min(threshold.floor_times(g.size), g.size) : g.size;
    const PhiDerivatives d = phi_derivatives(g.size, cap, log_z);
    const double r1 = std::exp(d.log_d1 - d.log_phi);
    const double r2 = std::exp(d.log_d2 - d.log_phi);
    acc += static_cast<double>(g.count) * (r2 - r1 * r1);
  }
  return p * std::exp(-2.0 * log_z) + acc / n_total;
}

}  // namespace

TruncatedBinomialSummary truncated_binomial_summary_capped(
    std::int64_t committee_size, double q, std::int64_t cap) {
  if (committee_size < 1) throw DomainError("committee size must be >= 1");
  if (cap < 0) throw DomainError("truncation cap must be >= 0");
  check_tilt(q);
  CommitteeGroup group;
  group.size = committee_size;
  group.count = 1;
  group.cap = std::min(cap, committee_size);
  return summarize(group, q);
}

TruncatedBinomialSummary truncated_binomial_summary(std::int64_t committee_size,
                                                    double q, Rate threshold) {
  if (threshold.value() <= 0.0) throw DomainError("threshold A must be > 0");
  return truncated_binomial_summary_capped(
      committee_size, q, threshold.floor_times(committee_size));
}

SaddleSolution solve_saddle(const CommitteeLayout& layout, double p,
                            Rate threshold, const SaddleOptions& options) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("saddle equation needs 0 < P < 1");
  }
  if (threshold.value() <= 0.0) throw DomainError("threshold A must be > 0");
  if (p >= threshold.value()) {
    throw NoSaddleError(
        "saddle equation has a solution only for P < A (the truncated means "
        "never exceed floor(A N_mu))");
  }

  const auto groups = make_groups(layout, threshold);
  const double n_total = static_cast<double>(layout.total());

  SaddleSolution sol;
  double cap_sum = 0.0;
  for (const CommitteeGroup& g : groups) {
    if (g.unconstrained()) sol.unconstrained_committees += g.count;
    cap_sum += static_cast<double>(g.count) * static_cast<double>(g.cap);
  }

  auto mean_gap = [&](double q) {
    double mean_sum = 0.0;
    for (const CommitteeGroup& g : groups) {
      mean_sum += static_cast<double>(g.count) * summarize(g, q).mean;
    }
    return mean_sum / n_total - p;
  };

  if (sol.unconstrained_committees == layout.committee_count()) {
    // Untruncated: Q = P in closed form.
    sol.q = p;
    sol.converged = true;
  } else {
    if (p >= cap_sum / n_total) {
      throw NoSaddleError(
          "saddle equation has no solution: P exceeds (1/N) sum floor(A N_mu)");
    }
    double lo = options.bracket_low;
    double hi = options.bracket_high;
    if (mean_gap(hi) < 0.0) {
      throw NoSaddleError("saddle root lies outside the search bracket");
    }
    double q = 0.5 * (lo + hi);
    for (int it = 0; it < options.max_iterations; ++it) {
      q = 0.5 * (lo + hi);
      sol.iterations = it + 1;
      const double gap = mean_gap(q);
      if (std::abs(gap) <= options.tolerance) {
        sol.converged = true;
        break;
      }
      if (gap < 0.0) {
        lo = q;
      } else {
        hi = q;
      }
      if (0.5 * (lo + hi) == lo || 0.5 * (lo + hi) == hi) break;
    }
    sol.q = q;
  }

  double mean_sum = 0.0;
  double log_mass_sum = 0.0;
  for (const CommitteeGroup& g : groups) {
    const TruncatedBinomialSummary s = summarize(g, sol.q);
    const double c = static_cast<double>(g.count);
    mean_sum += c * s.mean;
    log_mass_sum += c * s.log_mass.log();
    sol.variance_sum += c * s.variance();
  }
  sol.mean_residual = std::abs(p - mean_sum / n_total);
  if (sol.mean_residual <= options.tolerance) sol.converged = true;
  sol.psi = kl_divergence(p, sol.q) + log_mass_sum / n_total;
  return sol;
}

double saddle_prefactor(const CommitteeLayout& layout, double p,
                        const SaddleSolution& solution) {
  const double n_total = static_cast<double>(layout.total());
  return std::sqrt(n_total * p * (1.0 - p) / solution.variance_sum);
}

double saddle_prefactor_contour_form(const CommitteeLayout& layout, double p,
                                     Rate threshold,
                                     const SaddleSolution& solution) {
  const double log_z_a = std::log(solution.q) - std::log1p(-solution.q);
  const double log_z_1 = std::log(p) - std::log1p(-p);
  const double d2_a =
      psi_second_derivative(layout, p, threshold, log_z_a, /*truncate=*/true);
  const double d2_1 =
      psi_second_derivative(layout, p, threshold, log_z_1, /*truncate=*/false);
  return std::exp(log_z_1 - log_z_a) * std::sqrt(d2_1 / d2_a);
}

DeltaResult delta_asymptotic(const CommitteeLayout& layout,
                             std::int64_t adversaries, Rate threshold,
                             SaddleSolution& solution_out) {
  const std::int64_t n_total = layout.total();
  if (adversaries <= 0 || adversaries >= n_total) {
    throw DomainError("asymptotic needs 0 < M < N");
  }
  const double p =
      static_cast<double>(adversaries) / static_cast<double>(n_total);
  solution_out = solve_saddle(layout, p, threshold);
  const SaddleSolution& sol = solution_out;

  if (sol.unconstrained_committees == layout.committee_count()) {
    DeltaResult r = DeltaResult::from_log_survival(Method::kAsymptotic,
                                                   LogProb::one());
    r.diagnostics.raw_log_value = 0.0;
    r.diagnostics.excluded_committees = sol.unconstrained_committees;
    return r;
  }

  const double log_survival =
      0.5 * std::log(static_cast<double>(n_total) * p * (1.0 - p) /
                     sol.variance_sum) +
      static_cast<double>(n_total) * sol.psi;
  if (std::isnan(log_survival)) {
    throw DomainError("asymptotic survival estimate is NaN (Q=" +
                      std::to_string(sol.q) + ", variance_sum=" +
                      std::to_string(sol.variance_sum) + ")");
  }
  DeltaResult r;
  if (log_survival > 0.0) {
    r = DeltaResult::from_log_survival(Method::kAsymptotic, LogProb::one());
    r.diagnostics.clamped = true;
    r.diagnostics.note = "survival estimate exceeded 1";
  } else {
    r = DeltaResult::from_log_survival(Method::kAsymptotic,
                                       LogProb::from_log(log_survival));
  }
  r.diagnostics.raw_log_value = log_survival;
  r.diagnostics.precondition_satisfied = sol.converged;
  r.diagnostics.excluded_committees = sol.unconstrained_committees;
  if (sol.unconstrained_committees > 0 && r.diagnostics.note.empty()) {
    r.diagnostics.note = "layout mixes unconstrained and constrained committees";
  }
  return r;
}

DeltaResult delta_asymptotic(const CommitteeLayout& layout,
                             std::int64_t adversaries, Rate threshold) {
  SaddleSolution unused;
  return delta_asymptotic(layout, adversaries, threshold, unused);
}

}  // namespace shardrisk
