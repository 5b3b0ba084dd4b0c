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

#include "shardrisk/failure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "shardrisk/saddle.hpp"

namespace shardrisk {
namespace {

constexpr std::array<std::pair<Method, std::string_view>, 12> kMethodTags{{
    {Method::kExactBinomial, "exact-binomial"},
    {Method::kExactHypergeometric, "exact-hypergeometric"},
    {Method::kTheorem1Lower, "theorem1-lower"},
    {Method::kTheorem1UpperAsh, "theorem1-upper-ash"},
    {Method::kTheorem1UpperFerrante, "theorem1-upper-ferrante"},
    {Method::kUnionRandom, "union-random"},
    {Method::kUnionRandomSimple, "union-random-simple"},
    {Method::kUnionFixed, "union-fixed"},
    {Method::kUnionHyperExact, "union-hyper-exact"},
    {Method::kUnionHyperHoeffding, "union-hyper-hoeffding"},
    {Method::kAsymptotic, "asymptotic"},
    {Method::kMonteCarlo, "monte-carlo"},
}};

constexpr std::array<Method, 12> kAllMethods = [] {
  std::array<Method, 12> out{};
  for (std::size_t i = 0; i < kMethodTags.size(); ++i) out[i] = kMethodTags[i].first;
  return out;
}();

void check_threshold(Rate threshold, bool for_bound) {
  const double a = threshold.value();
  if (!(a > 0.0)) throw DomainError("threshold A must be > 0");
  if (for_bound && !(a < 1.0)) {
    throw DomainError("bounds need a threshold A strictly inside (0,1)");
  }
}

// Per-committee Chernoff ingredients, shared by the bound families.
struct CommitteeTerm {
  std::int64_t size = 0;
  double p = 0.0;  // P(alpha|mu)
  double q = 0.0;  // Q(mu)
  bool never_fails = false;  // floor(A N_mu) >= N_mu
  bool precondition = true;  // P(alpha|mu) < Q(mu) < 1
  double log_chernoff = 0.0; // -N_mu D(Q || P)
};

CommitteeTerm make_term(std::int64_t size, double p, Rate threshold) {
  CommitteeTerm t;
  t.size = size;
  t.p = p;
  const std::int64_t k = failure_threshold(threshold, size);
  t.never_fails = k > size;
  t.q = static_cast<double>(k) / static_cast<double>(size);
  t.precondition = !t.never_fails && p < t.q && t.q < 1.0;
  if (t.precondition) {
    t.log_chernoff = -static_cast<double>(size) * kl_divergence(t.q, p);
  }
  return t;
}

void note_precondition(Diagnostics& d, const std::string& which,
                       Strictness strictness) {
  if (strictness == Strictness::kStrict) {
    throw PreconditionError(which +
                            ": precondition P(alpha|mu) < Q(mu) < 1 violated");
  }
  d.precondition_satisfied = false;
  if (d.note.empty()) {
    d.note = "precondition P(alpha|mu) < Q(mu) < 1 violated; trivial bound used";
  }
}

// log(1 - prod(1 - x_mu)) for per-committee log tail bounds x_mu in [0,1].
DeltaResult product_form(Method method, const std::vector<double>& log_tails) {
  std::vector<LogProb> terms;
  terms.reserve(log_tails.size());
  for (double lt : log_tails) terms.push_back(LogProb::from_log(std::min(lt, 0.0)));
  const LogProb failure = stable_complement_product(terms);
  DeltaResult r = DeltaResult::from_log_failure(method, failure);
  r.diagnostics.raw_log_value = failure.log();
  return r;
}

DeltaResult sum_form(Method method, const std::vector<double>& log_terms) {
  return DeltaResult::from_raw_log(method, log_sum_exp(log_terms));
}

// A scaled coefficient vector whose non-zero entries lie in [lo, hi].
struct Band {
  std::vector<double> v;
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  double log_scale = kNegInf;

  explicit Band(std::size_t width) : v(width, 0.0) {}

  bool empty() const { return lo > hi; }

  void set_single(std::int64_t at) {
    v[static_cast<std::size_t>(at)] = 1.0;
    lo = hi = at;
    log_scale = 0.0;
  }

  // Clears [lo, hi] and makes it the writable window.
  void reset(std::int64_t new_lo, std::int64_t new_hi) {
    if (!empty()) std::fill(v.begin() + lo, v.begin() + hi + 1, 0.0);
    lo = new_lo;
    hi = new_hi;
    if (!empty()) std::fill(v.begin() + lo, v.begin() + hi + 1, 0.0);
    log_scale = kNegInf;
  }

  // this[m] += factor * sum_j src[m - j] row[j] for j in [j_lo, j_hi].
  void accumulate(const Band& src, const std::vector<double>& row,
                  std::int64_t j_lo, std::int64_t j_hi, double factor) {
    if (src.empty() || empty() || j_lo > j_hi || factor == 0.0) return;
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      const double w = factor * row[static_cast<std::size_t>(j)];
      const std::int64_t from = std::max(lo, src.lo + j);
      const std::int64_t to = std::min(hi, src.hi + j);
      for (std::int64_t m = from; m <= to; ++m) {
        v[static_cast<std::size_t>(m)] += w * src.v[static_cast<std::size_t>(m - j)];
      }
    }
  }

  // Rescales so the largest entry is 1, drops subnormal entries and shrinks
  // the window to the remaining support.
  void normalize() {
    if (empty()) return;
    double vmax = 0.0;
    for (std::int64_t m = lo; m <= hi; ++m) {
      vmax = std::max(vmax, v[static_cast<std::size_t>(m)]);
    }
    if (vmax == 0.0 || log_scale == kNegInf) {
      std::fill(v.begin() + lo, v.begin() + hi + 1, 0.0);
      lo = 0;
      hi = -1;
      log_scale = kNegInf;
      return;
    }
    const double inv = 1.0 / vmax;
    std::int64_t first = hi + 1;
    std::int64_t last = lo - 1;
    for (std::int64_t m = lo; m <= hi; ++m) {
      double& x = v[static_cast<std::size_t>(m)];
      x *= inv;
      if (x < std::numeric_limits<double>::min()) {
        x = 0.0;
      } else {
        if (first > hi) first = m;
        last = m;
      }
    }
    lo = first;
    hi = last;
    log_scale += std::log(vmax);
  }

  double log_at(std::int64_t m) const {
    if (empty() || m < lo || m > hi) return kNegInf;
    const double x = v[static_cast<std::size_t>(m)];
    return x > 0.0 ? std::log(x) + log_scale : kNegInf;
  }
};

}  // namespace

std::string_view method_tag(Method method) {
  for (auto [m, tag] : kMethodTags) {
    if (m == method) return tag;
  }
  return "unknown";
}

std::optional<Method> method_from_tag(std::string_view tag) {
  for (auto [m, t] : kMethodTags) {
    if (t == tag) return m;
  }
  return std::nullopt;
}

std::span<const Method> all_methods() { return kAllMethods; }

DeltaResult DeltaResult::from_log_survival(Method method, LogProb survival) {
  DeltaResult r;
  r.method = method;
  r.log_survival = survival.log();
  r.log_delta = log1m_exp(survival.log());
  r.delta = 0.0 - std::expm1(survival.log());  // no -0 at survival 1
  r.diagnostics.raw_log_value = r.log_delta;
  return r;
}

DeltaResult DeltaResult::from_log_failure(Method method, LogProb failure) {
  DeltaResult r;
  r.method = method;
  r.log_delta = failure.log();
  r.log_survival = log1m_exp(failure.log());
  r.delta = failure.linear();
  r.diagnostics.raw_log_value = r.log_delta;
  return r;
}

DeltaResult DeltaResult::from_raw_log(Method method, double raw_log_failure) {
  if (std::isnan(raw_log_failure)) {
    throw DomainError("failure quantity evaluated to NaN");
  }
  const bool clamped = raw_log_failure > 0.0;
  DeltaResult r = DeltaResult::from_log_failure(
      method, clamped ? LogProb::one() : LogProb::from_log(raw_log_failure));
  r.diagnostics.clamped = clamped;
  r.diagnostics.raw_log_value = raw_log_failure;
  return r;
}

const AverageAdversary& FailureQuery::average() const {
  if (const auto* a = std::get_if<AverageAdversary>(&adversary)) {
    a->validate(layout);
    return *a;
  }
  throw DomainError("this computation needs an average (binomial) adversary");
}

const ExactAdversary& FailureQuery::exact() const {
  if (const auto* e = std::get_if<ExactAdversary>(&adversary)) {
    e->validate(layout);
    return *e;
  }
  throw DomainError("this computation needs an exact-count adversary");
}

std::int64_t failure_threshold(Rate threshold, std::int64_t committee_size) {
  return threshold.floor_times(committee_size) + 1;
}

double threshold_fraction(Rate threshold, std::int64_t committee_size) {
  return static_cast<double>(failure_threshold(threshold, committee_size)) /
         static_cast<double>(committee_size);
}

DeltaResult delta_exact_binomial(const FailureQuery& query) {
  check_threshold(query.threshold, /*for_bound=*/false);
  const AverageAdversary& adv = query.average();
  const auto sizes = query.layout.sizes();
  std::vector<LogProb> survivals;
  survivals.reserve(sizes.size());
  std::int64_t never_fail = 0;
  for (std::size_t mu = 0; mu < sizes.size(); ++mu) {
    const std::int64_t keep =
        std::min(query.threshold.floor_times(sizes[mu]), sizes[mu]);
    if (keep == sizes[mu]) ++never_fail;
    const BinomialSplit split = binomial_tail_and_cdf(sizes[mu], adv.rate_for(mu), keep);
    // log(CDF) loses relative accuracy once the CDF is close to 1.
    survivals.push_back(split.tail < split.cdf
                            ? LogProb::from_log(log1m_exp(split.tail.log()))
                            : split.cdf);
  }
  double log_survival = 0.0;
  for (LogProb s : survivals) log_survival += s.log();
  DeltaResult r = DeltaResult::from_log_survival(
      Method::kExactBinomial, LogProb::from_log(log_survival));
  r.diagnostics.raw_log_value = complement_of_product(survivals).log();
  r.diagnostics.excluded_committees = never_fail;
  return r;
}

DeltaResult delta_exact_hypergeometric(const FailureQuery& query,
                                       const ExactHypergeometricOptions& options) {
  check_threshold(query.threshold, /*for_bound=*/false);
  const std::int64_t m_total = query.exact().count;
  const CommitteeLayout& layout = query.layout;
  const std::int64_t n_total = layout.total();
  if (n_total > options.max_nodes) {
    throw DomainError("layout has " + std::to_string(n_total) +
                      " nodes, above the exact-count cap of " +
                      std::to_string(options.max_nodes) +
                      "; use the asymptotic instead");
  }

  const auto sizes = layout.sizes();
  const std::size_t k = sizes.size();
  std::vector<std::int64_t> caps(k);
  std::int64_t cap_sum = 0;
  std::int64_t cap_min = std::numeric_limits<std::int64_t>::max();
  std::int64_t never_fail = 0;
  for (std::size_t mu = 0; mu < k; ++mu) {
    caps[mu] = std::min(query.threshold.floor_times(sizes[mu]), sizes[mu]);
    if (caps[mu] == sizes[mu]) ++never_fail;
    cap_sum += caps[mu];
    cap_min = std::min(cap_min, caps[mu]);
  }

  auto finish = [&](LogProb survival) {
    DeltaResult r =
        DeltaResult::from_log_survival(Method::kExactHypergeometric, survival);
    r.diagnostics.excluded_committees = never_fail;
    return r;
  };
  // Even with every adversary in one committee nothing fails.
  if (m_total <= cap_min) return finish(LogProb::one());
  if (m_total > cap_sum) return finish(LogProb::zero());

  // Two coefficient vectors are carried: `alive` for partial assignments in
  // which no committee has failed yet and `failed` for the rest. Both are
  // non-negative, so delta = failed[M] / (alive[M] + failed[M]) involves no
  // cancellation. Committee rows are Binomial(N_mu, q) pmfs, i.e. C(N_mu, j)
  // weighted by q^j (1-q)^(N_mu-j); vectors are renormalised after each
  // committee with the scales kept in log space. q at the saddle centres
  // `alive` on M.
  const double p = static_cast<double>(m_total) / static_cast<double>(n_total);
  double q = p;
  if (p < query.threshold.value()) {
    try {
      q = solve_saddle(layout, p, query.threshold).q;
    } catch (const NoSaddleError&) {
      q = p;
    }
  }
  q = std::clamp(q, 1e-300, 1.0 - 1e-16);

  // Partial counts below M - (nodes still to place) can never reach M.
  std::vector<std::int64_t> rem_sizes(k + 1, 0);
  for (std::size_t mu = k; mu-- > 0;) rem_sizes[mu] = rem_sizes[mu + 1] + sizes[mu];

  const std::size_t width = static_cast<std::size_t>(m_total) + 1;
  Band alive(width);
  Band failed(width);
  Band next_alive(width);
  Band next_failed(width);
  alive.set_single(0);
  std::vector<double> row;

  for (std::size_t mu = 0; mu < k; ++mu) {
    const std::int64_t size = sizes[mu];
    const std::int64_t cap = caps[mu];
    row.assign(static_cast<std::size_t>(size + 1), 0.0);
    double row_max = kNegInf;
    for (std::int64_t j = 0; j <= size; ++j) {
      const double lw = binomial_log_pmf(size, q, j);
      row[static_cast<std::size_t>(j)] = lw;
      row_max = std::max(row_max, lw);
    }
    std::int64_t row_lo = size + 1;
    std::int64_t row_hi = -1;
    for (std::int64_t j = 0; j <= size; ++j) {
      double& w = row[static_cast<std::size_t>(j)];
      w = std::exp(w - row_max);
      if (w >= std::numeric_limits<double>::min()) {
        row_lo = std::min(row_lo, j);
        row_hi = j;
      } else {
        w = 0.0;
      }
    }

    next_alive.reset(std::max<std::int64_t>(0, m_total - rem_sizes[mu + 1]),
                     m_total);
    next_alive.accumulate(alive, row, row_lo, std::min(row_hi, cap), 1.0);
    next_alive.log_scale = alive.log_scale + row_max;

    next_failed.reset(std::max<std::int64_t>(0, m_total - rem_sizes[mu + 1]),
                      m_total);
    const double from_failed = failed.empty() ? kNegInf : failed.log_scale;
    const double from_alive = alive.empty() ? kNegInf : alive.log_scale;
    const double top = std::max(from_failed, from_alive);
    if (top > kNegInf) {
      next_failed.accumulate(failed, row, row_lo, row_hi,
                             std::exp(from_failed - top));
      next_failed.accumulate(alive, row, std::max(row_lo, cap + 1), row_hi,
                             std::exp(from_alive - top));
      next_failed.log_scale = top + row_max;
    }

    next_alive.normalize();
    next_failed.normalize();
    std::swap(alive, next_alive);
    std::swap(failed, next_failed);
  }

  const double log_alive = alive.log_at(m_total);
  const double log_failed = failed.log_at(m_total);
  if (log_alive == kNegInf) return finish(LogProb::zero());
  if (log_failed == kNegInf) {
    // Failures lost to underflow; fall back to normalising by C(N, M).
    const double log_full = binomial_log_pmf(n_total, q, m_total);
    return finish(LogProb::from_log(std::min(0.0, log_alive - log_full)));
  }
  // Both logs come from the ratio so neither side loses digits when delta
  // is tiny or close to 1.
  DeltaResult r = DeltaResult::from_log_failure(
      Method::kExactHypergeometric,
      LogProb::from_log(-std::log1p(std::exp(log_alive - log_failed))));
  r.log_survival = -std::log1p(std::exp(log_failed - log_alive));
  r.diagnostics.excluded_committees = never_fail;
  return r;
}

Theorem1Bounds theorem1_bounds(const FailureQuery& query, Strictness strictness) {
  check_threshold(query.threshold, /*for_bound=*/true);
  const AverageAdversary& adv = query.average();
  const auto sizes = query.layout.sizes();

  std::vector<double> lower;
  std::vector<double> ash;
  std::vector<double> ferrante;
  Diagnostics diag;
  for (std::size_t mu = 0; mu < sizes.size(); ++mu) {
    const CommitteeTerm t = make_term(sizes[mu], adv.rate_for(mu).value(),
                                      query.threshold);
    if (t.never_fails) {
      ++diag.excluded_committees;
      lower.push_back(kNegInf);
      ash.push_back(kNegInf);
      ferrante.push_back(kNegInf);
      continue;
    }
    if (!t.precondition) {
      note_precondition(diag, "theorem1", strictness);
      lower.push_back(kNegInf);
      ash.push_back(0.0);
      ferrante.push_back(0.0);
      continue;
    }
    const double n = static_cast<double>(t.size);
    const double qq = t.q * (1.0 - t.q);
    lower.push_back(t.log_chernoff - 0.5 * std::log(8.0 * n * qq));
    ash.push_back(t.log_chernoff);
    const double r = t.p * (1.0 - t.q) / (t.q * (1.0 - t.p));
    ferrante.push_back(std::min(
        0.0, t.log_chernoff - std::log1p(-r) -
                 0.5 * std::log(2.0 * std::numbers::pi * qq * n)));
  }

  Theorem1Bounds out{product_form(Method::kTheorem1Lower, lower),
                     product_form(Method::kTheorem1UpperAsh, ash),
                     product_form(Method::kTheorem1UpperFerrante, ferrante)};
  for (DeltaResult* r : {&out.lower, &out.upper_ash, &out.upper_ferrante}) {
    const double raw = r->diagnostics.raw_log_value;
    r->diagnostics = diag;
    r->diagnostics.raw_log_value = raw;
  }
  return out;
}

UnionRandomBounds union_bound_random_sizes(
    std::int64_t nodes, std::span<const Rate> committee_probs,
    const AverageAdversary& adversary, Rate threshold,
    std::span<const std::int64_t> reference_sizes, Strictness strictness) {
  check_threshold(threshold, /*for_bound=*/true);
  if (nodes < 1) throw DomainError("need at least one node");
  if (committee_probs.empty()) throw DomainError("need at least one committee");
  double prob_sum = 0.0;
  for (Rate p : committee_probs) prob_sum += p.value();
  if (std::abs(prob_sum - 1.0) > 1e-12) {
    throw DomainError("committee probabilities must sum to 1");
  }
  if (!reference_sizes.empty() && reference_sizes.size() != committee_probs.size()) {
    throw DomainError("one reference size per committee is required");
  }
  if (adversary.rates.size() != 1 && adversary.rates.size() != committee_probs.size()) {
    throw DomainError("need one adversary rate per committee");
  }

  std::vector<double> phi_terms;
  std::vector<double> simple_terms;
  Diagnostics diag;
  const double n = static_cast<double>(nodes);
  for (std::size_t mu = 0; mu < committee_probs.size(); ++mu) {
    const double pmu = committee_probs[mu].value();
    const std::int64_t ref =
        reference_sizes.empty()
            ? std::max<std::int64_t>(1, committee_probs[mu].round_times(nodes))
            : reference_sizes[mu];
    if (ref < 1) throw DomainError("reference committee sizes must be >= 1");
    const CommitteeTerm t = make_term(ref, adversary.rate_for(mu).value(), threshold);
    if (t.never_fails) {
      ++diag.excluded_committees;
      continue;
    }
    if (!t.precondition) {
      note_precondition(diag, "union-random", strictness);
      phi_terms.push_back(0.0);
      simple_terms.push_back(0.0);
      continue;
    }
    const double d = kl_divergence(t.q, t.p);
    const double phi_small = -std::expm1(-d);  // 1 - e^{-D}
    phi_terms.push_back(n * std::log1p(-pmu * phi_small));
    simple_terms.push_back(-n * pmu * phi_small);
  }
  UnionRandomBounds out{sum_form(Method::kUnionRandom, phi_terms),
                        sum_form(Method::kUnionRandomSimple, simple_terms)};
  for (DeltaResult* r : {&out.phi_form, &out.simple_form}) {
    const double raw = r->diagnostics.raw_log_value;
    const bool clamped = r->diagnostics.clamped;
    r->diagnostics = diag;
    r->diagnostics.raw_log_value = raw;
    r->diagnostics.clamped = clamped;
  }
  return out;
}

DeltaResult union_bound_fixed_sizes(const FailureQuery& query,
                                    Strictness strictness) {
  check_threshold(query.threshold, /*for_bound=*/true);
  const AverageAdversary& adv = query.average();
  const auto sizes = query.layout.sizes();
  std::vector<double> terms;
  Diagnostics diag;
  for (std::size_t mu = 0; mu < sizes.size(); ++mu) {
    const CommitteeTerm t = make_term(sizes[mu], adv.rate_for(mu).value(),
                                      query.threshold);
    if (t.never_fails) {
      ++diag.excluded_committees;
      continue;
    }
    if (!t.precondition) {
      note_precondition(diag, "union-fixed", strictness);
      terms.push_back(0.0);
      continue;
    }
    terms.push_back(t.log_chernoff);
  }
  DeltaResult r = sum_form(Method::kUnionFixed, terms);
  const double raw = r.diagnostics.raw_log_value;
  const bool clamped = r.diagnostics.clamped;
  r.diagnostics = diag;
  r.diagnostics.raw_log_value = raw;
  r.diagnostics.clamped = clamped;
  return r;
}

LogProb hypergeometric_marginal_log_tail(std::int64_t threshold,
                                         std::int64_t committee_size,
                                         std::int64_t total,
                                         std::int64_t adversaries) {
  LogSumExp acc;
  const std::int64_t top = std::min(committee_size, adversaries);
  for (std::int64_t j = std::max<std::int64_t>(threshold, 0); j <= top; ++j) {
    acc.add(hypergeometric_marginal_log_pmf(j, committee_size, total, adversaries)
                .log());
  }
  return LogProb::from_log(acc.value());
}

HypergeometricUnionBounds union_bound_hypergeometric(const FailureQuery& query,
                                                     Strictness strictness) {
  check_threshold(query.threshold, /*for_bound=*/true);
  const std::int64_t m_total = query.exact().count;
  const std::int64_t n_total = query.layout.total();
  const double p = static_cast<double>(m_total) / static_cast<double>(n_total);

  std::vector<double> exact_terms;
  std::vector<double> hoeffding_terms;
  Diagnostics exact_diag;
  Diagnostics hoeffding_diag;
  for (const SizeGroup& g : query.layout.groups()) {
    const double log_count = std::log(static_cast<double>(g.count));
    const std::int64_t k = failure_threshold(query.threshold, g.size);
    if (k > g.size) {
      exact_diag.excluded_committees += g.count;
      hoeffding_diag.excluded_committees += g.count;
      continue;
    }
    exact_terms.push_back(
        log_count + hypergeometric_marginal_log_tail(k, g.size, n_total, m_total).log());
    const CommitteeTerm t = make_term(g.size, p, query.threshold);
    if (!t.precondition) {
      note_precondition(hoeffding_diag, "union-hyper-hoeffding", strictness);
      hoeffding_terms.push_back(log_count);
      continue;
    }
    hoeffding_terms.push_back(log_count + t.log_chernoff);
  }

  HypergeometricUnionBounds out{sum_form(Method::kUnionHyperExact, exact_terms),
                                sum_form(Method::kUnionHyperHoeffding, hoeffding_terms)};
  auto merge = [](DeltaResult& r, const Diagnostics& d) {
    const double raw = r.diagnostics.raw_log_value;
    const bool clamped = r.diagnostics.clamped;
    r.diagnostics = d;
    r.diagnostics.raw_log_value = raw;
    r.diagnostics.clamped = clamped;
  };
  merge(out.exact_tail_sum, exact_diag);
  merge(out.hoeffding, hoeffding_diag);
  return out;
}

}  // namespace shardrisk
