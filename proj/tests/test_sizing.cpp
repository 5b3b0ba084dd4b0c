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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "shardrisk/sizing.hpp"

using namespace shardrisk;

namespace {

const Rate kThird = Rate::fraction(1, 3);
const Rate kQuarter = Rate::fraction(1, 4);

// Largest feasible K by brute force over every K.
std::int64_t scan_largest(std::int64_t nodes, double target, Rate p) {
  std::int64_t best = 1;
  for (std::int64_t k = 2; k <= nodes; ++k) {
    if (split_delta(nodes, k, kThird, p).delta <= target) best = k;
  }
  return best;
}

}  // namespace

TEST_CASE("split delta is the exact binomial delta of the split layout") {
  for (std::int64_t k : {1, 3, 7, 50}) {
    const FailureQuery q{CommitteeLayout::from_split(1000, k), AverageAdversary::uniform(kQuarter), kThird};
    CHECK(split_delta(1000, k, kThird, kQuarter).delta ==
          doctest::Approx(delta_exact_binomial(q).delta).epsilon(1e-13));
  }
  CHECK_THROWS_AS(split_delta(10, 11, kThird, kQuarter), DomainError);
}

TEST_CASE("max committees, command examples") {
  const SizingResult a = max_committees(20, Rate::of(0.5), kThird, kQuarter);
  CHECK(a.K == scan_largest(20, 0.5, kQuarter));
  CHECK(a.n == 20 / a.K);
  CHECK(a.r == 20 % a.K);
  const SizingResult b = max_committees(20, Rate::of(1e-9), kThird, kQuarter);
  CHECK(b.K == 1);
  CHECK(b.n == 20);
  CHECK(b.r == 0);
  CHECK(b.prob == 0.0);
  const SizingResult c = max_committees(1, Rate::of(0.5), kThird, kQuarter);
  CHECK(c.K == 1);
  CHECK(c.n == 1);
  CHECK(c.r == 0);
  const SizingResult d = max_committees(1000, Rate::of(1e-3), kThird, kQuarter);
  CHECK(d.K == 3);
  CHECK(d.n == 333);
  CHECK(d.r == 1);
}

TEST_CASE("max committees against the scan") {
  for (std::int64_t nodes = 1; nodes <= 120; nodes += 7) {
    for (double t : {0.5, 0.1, 1e-3}) {
      for (Rate p : {Rate::of(0.1), kQuarter}) {
        CAPTURE(nodes);
        CAPTURE(t);
        CHECK(max_committees(nodes, Rate::of(t), kThird, p).K == scan_largest(nodes, t, p));
      }
    }
  }
}

TEST_CASE("first exceedance stops early") {
  const SizingResult a = max_committees_first_exceedance(200, Rate::of(0.1), kThird, Rate::of(0.1));
  const SizingResult b = max_committees(200, Rate::of(0.1), kThird, Rate::of(0.1));
  CHECK(a.K <= b.K);
  CHECK(a.prob <= 0.1);
  CHECK(a.iterations <= b.iterations);
}

TEST_CASE("minimum committee size") {
  const MinSizeResult avg = min_committee_size(10, Rate::of(1e-3), kThird, kQuarter, AdversaryMode::kAverage);
  CHECK(avg.n == 393);
  CHECK(avg.raw_n == 387);
  CHECK(avg.delta <= 1e-3);
  CHECK(avg.method == Method::kExactBinomial);
  const MinSizeResult ex = min_committee_size(10, Rate::of(1e-3), kThird, kQuarter, AdversaryMode::kExact);
  CHECK(ex.n == 348);
  CHECK(ex.raw_n == 345);
  CHECK(ex.method == Method::kExactHypergeometric);
  const MinSizeResult k1 = min_committee_size(1, Rate::of(1e-3), kThird, kQuarter, AdversaryMode::kAverage);
  CHECK(k1.n == 270);
  CHECK(k1.n <= 398);

  MinSizeOptions tight;
  tight.n_max = 50;
  CHECK_THROWS_AS(min_committee_size(10, Rate::of(1e-3), kThird, kQuarter, AdversaryMode::kAverage, tight),
                  NotFoundError);
  CHECK_THROWS_AS(min_committee_size_by(Method::kMonteCarlo, 10, Rate::of(1e-3), kThird, kQuarter),
                  DomainError);
  // A bound-driven solve is conservative: the upper bound needs larger n.
  const MinSizeResult ash =
      min_committee_size_by(Method::kTheorem1UpperAsh, 10, Rate::of(1e-3), kThird, kQuarter);
  const MinSizeResult low =
      min_committee_size_by(Method::kTheorem1Lower, 10, Rate::of(1e-3), kThird, kQuarter);
  CHECK(low.n <= avg.n);
  CHECK(avg.n <= ash.n);
}

TEST_CASE("size bracket") {
  CHECK(f_tilde(kThird, kQuarter) == doctest::Approx(0.25911).epsilon(1e-4));
  for (std::int64_t k : {1, 10, 100, 1000}) {
    const SizeBracket b = size_bracket(k, Rate::of(1e-3), kThird, kQuarter);
    const MinSizeResult r = min_committee_size(k, Rate::of(1e-3), kThird, kQuarter, AdversaryMode::kAverage);
    CAPTURE(k);
    CHECK(b.lower <= static_cast<double>(r.n));
    CHECK(static_cast<double>(r.n) <= b.upper);
  }
  CHECK(size_bracket(1, Rate::of(1e-3), kThird, kQuarter).upper == doctest::Approx(397.64).epsilon(1e-4));
  CHECK_THROWS_AS(size_bracket(10, Rate::of(1e-3), kThird, Rate::of(0.4)), DomainError);
}

TEST_CASE("bracket expansions") {
  const auto big = bracket_expansions(1e-3, 1000000);
  CHECK(std::abs(big.large_k - big.exact) / big.exact < 1e-10);
  const auto small = bracket_expansions(1e-8, 10);
  CHECK(std::abs(small.small_delta - small.exact) / small.exact < 1e-6);
  // -log(1 - (1 - d)^(1/K)) at K = 1 is -log d.
  CHECK(log_target_term(1e-3, 1) == doctest::Approx(-std::log(1e-3)).epsilon(1e-14));
  CHECK(std::isfinite(log_target_term(1e-12, 1000000000)));
}
