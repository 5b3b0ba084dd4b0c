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
#include "shardrisk/partitions.hpp"

using namespace shardrisk;

namespace {

// Calls f(counts) for every count vector with 0 <= counts[mu] <= bound[mu].
template <typename F>
void for_each_counts(const std::vector<std::int64_t>& bound, F&& f) {
  std::vector<std::int64_t> c(bound.size(), 0);
  while (true) {
    f(c);
    std::size_t i = 0;
    while (i < c.size() && c[i] == bound[i]) c[i++] = 0;
    if (i == c.size()) return;
    ++c[i];
  }
}

}  // namespace

TEST_CASE("layouts") {
  const auto l = CommitteeLayout::from_split(10, 3);
  CHECK(std::vector<std::int64_t>(l.sizes().begin(), l.sizes().end()) ==
        std::vector<std::int64_t>{3, 3, 4});
  CHECK(l.total() == 10);
  CHECK(l.committee_count() == 3);
  const auto g = l.groups();
  REQUIRE(g.size() == 2);
  CHECK(g[0].size == 3);
  CHECK(g[0].count == 2);
  CHECK(g[1].size == 4);
  CHECK(g[1].count == 1);
  CHECK_THROWS_AS(CommitteeLayout::from_split(3, 4), DomainError);
  CHECK_THROWS_AS(CommitteeLayout({2, 0}), DomainError);
  CHECK_THROWS_AS(CommitteeLayout(std::vector<std::int64_t>{}), DomainError);
}

TEST_CASE("adversary models") {
  const CommitteeLayout l({2, 3});
  CHECK(ExactAdversary::from_fraction(10, Rate::fraction(1, 4)).count == 2);
  CHECK_THROWS_AS(ExactAdversary{6}.validate(l), DomainError);
  CHECK_NOTHROW(ExactAdversary{5}.validate(l));
  CHECK_THROWS_AS((AverageAdversary{{Rate::of(0.1), Rate::of(0.2), Rate::of(0.3)}}.validate(l)),
                  DomainError);
  CHECK(AverageAdversary::uniform(Rate::of(0.2)).rate_for(1).value() == 0.2);
}

TEST_CASE("multivariate hypergeometric sums to one") {
  const CommitteeLayout l({2, 3, 4});
  for (std::int64_t m = 0; m <= 9; ++m) {
    double total = 0.0;
    for_each_counts({2, 3, 4}, [&](const std::vector<std::int64_t>& c) {
      if (c[0] + c[1] + c[2] == m) total += multivariate_hypergeometric_log_pmf(c, l, m).linear();
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  }
  // (2,2) with M = 2: both adversaries in the first committee, 1 of 6.
  CHECK(multivariate_hypergeometric_log_pmf(std::vector<std::int64_t>{2, 0}, CommitteeLayout({2, 2}), 2)
            .linear() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("product binomial sums to one") {
  const CommitteeLayout l({2, 3});
  const AverageAdversary adv{{Rate::of(0.2), Rate::of(0.7)}};
  double total = 0.0;
  for_each_counts({2, 3}, [&](const std::vector<std::int64_t>& c) {
    total += product_binomial_log_pmf(c, l, adv).linear();
  });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("multinomial sums to one") {
  const std::vector<Rate> probs{Rate::fraction(1, 2), Rate::fraction(1, 3), Rate::fraction(1, 6)};
  double total = 0.0;
  for_each_counts({6, 6, 6}, [&](const std::vector<std::int64_t>& c) {
    if (c[0] + c[1] + c[2] == 6) total += multinomial_log_pmf(c, 6, probs).linear();
  });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("marginal forms agree") {
  for (std::int64_t total : {12, 100, 1000, 10000}) {
    const std::int64_t size = total / 4;
    const std::int64_t m = total / 3;
    double sum = 0.0;
    for (std::int64_t j = 0; j <= size; ++j) {
      const double a = hypergeometric_marginal_log_pmf(j, size, total, m).log();
      const double b = hypergeometric_marginal_log_pmf_by_adversaries(j, size, total, m).log();
      if (a > -700.0) CHECK(a == doctest::Approx(b).epsilon(1e-12));
      sum += std::exp(a);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // C(4,2) C(6,1) / C(10,3) = 36 / 120
  CHECK(hypergeometric_marginal_log_pmf(2, 4, 10, 3).linear() == doctest::Approx(0.3));
  CHECK(hypergeometric_marginal_log_pmf(4, 4, 10, 3).is_zero());
}
