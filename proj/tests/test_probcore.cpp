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
#include "shardrisk/probcore.hpp"

using namespace shardrisk;

TEST_CASE("LogProb construction and complement") {
  CHECK(LogProb::one().log() == 0.0);
  CHECK(LogProb::zero().is_zero());
  CHECK(LogProb::from_log(1e-13).log() == 0.0);
  CHECK_THROWS_AS(LogProb::from_log(1e-6), DomainError);
  CHECK_THROWS_AS(LogProb::from_linear(-0.1), DomainError);
  CHECK(LogProb::from_linear(0.25).log() == doctest::Approx(std::log(0.25)));
  // 1 - 1e-20 must not round to 1.
  const LogProb tiny = LogProb::from_log(std::log(1e-20));
  CHECK(tiny.complement().log() == doctest::Approx(-1e-20).epsilon(1e-12));
  CHECK(LogProb::zero().complement().log() == 0.0);
  CHECK(LogProb::one().complement().is_zero());
}

TEST_CASE("scalar helpers") {
  CHECK(log_add_exp(kNegInf, kNegInf) == kNegInf);
  CHECK(log_add_exp(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)));
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log1m_exp(-1e-20) == doctest::Approx(std::log(1e-20)));
  CHECK(log1m_exp(-50.0) == doctest::Approx(-std::exp(-50.0)).epsilon(1e-12));
  CHECK(log1m_exp(0.0) == kNegInf);

  LogSumExp acc;
  CHECK(acc.value() == kNegInf);
  for (int i = 0; i < 10; ++i) acc.add(std::log(0.1));
  CHECK(acc.value() == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<double> terms{-1000.0, -1000.0};
  CHECK(log_sum_exp(terms) == doctest::Approx(-1000.0 + std::log(2.0)));
}

TEST_CASE("rates") {
  const Rate third = Rate::parse("1/3");
  REQUIRE(third.is_exact());
  CHECK(third.floor_times(3) == 1);
  CHECK(third.floor_times(100) == 33);
  CHECK(Rate::parse("0.25").exact() == std::make_pair(std::int64_t{1}, std::int64_t{4}));
  CHECK(Rate::parse("1e-3").value() == doctest::Approx(1e-3));
  CHECK(Rate::parse(" 2/4 ").exact() == std::make_pair(std::int64_t{1}, std::int64_t{2}));
  CHECK(Rate::fraction(1, 4).round_times(10) == 2);   // 2.5 -> 2
  CHECK(Rate::fraction(3, 10).round_times(5) == 2);   // 1.5 -> 2
  CHECK_THROWS_AS(Rate::parse("abc"), RateSyntaxError);
  CHECK_THROWS_AS(Rate::parse(""), RateSyntaxError);
  CHECK_THROWS_AS(Rate::parse("1/x"), RateSyntaxError);
  // Out of range is a domain error but not a syntax error.
  bool syntax = false;
  try {
    Rate::parse("1.5");
  } catch (const RateSyntaxError&) {
    syntax = true;
  } catch (const DomainError&) {
  }
  CHECK_FALSE(syntax);
  CHECK_THROWS_AS(Rate::of(-0.1), DomainError);
}

TEST_CASE("binomial coefficients and pmf") {
  CHECK(log_binomial_coefficient(10, 3) == doctest::Approx(std::log(120.0)));
  CHECK(log_binomial_coefficient(5, 0) == 0.0);
  CHECK_THROWS_AS(log_binomial_coefficient(3, 4), DomainError);
  CHECK(log_factorial(0) == 0.0);
  CHECK(log_factorial(10) == doctest::Approx(std::log(3628800.0)));

  // mpmath, 40 digits, at the double nearest 0.3.
  CHECK(binomial_log_pmf(1000, 0.25, 250) ==
        doctest::Approx(-3.5361890668394330589).epsilon(1e-14));
  CHECK(binomial_log_pmf(100000, 0.3, 30000) ==
        doctest::Approx(-5.8950805264780875785).epsilon(1e-14));
  CHECK(binomial_log_pmf(5, 0.25, 1) == doctest::Approx(std::log(405.0 / 1024.0)));
  CHECK(binomial_log_pmf(5, 0.0, 0) == 0.0);
  CHECK(binomial_log_pmf(5, 0.0, 1) == kNegInf);
  CHECK(binomial_log_pmf(5, 1.0, 5) == 0.0);
  CHECK(binomial_log_pmf(5, 0.5, 6) == kNegInf);
}

TEST_CASE("binomial split") {
  const BinomialSplit s = binomial_tail_and_cdf(5, Rate::fraction(1, 4), 1);
  CHECK(s.cdf.linear() == doctest::Approx(81.0 / 128.0).epsilon(1e-15));
  CHECK(s.tail.linear() == doctest::Approx(47.0 / 128.0).epsilon(1e-15));
  const BinomialSplit big = binomial_tail_and_cdf(1000, Rate::fraction(1, 4), 400);
  CHECK(big.cdf.linear() + big.tail.linear() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(big.tail.log() < -50.0);
  const BinomialSplit all = binomial_tail_and_cdf(7, Rate::fraction(1, 2), 7);
  CHECK(all.tail.is_zero());
  CHECK(all.cdf.log() == 0.0);
}

TEST_CASE("kl divergence") {
  // mpmath values.
  CHECK(kl_divergence(0.4, 0.25) == doctest::Approx(0.05411532090976838).epsilon(1e-14));
  CHECK(kl_divergence(Rate::fraction(1, 3), Rate::fraction(1, 4)) ==
        doctest::Approx(0.01737200037967134).epsilon(1e-14));
  CHECK(kl_divergence(0.34, 0.25) == doctest::Approx(0.020174772717782586581).epsilon(1e-14));
  CHECK(kl_divergence(0.25, 0.25) == 0.0);
  CHECK(kl_divergence(0.0, 0.25) == doctest::Approx(-std::log(0.75)));
  CHECK(kl_divergence(0.5, 0.0) == kPosInf);
}

TEST_CASE("complement products") {
  const std::vector<LogProb> fails{LogProb::from_linear(1e-18), LogProb::from_linear(1e-18)};
  CHECK(stable_complement_product(fails).linear() == doctest::Approx(2e-18).epsilon(1e-12));
  const std::vector<LogProb> survivals{LogProb::from_linear(0.5), LogProb::from_linear(0.5)};
  CHECK(complement_of_product(survivals).linear() == doctest::Approx(0.75));
  CHECK(stable_complement_product(std::vector<LogProb>{}).is_zero());
}
