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


// Independent reference computations for tests: brute-force enumeration of
// adversary placements and a plain log-domain coefficient DP.

#ifndef SHARDRISK_TESTS_ORACLES_HPP_
#define SHARDRISK_TESTS_ORACLES_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shardrisk/probcore.hpp"

namespace shardrisk::oracle {

using Sizes = std::vector<std::int64_t>;

// Every layout of n nodes with sizes in ascending order.
inline void layouts_rec(std::int64_t left, std::int64_t min_size, Sizes& cur,
                        std::vector<Sizes>& out) {
  if (left == 0) {
    out.push_back(cur);
    return;
  }
  for (std::int64_t s = min_size; s <= left; ++s) {
    cur.push_back(s);
    layouts_rec(left - s, s, cur, out);
    cur.pop_back();
  }
}

inline std::vector<Sizes> all_layouts(std::int64_t n) {
  std::vector<Sizes> out;
  Sizes cur;
  layouts_rec(n, 1, cur, out);
  return out;
}

// Committee mu owns a consecutive block of bits. Does `mask` overload one?
inline bool placement_fails(const Sizes& sizes, std::uint32_t mask, Rate a) {
  int start = 0;
  for (std::int64_t s : sizes) {
    const std::uint32_t block = ((1u << s) - 1u) << start;
    if (std::popcount(mask & block) > a.floor_times(s)) return true;
    start += static_cast<int>(s);
  }
  return false;
}

inline std::int64_t total(const Sizes& sizes) {
  std::int64_t n = 0;
  for (std::int64_t s : sizes) n += s;
  return n;
}

// Failing M-subsets over all M-subsets.
inline double enumerate_hypergeometric(const Sizes& sizes, int m, Rate a) {
  const int n = static_cast<int>(total(sizes));
  std::int64_t fail = 0;
  std::int64_t all = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != m) continue;
    ++all;
    if (placement_fails(sizes, mask, a)) ++fail;
  }
  return static_cast<double>(fail) / static_cast<double>(all);
}

// Every one of the 2^N placements weighted by p^|mask| (1-p)^(N-|mask|).
inline double enumerate_binomial(const Sizes& sizes, double p, Rate a) {
  const int n = static_cast<int>(total(sizes));
  long double fail = 0.0L;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!placement_fails(sizes, mask, a)) continue;
    const int k = std::popcount(mask);
    fail += std::pow(static_cast<long double>(p), k) *
            std::pow(1.0L - static_cast<long double>(p), n - k);
  }
  return static_cast<double>(fail);
}

// log P(no committee fails) for exactly m adversaries: the z^m coefficient
// of prod_mu sum_{j <= cap_mu} C(N_mu, j) z^j over C(N, m), all in logs.
inline double reference_log_survival(const Sizes& sizes, std::int64_t m, Rate a) {
  std::vector<double> coef(static_cast<std::size_t>(m + 1), kNegInf);
  coef[0] = 0.0;
  for (std::int64_t s : sizes) {
    const std::int64_t cap = std::min(a.floor_times(s), s);
    std::vector<double> next(coef.size(), kNegInf);
    for (std::int64_t i = 0; i <= m; ++i) {
      if (coef[static_cast<std::size_t>(i)] == kNegInf) continue;
      for (std::int64_t j = 0; j <= cap && i + j <= m; ++j) {
        auto& slot = next[static_cast<std::size_t>(i + j)];
        slot = log_add_exp(slot, coef[static_cast<std::size_t>(i)] +
                                     log_binomial_coefficient(s, j));
      }
    }
    coef.swap(next);
  }
  return coef[static_cast<std::size_t>(m)] - log_binomial_coefficient(total(sizes), m);
}

}  // namespace shardrisk::oracle

#endif  // SHARDRISK_TESTS_ORACLES_HPP_
