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

#include "shardrisk/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <thread>
#include <utility>

namespace shardrisk {
namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Exact Poisson 95% limits for 1..4 events.
constexpr std::array<double, 4> kPoissonLow{0.025317807984289876, 0.24220927854396496,
                                            0.6186721228956014, 1.0898653736263249};
constexpr std::array<double, 4> kPoissonHigh{5.571643390938898, 7.22468766772396,
                                             8.767273069742323, 10.241588675403694};

std::pair<double, double> small_count_interval(std::int64_t events, double n) {
  if (events == 0) return {0.0, std::min(1.0, 3.0 / n)};
  const auto i = static_cast<std::size_t>(events - 1);
  return {kPoissonLow[i] / n, std::min(1.0, kPoissonHigh[i] / n)};
}

std::int64_t committee_cap(Rate threshold, std::int64_t size) {
  return std::min(threshold.floor_times(size), size);
}

}  // namespace

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(mix64(seed) ^ mix64(index * kGamma + 0x632be59bd9b4e019ULL))) {}

std::uint64_t SampleStream::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double SampleStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

AverageSampler::AverageSampler(const CommitteeLayout& layout,
                               const AverageAdversary& adversary) {
  adversary.validate(layout);
  const auto sizes = layout.sizes();
  sizes_.assign(sizes.begin(), sizes.end());
  std::map<std::pair<std::int64_t, double>, std::size_t> seen;
  table_of_.reserve(sizes_.size());
  for (std::size_t mu = 0; mu < sizes_.size(); ++mu) {
    const double p = adversary.rate_for(mu).value();
    const auto key = std::make_pair(sizes_[mu], p);
    auto it = seen.find(key);
    if (it == seen.end()) {
      std::vector<double> cdf(static_cast<std::size_t>(sizes_[mu] + 1));
      double acc = 0.0;
      for (std::int64_t k = 0; k <= sizes_[mu]; ++k) {
        acc += std::exp(binomial_log_pmf(sizes_[mu], p, k));
        cdf[static_cast<std::size_t>(k)] = std::min(acc, 1.0);
      }
      cdf.back() = 1.0;
      it = seen.emplace(key, cdfs_.size()).first;
      cdfs_.push_back(std::move(cdf));
    }
    table_of_.push_back(it->second);
  }
}

CountVector AverageSampler::draw(SampleStream& stream) const {
  CountVector counts(sizes_.size());
  for (std::size_t mu = 0; mu < sizes_.size(); ++mu) {
    const std::vector<double>& cdf = cdfs_[table_of_[mu]];
    const double u = stream.next_double();
    // Smallest k with u < CDF(k).
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    counts[mu] = std::min<std::int64_t>(it - cdf.begin(), sizes_[mu]);
  }
  return counts;
}

bool AverageSampler::draw_fails(SampleStream& stream, Rate threshold) const {
  for (std::size_t mu = 0; mu < sizes_.size(); ++mu) {
    const std::vector<double>& cdf = cdfs_[table_of_[mu]];
    const double u = stream.next_double();
    const std::int64_t cap = committee_cap(threshold, sizes_[mu]);
    if (cap < sizes_[mu] && u >= cdf[static_cast<std::size_t>(cap)]) return true;
  }
  return false;
}

ExactSampler::ExactSampler(const CommitteeLayout& layout, std::int64_t adversaries)
    : total_(layout.total()), adversaries_(adversaries) {
  ExactAdversary{adversaries}.validate(layout);
  const auto sizes = layout.sizes();
  sizes_.assign(sizes.begin(), sizes.end());
  log_factorials_.resize(static_cast<std::size_t>(total_ + 1));
  for (std::int64_t i = 0; i <= total_; ++i) {
    log_factorials_[static_cast<std::size_t>(i)] = log_factorial(i);
  }
}

std::int64_t ExactSampler::draw_one(double u, std::int64_t pool, std::int64_t marked,
                                    std::int64_t draws) const {
  const std::int64_t lo = std::max<std::int64_t>(0, draws - (pool - marked));
  const std::int64_t hi = std::min(draws, marked);
  if (lo == hi) return lo;
  const auto lf = [this](std::int64_t i) {
    return log_factorials_[static_cast<std::size_t>(i)];
  };
  const std::int64_t mode = std::clamp<std::int64_t>(
      (draws + 1) * (marked + 1) / (pool + 2), lo, hi);
  const double log_mode = lf(marked) + lf(pool - marked) + lf(draws) +
                          lf(pool - draws) - lf(mode) - lf(marked - mode) -
                          lf(draws - mode) - lf(pool - marked - draws + mode) -
                          lf(pool);
  const double pmf_mode = std::exp(log_mode);
  // pmf(k+1) / pmf(k) = (marked-k)(draws-k) / ((k+1)(pool-marked-draws+k+1))
  const auto up_ratio = [&](std::int64_t k) {
    return static_cast<double>((marked - k) * (draws - k)) /
           static_cast<double>((k + 1) * (pool - marked - draws + k + 1));
  };
  u -= pmf_mode;
  if (u < 0.0) return mode;
  std::int64_t up = mode;
  std::int64_t down = mode;
  double pmf_up = pmf_mode;
  double pmf_down = pmf_mode;
  while (up < hi || down > lo) {
    if (up < hi) {
      pmf_up *= up_ratio(up);
      ++up;
      u -= pmf_up;
      if (u < 0.0) return up;
    }
    if (down > lo) {
      pmf_down /= up_ratio(down - 1);
      --down;
      u -= pmf_down;
      if (u < 0.0) return down;
    }
  }
  // Only rounding in the pmf sum can leave u positive here.
  return mode;
}

CountVector ExactSampler::draw(SampleStream& stream) const {
  CountVector counts(sizes_.size());
  std::int64_t pool = total_;
  std::int64_t marked = adversaries_;
  for (std::size_t mu = 0; mu < sizes_.size(); ++mu) {
    const std::int64_t x = draw_one(stream.next_double(), pool, marked, sizes_[mu]);
    counts[mu] = x;
    pool -= sizes_[mu];
    marked -= x;
  }
  return counts;
}

bool ExactSampler::draw_fails(SampleStream& stream, Rate threshold) const {
  std::int64_t pool = total_;
  std::int64_t marked = adversaries_;
  for (std::size_t mu = 0; mu < sizes_.size(); ++mu) {
    const std::int64_t x = draw_one(stream.next_double(), pool, marked, sizes_[mu]);
    if (x > committee_cap(threshold, sizes_[mu])) return true;
    pool -= sizes_[mu];
    marked -= x;
  }
  return false;
}

CountVector sample_counts_average(const CommitteeLayout& layout,
                                  const AverageAdversary& adversary,
                                  SampleStream& stream) {
  return AverageSampler(layout, adversary).draw(stream);
}

CountVector sample_counts_exact(const CommitteeLayout& layout, std::int64_t adversaries,
                                SampleStream& stream) {
  return ExactSampler(layout, adversaries).draw(stream);
}

DeltaEstimate make_estimate(std::int64_t failures, std::int64_t samples) {
  if (samples < 1) throw DomainError("need at least one sample");
  if (failures < 0 || failures > samples) {
    throw DomainError("failure count must lie in [0, samples]");
  }
  DeltaEstimate e;
  e.failures = failures;
  e.samples = samples;
  const double n = static_cast<double>(samples);
  e.delta_hat = static_cast<double>(failures) / n;
  e.std_error = std::sqrt(e.delta_hat * (1.0 - e.delta_hat) / n);
  const std::int64_t successes = samples - failures;
  if (failures < 5) {
    std::tie(e.ci_low, e.ci_high) = small_count_interval(failures, n);
  } else if (successes < 5) {
    const auto [lo, hi] = small_count_interval(successes, n);
    e.ci_low = std::max(0.0, 1.0 - hi);
    e.ci_high = 1.0 - lo;
  } else {
    e.ci_low = std::max(0.0, e.delta_hat - 1.959963984540054 * e.std_error);
    e.ci_high = std::min(1.0, e.delta_hat + 1.959963984540054 * e.std_error);
  }
  return e;
}

DeltaEstimate estimate_delta(const SimulationPlan& plan) {
  if (plan.samples < 1) throw DomainError("need at least one sample");
  if (plan.workers < 1) throw DomainError("need at least one worker");
  const FailureQuery& q = plan.query;
  if (!(q.threshold.value() > 0.0)) throw DomainError("threshold A must be > 0");

  auto count_range = [&](const auto& sampler, std::int64_t begin, std::int64_t end) {
    std::int64_t failures = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      SampleStream stream(plan.seed, static_cast<std::uint64_t>(i));
      if (sampler.draw_fails(stream, q.threshold)) ++failures;
    }
    return failures;
  };
  auto run = [&](const auto& sampler) {
    const std::int64_t workers =
        std::min<std::int64_t>(plan.workers, plan.samples);
    std::vector<std::int64_t> partial(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> threads;
    const std::int64_t chunk = plan.samples / workers;
    const std::int64_t extra = plan.samples % workers;
    std::int64_t begin = 0;
    for (std::int64_t w = 0; w < workers; ++w) {
      const std::int64_t end = begin + chunk + (w < extra ? 1 : 0);
      if (w + 1 == workers) {
        partial[static_cast<std::size_t>(w)] = count_range(sampler, begin, end);
      } else {
        threads.emplace_back([&, w, begin, end] {
          partial[static_cast<std::size_t>(w)] = count_range(sampler, begin, end);
        });
      }
      begin = end;
    }
    for (std::thread& t : threads) t.join();
    std::int64_t failures = 0;
    for (std::int64_t f : partial) failures += f;
    return failures;
  };

  std::int64_t failures = 0;
  if (std::holds_alternative<AverageAdversary>(q.adversary)) {
    failures = run(AverageSampler(q.layout, q.average()));
  } else {
    failures = run(ExactSampler(q.layout, q.exact().count));
  }
  return make_estimate(failures, plan.samples);
}

}  // namespace shardrisk
