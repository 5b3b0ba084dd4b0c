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

#include "shardrisk/probcore.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace shardrisk {
namespace {

constexpr double kLn2 = 0.693147180559945309417232121458176568;
constexpr double kSnapTolerance = 1e-12;

// glibc's lgamma writes the global signgam; the reentrant form keeps
// concurrent samplers race-free.
double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log(n!) - log(sqrt(2 pi n) (n/e)^n).
double stirling_error(std::int64_t n) {
  static constexpr double kSmall[16] = {
      0.0,
      0.08106146679532725821967,
      0.04134069595540929409382,
      0.02767792568499833914879,
      0.02079067210376509311152,
      0.01664469118982119216319,
      0.01387612882307074799875,
      0.01189670994589177009506,
      0.01041126526197209649748,
      0.009255462182712732917729,
      0.008330563433362871256469,
      0.007573675487951840794972,
      0.006942840107209529865664,
      0.00640899418800420706844,
      0.005951370112758847735624,
      0.005554733551962801371039,
  };
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (n <= 15) return kSmall[n];
  const double nd = static_cast<double>(n);
  const double nn = nd * nd;
  if (n > 500) return (s0 - s1 / nn) / nd;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / nd;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / nd;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nd;
}

// x log(x / m) + m - x without cancellation when x is close to m.
double deviance_term(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = s + ej / static_cast<double>(2 * j + 1);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

void check_rate(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " +
                      std::to_string(v));
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// Exact rational reading of a plain decimal literal ("0.25", "1e-3").
// Returns nullopt when the literal has too many digits for int64.
std::optional<std::pair<std::int64_t, std::int64_t>> decimal_as_fraction(
    std::string_view s) {
  std::int64_t mantissa = 0;
  int scale = 0;
  bool seen_dot = false;
  bool any_digit = false;
  std::size_t i = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (c == 'e' || c == 'E') break;
    if (c < '0' || c > '9') return std::nullopt;
    any_digit = true;
    if (mantissa > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
      return std::nullopt;
    }
    mantissa = mantissa * 10 + (c - '0');
    if (seen_dot) ++scale;
  }
  if (!any_digit) return std::nullopt;
  if (i < s.size()) {
    std::int64_t exponent = 0;
    std::string_view rest = s.substr(i + 1);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    if (!parse_int64(rest, exponent)) return std::nullopt;
    scale -= static_cast<int>(exponent);
  }
  std::int64_t den = 1;
  while (scale > 0) {
    if (den > std::numeric_limits<std::int64_t>::max() / 10) {
      return std::nullopt;
    }
    den *= 10;
    --scale;
  }
  while (scale < 0) {
    if (mantissa > std::numeric_limits<std::int64_t>::max() / 10) {
      return std::nullopt;
    }
    mantissa *= 10;
    ++scale;
  }
  const std::int64_t g = std::gcd(mantissa, den);
  if (g > 1) {
    mantissa /= g;
    den /= g;
  }
  return std::make_pair(mantissa, den);
}

}  // namespace

// --- LogProb ---------------------------------------------------------------

LogProb LogProb::from_log(double log_value) {
  if (std::isnan(log_value)) throw DomainError("log-probability is NaN");
  if (log_value > 0.0) {
    if (log_value > kSnapTolerance) {
      throw DomainError("log-probability must be <= 0, got " +
                        std::to_string(log_value));
    }
    log_value = 0.0;
  }
  return LogProb(log_value, Unchecked{});
}

LogProb LogProb::from_linear(double probability) {
  check_rate(probability, "probability");
  return LogProb(std::log(probability), Unchecked{});
}

double LogProb::linear() const { return std::exp(value_); }

LogProb LogProb::complement() const {
  return LogProb(log1m_exp(value_), Unchecked{});
}

// --- Rate ------------------------------------------------------------------

Rate Rate::of(double value) {
  check_rate(value, "rate");
  Rate r;
  r.value_ = value;
  return r;
}

Rate Rate::fraction(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0 || numerator < 0 || numerator > denominator) {
    throw DomainError("rate fraction must satisfy 0 <= num <= den, den > 0");
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  Rate r;
  r.numerator_ = numerator / g;
  r.denominator_ = denominator / g;
  r.value_ = static_cast<double>(r.numerator_) /
             static_cast<double>(r.denominator_);
  return r;
}

Rate Rate::parse(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw RateSyntaxError("empty rate");
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    std::int64_t num = 0;
    std::int64_t den = 0;
    if (!parse_int64(trim(std::string_view(s).substr(0, slash)), num) ||
        !parse_int64(trim(std::string_view(s).substr(slash + 1)), den)) {
      throw RateSyntaxError("malformed rational rate '" + s + "'");
    }
    return fraction(num, den);
  }
  if (auto exact = decimal_as_fraction(s);
      exact && exact->first <= exact->second) {
    return fraction(exact->first, exact->second);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw RateSyntaxError("malformed rate '" + s + "'");
  }
  return of(v);
}

std::optional<std::pair<std::int64_t, std::int64_t>> Rate::exact() const {
  if (!is_exact()) return std::nullopt;
  return std::make_pair(numerator_, denominator_);
}

std::int64_t Rate::floor_times(std::int64_t n) const {
  if (is_exact()) {
    const __int128 prod = static_cast<__int128>(numerator_) * n;
    __int128 q = prod / denominator_;
    if (prod % denominator_ != 0 && prod < 0) --q;
    return static_cast<std::int64_t>(q);
  }
  return static_cast<std::int64_t>(std::floor(value_ * static_cast<double>(n)));
}

std::int64_t Rate::round_times(std::int64_t n) const {
  if (is_exact()) {
    const __int128 prod = static_cast<__int128>(numerator_) * n;
    __int128 q = prod / denominator_;
    const __int128 twice_rem = 2 * (prod % denominator_);
    if (twice_rem > denominator_ ||
        (twice_rem == denominator_ && (q % 2) != 0)) {
      ++q;
    }
    return static_cast<std::int64_t>(q);
  }
  // Default floating-point rounding mode is round-half-to-even.
  return static_cast<std::int64_t>(
      std::nearbyint(value_ * static_cast<double>(n)));
}

std::string Rate::to_string() const {
  if (is_exact()) {
    if (denominator_ == 1) return std::to_string(numerator_);
    return std::to_string(numerator_) + "/" + std::to_string(denominator_);
  }
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

// --- scalar helpers --------------------------------------------------------

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

double log1m_exp(double x) {
  if (x > 0.0) {
    if (x > kSnapTolerance) {
      throw DomainError("log1m_exp argument must be <= 0");
    }
    x = 0.0;
  }
  if (x == kNegInf) return 0.0;
  if (x > -kLn2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

void LogSumExp::add(double log_term) {
  if (log_term == kNegInf) return;
  if (log_term > max_) {
    scaled_sum_ = scaled_sum_ * std::exp(max_ - log_term) + 1.0;
    max_ = log_term;
  } else {
    scaled_sum_ += std::exp(log_term - max_);
  }
}

double LogSumExp::value() const {
  if (max_ == kNegInf) return kNegInf;
  return max_ + std::log(scaled_sum_);
}

double log_sum_exp(std::span<const double> log_terms) {
  LogSumExp acc;
  for (double t : log_terms) acc.add(t);
  return acc.value();
}

double log_factorial(std::int64_t n) {
  if (n < 0) throw DomainError("factorial of a negative number");
  if (n < 2) return 0.0;
  return log_gamma(static_cast<double>(n) + 1.0);
}

// --- operations ------------------------------------------------------------

double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0) {
    throw DomainError("binomial coefficient arguments must be non-negative");
  }
  if (k > n) throw DomainError("binomial coefficient requires k <= n");
  if (k == 0 || k == n) return 0.0;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double binomial_log_pmf(std::int64_t n, double p, std::int64_t k) {
  if (k < 0 || k > n) return kNegInf;
  check_rate(p, "p");
  const double q = 1.0 - p;
  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (q == 0.0) return k == n ? 0.0 : kNegInf;
  const double nd = static_cast<double>(n);
  if (k == 0) {
    return p < 0.1 ? -deviance_term(nd, nd * q) - nd * p : nd * std::log1p(-p);
  }
  if (k == n) {
    return q < 0.1 ? -deviance_term(nd, nd * p) - nd * q : nd * std::log(p);
  }
  const double kd = static_cast<double>(k);
  const double lc = stirling_error(n) - stirling_error(k) - stirling_error(n - k) -
                    deviance_term(kd, nd * p) - deviance_term(nd - kd, nd * q);
  const double lf = kLog2Pi + std::log(kd) + std::log1p(-kd / nd);
  return lc - 0.5 * lf;
}

BinomialSplit binomial_tail_and_cdf(std::int64_t n, Rate p, std::int64_t k) {
  if (n < 0 || k < 0) throw DomainError("binomial arguments must be >= 0");
  if (k > n) throw DomainError("binomial split point k must not exceed n");
  if (k == n) return {LogProb::one(), LogProb::zero()};
  LogSumExp cdf;
  LogSumExp tail;
  for (std::int64_t j = 0; j <= k; ++j) cdf.add(binomial_log_pmf(n, p.value(), j));
  for (std::int64_t j = k + 1; j <= n; ++j) {
    tail.add(binomial_log_pmf(n, p.value(), j));
  }
  return {LogProb::from_log(cdf.value()), LogProb::from_log(tail.value())};
}

double kl_divergence(double q, double p) {
  check_rate(q, "q");
  check_rate(p, "p");
  if (q == p) return 0.0;
  if (p == 0.0 || p == 1.0) return kPosInf;
  double d = 0.0;
  if (q > 0.0) d += q * std::log1p((q - p) / p);
  if (q < 1.0) d += (1.0 - q) * std::log1p((p - q) / (1.0 - p));
  return d > 0.0 ? d : 0.0;
}

double kl_divergence(Rate q, Rate p) { return kl_divergence(q.value(), p.value()); }

LogProb complement_of_product(std::span<const LogProb> log_survivals) {
  double log_product = 0.0;
  for (LogProb s : log_survivals) log_product += s.log();
  return LogProb::from_log(log1m_exp(log_product));
}

LogProb stable_complement_product(std::span<const LogProb> log_terms) {
  double log_product = 0.0;
  for (LogProb p : log_terms) log_product += log1m_exp(p.log());
  return LogProb::from_log(log1m_exp(log_product));
}

}  // namespace shardrisk
