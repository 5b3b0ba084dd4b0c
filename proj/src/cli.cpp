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


#include "shardrisk/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "cli_table.hpp"
#include "json.hpp"
#include "shardrisk/failure.hpp"
#include "shardrisk/partitions.hpp"
#include "shardrisk/probcore.hpp"
#include "shardrisk/saddle.hpp"
#include "shardrisk/simulate.hpp"
#include "shardrisk/sizing.hpp"

namespace shardrisk::cli {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- flag values -----------------------------------------------------------

Rate rate_flag(const std::string& name, const std::string& text) {
  try {
    return Rate::parse(text);
  } catch (const RateSyntaxError& e) {
    throw UsageError(name + ": " + e.what());
  }
}

std::int64_t int_flag(const std::string& name, std::string_view text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw UsageError(name + ": expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

// "1,10,100" or "from:to" or "from:to:step".
std::vector<std::int64_t> parse_committee_range(const std::string& text) {
  std::vector<std::int64_t> ks;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 2 && parts.size() != 3) {
      throw UsageError("--committees: expected from:to[:step]");
    }
    const std::int64_t from = int_flag("--committees", parts[0]);
    const std::int64_t to = int_flag("--committees", parts[1]);
    const std::int64_t step = parts.size() == 3 ? int_flag("--committees", parts[2]) : 1;
    if (step < 1 || from > to) throw UsageError("--committees: empty range");
    for (std::int64_t k = from; k <= to; k += step) ks.push_back(k);
  } else {
    for (const auto& part : split(text, ',')) ks.push_back(int_flag("--committees", part));
  }
  if (ks.empty()) throw UsageError("--committees: empty range");
  return ks;
}

// --- scenarios -------------------------------------------------------------

struct ScenarioFlags {
  std::int64_t nodes = 0;
  std::int64_t committees = 0;
  std::string layout;
  std::string adversary_frac;
  std::int64_t adversary_count = 0;
  std::string threshold;
  CLI::Option* nodes_opt = nullptr;
  CLI::Option* committees_opt = nullptr;
  CLI::Option* layout_opt = nullptr;
  CLI::Option* frac_opt = nullptr;
  CLI::Option* count_opt = nullptr;

  void attach(CLI::App* app) {
    nodes_opt = app->add_option("--nodes", nodes, "Total nodes N");
    committees_opt = app->add_option("--committees", committees, "Committees K, split as N = nK + r");
    layout_opt = app->add_option("--layout", layout, "Explicit committee sizes, e.g. 5,5");
    frac_opt = app->add_option("--adversary-frac", adversary_frac, "Adversarial fraction P");
    count_opt = app->add_option("--adversary-count", adversary_count, "Adversarial nodes M");
    app->add_option("--threshold", threshold, "Failure threshold A, e.g. 1/3")->required();
  }
};

// Both adversary models are always available: a fraction P also fixes
// M = round(N P), and a count M also fixes P = M / N.
struct Scenario {
  CommitteeLayout layout;
  Rate p;
  std::int64_t m = 0;
  Rate threshold;
  bool count_given = false;

  FailureQuery average_query() const {
    return FailureQuery{layout, AverageAdversary::uniform(p), threshold};
  }
  FailureQuery exact_query() const {
    return FailureQuery{layout, ExactAdversary{m}, threshold};
  }
};

Scenario make_scenario(CommitteeLayout layout, const std::string& frac,
                       std::optional<std::int64_t> count, const std::string& threshold) {
  if (!frac.empty() && count) {
    throw UsageError("give either --adversary-frac or --adversary-count");
  }
  if (frac.empty() && !count) {
    throw UsageError("one of --adversary-frac or --adversary-count is required");
  }
  const Rate a = rate_flag("--threshold", threshold);
  const std::int64_t nodes = layout.total();
  if (count) {
    if (*count < 0 || *count > nodes) {
      throw DomainError("adversary count must lie in [0, N]");
    }
    return Scenario{std::move(layout), Rate::fraction(*count, nodes), *count, a, true};
  }
  const Rate p = rate_flag("--adversary-frac", frac);
  const std::int64_t m = ExactAdversary::from_fraction(nodes, p).count;
  return Scenario{std::move(layout), p, m, a, false};
}

Scenario build_scenario(const ScenarioFlags& f) {
  std::optional<CommitteeLayout> layout;
  if (f.layout_opt->count() > 0) {
    if (f.nodes_opt->count() > 0 || f.committees_opt->count() > 0) {
      throw UsageError("give either --layout or --nodes with --committees");
    }
    std::vector<std::int64_t> sizes;
    for (const auto& part : split(f.layout, ',')) sizes.push_back(int_flag("--layout", part));
    // Smaller committees first, like the N = nK + r split.
    std::sort(sizes.begin(), sizes.end());
    layout.emplace(std::move(sizes));
  } else {
    if (f.nodes_opt->count() == 0 || f.committees_opt->count() == 0) {
      throw UsageError("--nodes and --committees are required without --layout");
    }
    layout.emplace(CommitteeLayout::from_split(f.nodes, f.committees));
  }
  std::optional<std::int64_t> count;
  if (f.count_opt->count() > 0) count = f.adversary_count;
  const std::string frac = f.frac_opt->count() > 0 ? f.adversary_frac : std::string();
  if (f.frac_opt->count() > 0 && frac.empty()) throw UsageError("--adversary-frac: empty");
  return make_scenario(std::move(*layout), frac, count, f.threshold);
}

// --- methods ---------------------------------------------------------------

enum class Runner { kAnalytic, kMonteCarloAverage, kMonteCarloExact, kBracketLower, kBracketUpper };

struct MethodSpec {
  std::string tag;
  Runner runner = Runner::kAnalytic;
  Method method = Method::kExactBinomial;

  bool is_monte_carlo() const {
    return runner == Runner::kMonteCarloAverage || runner == Runner::kMonteCarloExact;
  }
  bool is_bracket() const {
    return runner == Runner::kBracketLower || runner == Runner::kBracketUpper;
  }
};

MethodSpec analytic(Method m) { return MethodSpec{std::string(method_tag(m)), Runner::kAnalytic, m}; }

std::vector<MethodSpec> expand_methods(const std::vector<std::string>& names, bool count_given) {
  std::vector<MethodSpec> specs;
  auto push = [&specs](MethodSpec spec) {
    for (const auto& s : specs) {
      if (s.tag == spec.tag) return;
    }
    specs.push_back(std::move(spec));
  };
  for (const auto& name : names) {
    if (name == "theorem1-bounds") {
      push(analytic(Method::kTheorem1Lower));
      push(analytic(Method::kTheorem1UpperFerrante));
      push(analytic(Method::kTheorem1UpperAsh));
    } else if (name == "union-bounds") {
      push(analytic(Method::kUnionFixed));
      push(analytic(Method::kUnionRandom));
      push(analytic(Method::kUnionRandomSimple));
      push(analytic(Method::kUnionHyperExact));
      push(analytic(Method::kUnionHyperHoeffding));
    } else if (name == "monte-carlo") {
      push(count_given ? MethodSpec{"monte-carlo-exact", Runner::kMonteCarloExact, Method::kMonteCarlo}
                       : MethodSpec{"monte-carlo-average", Runner::kMonteCarloAverage, Method::kMonteCarlo});
    } else if (name == "monte-carlo-average") {
      push(MethodSpec{name, Runner::kMonteCarloAverage, Method::kMonteCarlo});
    } else if (name == "monte-carlo-exact") {
      push(MethodSpec{name, Runner::kMonteCarloExact, Method::kMonteCarlo});
    } else if (name == "bracket-lower") {
      push(MethodSpec{name, Runner::kBracketLower, Method::kExactBinomial});
    } else if (name == "bracket-upper") {
      push(MethodSpec{name, Runner::kBracketUpper, Method::kExactBinomial});
    } else if (auto m = method_from_tag(name)) {
      push(analytic(*m));
    } else {
      throw UsageError("unknown method '" + name + "'");
    }
  }
  if (specs.empty()) throw UsageError("no methods requested");
  return specs;
}

bool uses_exact_model(Method m) {
  return m == Method::kExactHypergeometric || m == Method::kUnionHyperExact ||
         m == Method::kUnionHyperHoeffding || m == Method::kAsymptotic;
}

DeltaResult evaluate(Method method, const Scenario& s) {
  switch (method) {
    case Method::kExactBinomial:
      return delta_exact_binomial(s.average_query());
    case Method::kExactHypergeometric:
      return delta_exact_hypergeometric(s.exact_query());
    case Method::kTheorem1Lower:
      return theorem1_bounds(s.average_query()).lower;
    case Method::kTheorem1UpperAsh:
      return theorem1_bounds(s.average_query()).upper_ash;
    case Method::kTheorem1UpperFerrante:
      return theorem1_bounds(s.average_query()).upper_ferrante;
    case Method::kUnionRandom:
    case Method::kUnionRandomSimple: {
      // Committee probabilities proportional to the layout's sizes, with Q
      // taken at those sizes.
      std::vector<Rate> probs;
      for (std::int64_t size : s.layout.sizes()) {
        probs.push_back(Rate::fraction(size, s.layout.total()));
      }
      const auto b = union_bound_random_sizes(s.layout.total(), probs,
                                              AverageAdversary::uniform(s.p), s.threshold,
                                              s.layout.sizes());
      return method == Method::kUnionRandom ? b.phi_form : b.simple_form;
    }
    case Method::kUnionFixed:
      return union_bound_fixed_sizes(s.average_query());
    case Method::kUnionHyperExact:
      return union_bound_hypergeometric(s.exact_query()).exact_tail_sum;
    case Method::kUnionHyperHoeffding:
      return union_bound_hypergeometric(s.exact_query()).hoeffding;
    case Method::kAsymptotic:
      return delta_asymptotic(s.layout, s.m, s.threshold);
    case Method::kMonteCarlo:
      break;
  }
  throw UsageError("monte-carlo needs a sample count");
}

struct McOptions {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
};

DeltaEstimate simulate(Runner runner, const Scenario& s, const McOptions& mc) {
  SimulationPlan plan{runner == Runner::kMonteCarloExact ? s.exact_query() : s.average_query(),
                      mc.samples, mc.seed, mc.workers};
  return estimate_delta(plan);
}

std::string diagnostic_flags(const Diagnostics& d) {
  std::vector<std::string> tokens;
  if (d.clamped) tokens.emplace_back("clamped");
  if (!d.precondition_satisfied) tokens.emplace_back("precondition-violated");
  if (d.excluded_committees > 0) {
    tokens.push_back("excluded=" + std::to_string(d.excluded_committees));
  }
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ';';
    out += t;
  }
  return out;
}

std::string error_flag(const std::exception& e) { return std::string("error: ") + e.what(); }

// --- output ----------------------------------------------------------------

struct OutputOptions {
  std::string format = "csv";
  std::string path;
};

void emit(const Table& table, const OutputOptions& options, std::ostream& out) {
  const std::string text = render(table, parse_format(options.format));
  if (options.path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(options.path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + options.path + "' for writing");
  file << text;
  if (!file.flush()) throw std::runtime_error("cannot write '" + options.path + "'");
}

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
// handled exactly once, so results stored by index do not depend on timing.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  const std::size_t threads_wanted =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads_wanted <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < threads_wanted; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

// --- delta -----------------------------------------------------------------

struct DeltaCommand {
  ScenarioFlags scenario;
  std::vector<std::string> methods{"exact-binomial"};
  McOptions mc;

  void attach(CLI::App* app) {
    scenario.attach(app);
    app->add_option("--method", methods, "Methods, comma separated")->delimiter(',');
    app->add_option("--samples", mc.samples, "Monte Carlo samples");
    app->add_option("--seed", mc.seed, "Monte Carlo seed");
    app->add_option("--workers", mc.workers, "Monte Carlo worker threads");
  }

  Table run() const {
    const Scenario s = build_scenario(scenario);
    const auto specs = expand_methods(methods, s.count_given);
    Table t;
    t.columns = {"method", "delta", "log_delta", "log_survival", "std_error",
                 "ci_low", "ci_high", "flags", "note"};
    for (const auto& spec : specs) {
      if (spec.is_bracket()) throw UsageError(spec.tag + " is only available in sweep-n");
      auto& row = t.add_row();
      row[0] = spec.tag;
      if (spec.is_monte_carlo()) {
        const DeltaEstimate e = simulate(spec.runner, s, mc);
        row[1] = e.delta_hat;
        row[4] = e.std_error;
        row[5] = e.ci_low;
        row[6] = e.ci_high;
        row[7] = "failures=" + std::to_string(e.failures);
        continue;
      }
      const DeltaResult r = evaluate(spec.method, s);
      row[1] = r.delta;
      row[2] = r.log_delta;
      row[3] = r.log_survival;
      row[7] = diagnostic_flags(r.diagnostics);
      row[8] = r.diagnostics.note;
    }
    return t;
  }
};

// --- bounds ----------------------------------------------------------------

struct BoundsCommand {
  ScenarioFlags scenario;

  void attach(CLI::App* app) { scenario.attach(app); }

  Table run() const {
    const Scenario s = build_scenario(scenario);
    static constexpr Method kRows[] = {
        Method::kExactBinomial,      Method::kTheorem1Lower,
        Method::kTheorem1UpperFerrante, Method::kTheorem1UpperAsh,
        Method::kUnionFixed,         Method::kUnionRandom,
        Method::kUnionRandomSimple,  Method::kExactHypergeometric,
        Method::kUnionHyperExact,    Method::kUnionHyperHoeffding,
    };
    Table t;
    t.columns = {"method", "model", "delta", "log_delta", "raw_log_value", "flags"};
    std::optional<std::string> first_error;
    bool any_ok = false;
    for (Method m : kRows) {
      auto& row = t.add_row();
      row[0] = std::string(method_tag(m));
      row[1] = std::string(uses_exact_model(m) ? "exact" : "average");
      try {
        const DeltaResult r = evaluate(m, s);
        row[2] = r.delta;
        row[3] = r.log_delta;
        row[4] = r.diagnostics.raw_log_value;
        row[5] = diagnostic_flags(r.diagnostics);
        any_ok = true;
      } catch (const DomainError& e) {
        row[5] = error_flag(e);
        if (!first_error) first_error = e.what();
      }
    }
    if (!any_ok && first_error) throw DomainError(*first_error);
    return t;
  }
};

// --- asymptotic ------------------------------------------------------------

struct AsymptoticCommand {
  ScenarioFlags scenario;
  bool compare = false;

  void attach(CLI::App* app) {
    scenario.attach(app);
    app->add_flag("--compare", compare, "Add the exact hypergeometric value");
  }

  Table run() const {
    const Scenario s = build_scenario(scenario);
    SaddleSolution sol;
    const DeltaResult r = delta_asymptotic(s.layout, s.m, s.threshold, sol);
    const double p = static_cast<double>(s.m) / static_cast<double>(s.layout.total());
    Table t;
    t.columns = {"nodes", "committees", "adversaries", "q", "psi", "variance_sum",
                 "mean_residual", "iterations", "converged", "unconstrained_committees",
                 "prefactor", "prefactor_contour", "delta", "log_delta", "log_survival",
                 "flags"};
    if (compare) {
      t.columns.insert(t.columns.end(),
                       {"exact_delta", "exact_log_survival", "log_survival_rel_error"});
    }
    auto& row = t.add_row();
    row[0] = s.layout.total();
    row[1] = s.layout.committee_count();
    row[2] = s.m;
    row[3] = sol.q;
    row[4] = sol.psi;
    row[5] = sol.variance_sum;
    row[6] = sol.mean_residual;
    row[7] = static_cast<std::int64_t>(sol.iterations);
    row[8] = sol.converged;
    row[9] = sol.unconstrained_committees;
    row[10] = saddle_prefactor(s.layout, p, sol);
    row[11] = saddle_prefactor_contour_form(s.layout, p, s.threshold, sol);
    row[12] = r.delta;
    row[13] = r.log_delta;
    row[14] = r.log_survival;
    row[15] = diagnostic_flags(r.diagnostics);
    if (compare) {
      const DeltaResult exact = delta_exact_hypergeometric(s.exact_query());
      row[16] = exact.delta;
      row[17] = exact.log_survival;
      row[18] = exact.log_survival == 0.0
                    ? 0.0
                    : std::abs(r.log_survival - exact.log_survival) / std::abs(exact.log_survival);
    }
    return t;
  }
};

// --- size ------------------------------------------------------------------

struct SizeCommand {
  std::int64_t nodes = 0;
  std::string delta;
  std::string threshold;
  std::string adversary_frac;
  std::string stop = "largest";
  std::int64_t min_n_for_k = 0;
  std::string model;
  std::string method;
  std::int64_t n_max = MinSizeOptions{}.n_max;
  CLI::Option* nodes_opt = nullptr;
  CLI::Option* stop_opt = nullptr;
  CLI::Option* min_n_opt = nullptr;
  CLI::Option* model_opt = nullptr;
  CLI::Option* method_opt = nullptr;

  void attach(CLI::App* app) {
    nodes_opt = app->add_option("--nodes", nodes, "Total nodes N");
    app->add_option("--delta", delta, "Target failure probability")->required();
    app->add_option("--threshold", threshold, "Failure threshold A")->required();
    app->add_option("--adversary-frac", adversary_frac, "Adversarial fraction P")->required();
    stop_opt = app->add_option("--stop", stop, "largest or first-exceedance")
                   ->check(CLI::IsMember({"largest", "first-exceedance"}));
    min_n_opt = app->add_option("--min-n-for-K", min_n_for_k,
                                "Solve the smallest committee size for K committees");
    model_opt = app->add_option("--model", model, "average or exact (with --min-n-for-K)")
                    ->check(CLI::IsMember({"average", "exact"}));
    method_opt = app->add_option("--method", method, "Evaluation method (with --min-n-for-K)");
    app->add_option("--n-max", n_max, "Largest committee size searched");
  }

  Table run() const {
    const Rate d = rate_flag("--delta", delta);
    const Rate a = rate_flag("--threshold", threshold);
    const Rate p = rate_flag("--adversary-frac", adversary_frac);
    if (min_n_opt->count() == 0) {
      if (nodes_opt->count() == 0) throw UsageError("--nodes is required");
      if (model_opt->count() > 0 || method_opt->count() > 0) {
        throw UsageError("--model and --method need --min-n-for-K");
      }
      const SizingResult r = stop == "largest"
                                 ? max_committees(nodes, d, a, p)
                                 : max_committees_first_exceedance(nodes, d, a, p);
      Table t;
      t.columns = {"K", "n", "r", "prob", "iterations"};
      t.add_row() = {r.K, r.n, r.r, r.prob, r.iterations};
      return t;
    }
    if (nodes_opt->count() > 0 || stop_opt->count() > 0) {
      throw UsageError("--min-n-for-K takes neither --nodes nor --stop");
    }
    if (model_opt->count() > 0 && method_opt->count() > 0) {
      throw UsageError("give either --model or --method");
    }
    MinSizeOptions opts;
    opts.n_max = n_max;
    MinSizeResult r;
    if (method_opt->count() > 0) {
      const auto m = method_from_tag(method);
      if (!m) throw UsageError("unknown method '" + method + "'");
      r = min_committee_size_by(*m, min_n_for_k, d, a, p, opts);
    } else {
      const AdversaryMode mode = model == "exact" ? AdversaryMode::kExact : AdversaryMode::kAverage;
      r = min_committee_size(min_n_for_k, d, a, p, mode, opts);
    }
    Table t;
    t.columns = {"K", "n", "raw_n", "delta", "method", "evaluations",
                 "bracket_lower", "bracket_upper", "f_tilde"};
    auto& row = t.add_row();
    row[0] = min_n_for_k;
    row[1] = r.n;
    row[2] = r.raw_n;
    row[3] = r.delta;
    row[4] = std::string(method_tag(r.method));
    row[5] = r.evaluations;
    if (p.value() > 0.0 && p.value() < a.value()) {
      const SizeBracket b = size_bracket(min_n_for_k, d, a, p);
      row[6] = b.lower;
      row[7] = b.upper;
      row[8] = b.f_tilde;
    }
    return t;
  }
};

// --- simulate --------------------------------------------------------------

struct SimulateCommand {
  ScenarioFlags scenario;
  McOptions mc;
  std::string model;

  void attach(CLI::App* app) {
    scenario.attach(app);
    app->add_option("--samples", mc.samples, "Samples")->check(CLI::PositiveNumber);
    app->add_option("--seed", mc.seed, "Seed");
    app->add_option("--workers", mc.workers, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--model", model,
                    "average or exact; defaults to the model the adversary flag implies")
        ->check(CLI::IsMember({"average", "exact"}));
  }

  Table run() const {
    const Scenario s = build_scenario(scenario);
    const bool exact = model.empty() ? s.count_given : model == "exact";
    const DeltaEstimate e =
        simulate(exact ? Runner::kMonteCarloExact : Runner::kMonteCarloAverage, s, mc);
    Table t;
    t.columns = {"model", "samples", "seed", "failures", "delta_hat", "std_error",
                 "ci_low", "ci_high"};
    t.add_row() = {std::string(exact ? "exact" : "average"), e.samples,
                   std::to_string(mc.seed), e.failures, e.delta_hat, e.std_error,
                   e.ci_low, e.ci_high};
    return t;
  }
};

// --- sweep -----------------------------------------------------------------

struct SweepConfig {
  std::string mode = "sweep-K";
  std::int64_t nodes = 0;
  std::vector<std::int64_t> committees;
  std::string threshold;
  std::string adversary_frac;
  std::optional<std::int64_t> adversary_count;
  std::string delta;
  std::vector<std::string> methods{"exact-binomial"};
  McOptions mc;
  std::int64_t n_max = MinSizeOptions{}.n_max;
  std::optional<std::string> format;
  std::optional<std::string> output;
};

std::string json_rate_text(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  // Shortest round-trip text, so 0.25 parses back to exactly 1/4.
  if (v.is_number_float()) return format_double(v.get<double>());
  throw UsageError("config: '" + key + "' must be a number or a string");
}

std::vector<std::int64_t> json_committees(const json& v) {
  if (v.is_string()) return parse_committee_range(v.get<std::string>());
  std::vector<std::int64_t> ks;
  if (v.is_array()) {
    for (const auto& k : v) {
      if (!k.is_number_integer()) throw UsageError("config: committees must be integers");
      ks.push_back(k.get<std::int64_t>());
    }
  } else if (v.is_object()) {
    for (const auto& [key, _] : v.items()) {
      if (key != "from" && key != "to" && key != "step") {
        throw UsageError("config: unknown committees key '" + key + "'");
      }
    }
    const std::int64_t from = v.at("from").get<std::int64_t>();
    const std::int64_t to = v.at("to").get<std::int64_t>();
    const std::int64_t step = v.value("step", std::int64_t{1});
    if (step < 1 || from > to) throw UsageError("config: empty committees range");
    for (std::int64_t k = from; k <= to; k += step) ks.push_back(k);
  } else {
    throw UsageError("config: committees must be a list, a range string or an object");
  }
  if (ks.empty()) throw UsageError("config: empty committees list");
  return ks;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  if (!j.contains("schema") || j["schema"] != std::string(kSweepSchema)) {
    throw UsageError("config: schema must be \"" + std::string(kSweepSchema) + "\"");
  }
  SweepConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "schema") {
      } else if (key == "mode") {
        c.mode = v.get<std::string>();
      } else if (key == "nodes") {
        c.nodes = v.get<std::int64_t>();
      } else if (key == "committees") {
        c.committees = json_committees(v);
      } else if (key == "threshold") {
        c.threshold = json_rate_text(v, key);
      } else if (key == "adversary_frac") {
        c.adversary_frac = json_rate_text(v, key);
      } else if (key == "adversary_count") {
        c.adversary_count = v.get<std::int64_t>();
      } else if (key == "delta") {
        c.delta = json_rate_text(v, key);
      } else if (key == "methods") {
        c.methods = v.get<std::vector<std::string>>();
      } else if (key == "samples") {
        c.mc.samples = v.get<std::int64_t>();
      } else if (key == "seed") {
        c.mc.seed = v.get<std::uint64_t>();
      } else if (key == "workers") {
        c.mc.workers = v.get<int>();
      } else if (key == "n_max") {
        c.n_max = v.get<std::int64_t>();
      } else if (key == "format") {
        c.format = v.get<std::string>();
      } else if (key == "output") {
        c.output = v.get<std::string>();
      } else {
        throw UsageError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

struct SweepCommand {
  std::string config_path;
  std::string mode;
  std::int64_t nodes = 0;
  std::string committees;
  std::string threshold;
  std::string adversary_frac;
  std::int64_t adversary_count = 0;
  std::string delta;
  std::vector<std::string> methods;
  McOptions mc;
  std::int64_t n_max = 0;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", config_path, "JSON config (schema shardrisk.sweep/1)");
    sub->add_option("--mode", mode, "sweep-K or sweep-n")
        ->check(CLI::IsMember({"sweep-K", "sweep-n"}));
    sub->add_option("--nodes", nodes, "Total nodes N (sweep-K)");
    sub->add_option("--committees", committees, "K values: 1,10,100 or from:to[:step]");
    sub->add_option("--threshold", threshold, "Failure threshold A");
    sub->add_option("--adversary-frac", adversary_frac, "Adversarial fraction P");
    sub->add_option("--adversary-count", adversary_count, "Adversarial nodes M (sweep-K)");
    sub->add_option("--delta", delta, "Target failure probability (sweep-n)");
    sub->add_option("--method", methods, "Methods, comma separated")->delimiter(',');
    sub->add_option("--samples", mc.samples, "Monte Carlo samples per row");
    sub->add_option("--seed", mc.seed, "Monte Carlo seed");
    sub->add_option("--workers", mc.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--n-max", n_max, "Largest committee size searched (sweep-n)");
  }

  bool given(const std::string& name) const { return app->get_option(name)->count() > 0; }

  // Config first, then any flag given on the command line.
  SweepConfig resolve(OutputOptions& output, bool format_given, bool output_given) const {
    SweepConfig c = config_path.empty() ? SweepConfig{} : load_sweep_config(config_path);
    if (given("--mode")) c.mode = mode;
    if (given("--nodes")) c.nodes = nodes;
    if (given("--committees")) c.committees = parse_committee_range(committees);
    if (given("--threshold")) c.threshold = threshold;
    if (given("--adversary-frac")) {
      c.adversary_frac = adversary_frac;
      c.adversary_count.reset();
    }
    if (given("--adversary-count")) {
      c.adversary_count = adversary_count;
      if (!given("--adversary-frac")) c.adversary_frac.clear();
    }
    if (given("--delta")) c.delta = delta;
    if (given("--method")) c.methods = methods;
    if (given("--samples")) c.mc.samples = mc.samples;
    if (given("--seed")) c.mc.seed = mc.seed;
    if (given("--workers")) c.mc.workers = mc.workers;
    if (given("--n-max")) c.n_max = n_max;
    if (!format_given && c.format) output.format = *c.format;
    if (!output_given && c.output) output.path = *c.output;
    if (c.mode != "sweep-K" && c.mode != "sweep-n") {
      throw UsageError("mode must be sweep-K or sweep-n");
    }
    if (c.committees.empty()) throw UsageError("sweep needs committees");
    if (c.threshold.empty()) throw UsageError("sweep needs a threshold");
    if (c.mc.samples < 1) throw UsageError("samples must be >= 1");
    if (c.mc.workers < 1) throw UsageError("workers must be >= 1");
    for (std::int64_t k : c.committees) {
      if (k < 1) throw UsageError("committee counts must be >= 1");
    }
    return c;
  }
};

std::uint64_t row_seed(std::uint64_t seed, std::int64_t k) {
  SampleStream s(seed, static_cast<std::uint64_t>(k));
  return s.next_u64();
}

Table sweep_columns(const std::vector<MethodSpec>& specs) {
  Table t;
  t.columns = {"K", "n", "r"};
  for (const auto& spec : specs) {
    t.columns.push_back(spec.tag);
    if (spec.is_monte_carlo()) t.columns.push_back(spec.tag + "_se");
  }
  for (const auto& spec : specs) t.columns.push_back(spec.tag + "_flags");
  return t;
}

Table run_sweep_k(const SweepConfig& c) {
  if (c.nodes < 1) throw UsageError("sweep-K needs nodes >= 1");
  if (!c.delta.empty()) throw UsageError("sweep-K takes no delta target");
  for (std::int64_t k : c.committees) {
    if (k > c.nodes) throw UsageError("committee count " + std::to_string(k) + " exceeds nodes");
  }
  const auto specs = expand_methods(c.methods, c.adversary_count.has_value());
  for (const auto& spec : specs) {
    if (spec.is_bracket()) throw UsageError(spec.tag + " is only available in sweep-n");
  }
  Table t = sweep_columns(specs);
  t.rows.assign(c.committees.size(), std::vector<Cell>(t.columns.size()));
  // With fewer rows than workers the threads go to the samplers instead.
  const bool by_row = c.committees.size() >= static_cast<std::size_t>(c.mc.workers);
  // Validate the shared parameters once so a bad rate is a usage error.
  (void)make_scenario(CommitteeLayout::from_split(c.nodes, c.committees.front()),
                      c.adversary_frac, c.adversary_count, c.threshold);
  parallel_for(c.committees.size(), by_row ? c.mc.workers : 1, [&](std::size_t i) {
    const std::int64_t k = c.committees[i];
    const Scenario s = make_scenario(CommitteeLayout::from_split(c.nodes, k),
                                     c.adversary_frac, c.adversary_count, c.threshold);
    McOptions mc = c.mc;
    mc.seed = row_seed(c.mc.seed, k);
    mc.workers = by_row ? 1 : c.mc.workers;
    auto& row = t.rows[i];
    row[0] = k;
    row[1] = c.nodes / k;
    row[2] = c.nodes % k;
    std::size_t col = 3;
    std::size_t flag_col = 3;
    for (const auto& spec : specs) flag_col += spec.is_monte_carlo() ? 2 : 1;
    for (const auto& spec : specs) {
      try {
        if (spec.is_monte_carlo()) {
          const DeltaEstimate e = simulate(spec.runner, s, mc);
          row[col] = e.delta_hat;
          row[col + 1] = e.std_error;
        } else {
          const DeltaResult r = evaluate(spec.method, s);
          row[col] = r.delta;
          row[flag_col] = diagnostic_flags(r.diagnostics);
        }
      } catch (const DomainError& e) {
        row[flag_col] = error_flag(e);
      }
      col += spec.is_monte_carlo() ? 2 : 1;
      ++flag_col;
    }
  });
  return t;
}

Table run_sweep_n(const SweepConfig& c) {
  if (c.nodes != 0) throw UsageError("sweep-n takes no nodes");
  if (c.adversary_count) throw UsageError("sweep-n needs adversary_frac, not a count");
  if (c.adversary_frac.empty()) throw UsageError("sweep-n needs adversary_frac");
  if (c.delta.empty()) throw UsageError("sweep-n needs a delta target");
  const Rate d = rate_flag("delta", c.delta);
  const Rate a = rate_flag("threshold", c.threshold);
  const Rate p = rate_flag("adversary_frac", c.adversary_frac);
  const auto specs = expand_methods(c.methods, false);
  for (const auto& spec : specs) {
    if (spec.is_monte_carlo()) throw UsageError(spec.tag + " cannot drive a size search");
  }
  MinSizeOptions opts;
  opts.n_max = c.n_max;
  Table t = sweep_columns(specs);
  t.rows.assign(c.committees.size(), std::vector<Cell>(t.columns.size()));
  parallel_for(c.committees.size(), c.mc.workers, [&](std::size_t i) {
    const std::int64_t k = c.committees[i];
    auto& row = t.rows[i];
    row[0] = k;
    for (std::size_t j = 0; j < specs.size(); ++j) {
      const MethodSpec& spec = specs[j];
      Cell& value = row[3 + j];
      Cell& flags = row[3 + specs.size() + j];
      try {
        if (spec.is_bracket()) {
          const SizeBracket b = size_bracket(k, d, a, p);
          value = spec.runner == Runner::kBracketLower ? b.lower : b.upper;
        } else if (spec.method == Method::kExactBinomial ||
                   spec.method == Method::kExactHypergeometric) {
          const MinSizeResult r = min_committee_size(
              k, d, a, p,
              spec.method == Method::kExactBinomial ? AdversaryMode::kAverage
                                                    : AdversaryMode::kExact,
              opts);
          value = r.n;
          if (r.method != spec.method) {
            flags = "via=" + std::string(method_tag(r.method));
          }
        } else {
          value = min_committee_size_by(spec.method, k, d, a, p, opts).n;
        }
      } catch (const DomainError& e) {
        flags = error_flag(e);
      }
    }
  });
  return t;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Failure probabilities of random committee partitions", "shardrisk"};
  app.require_subcommand(1);
  app.fallthrough();
  OutputOptions output;
  auto* format_opt = app.add_option("--format", output.format, "csv, json or text")
                         ->check(CLI::IsMember({"csv", "json", "text"}));
  auto* output_opt = app.add_option("--output", output.path, "Write the result to PATH");

  DeltaCommand delta_cmd;
  BoundsCommand bounds_cmd;
  AsymptoticCommand asymptotic_cmd;
  SizeCommand size_cmd;
  SweepCommand sweep_cmd;
  SimulateCommand simulate_cmd;
  auto* delta_app = app.add_subcommand("delta", "Failure probability by one or more methods");
  auto* bounds_app = app.add_subcommand("bounds", "Exact values and every bound side by side");
  auto* asymptotic_app = app.add_subcommand("asymptotic", "Saddle-point approximation and its internals");
  auto* size_app = app.add_subcommand("size", "Committee count for N nodes, or size for K committees");
  auto* sweep_app = app.add_subcommand("sweep", "Tables over a range of committee counts");
  auto* simulate_app = app.add_subcommand("simulate", "Monte Carlo estimate");
  delta_cmd.attach(delta_app);
  bounds_cmd.attach(bounds_app);
  asymptotic_cmd.attach(asymptotic_app);
  size_cmd.attach(size_app);
  sweep_cmd.attach(sweep_app);
  simulate_cmd.attach(simulate_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Table table;
    if (delta_app->parsed()) {
      table = delta_cmd.run();
    } else if (bounds_app->parsed()) {
      table = bounds_cmd.run();
    } else if (asymptotic_app->parsed()) {
      table = asymptotic_cmd.run();
    } else if (size_app->parsed()) {
      table = size_cmd.run();
    } else if (simulate_app->parsed()) {
      table = simulate_cmd.run();
    } else {
      const SweepConfig c =
          sweep_cmd.resolve(output, format_opt->count() > 0, output_opt->count() > 0);
      parse_format(output.format);
      table = c.mode == "sweep-K" ? run_sweep_k(c) : run_sweep_n(c);
    }
    emit(table, output, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace shardrisk::cli
