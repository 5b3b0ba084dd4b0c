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


#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "shardrisk/cli.hpp"

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = shardrisk::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

// RFC 4180 subset: quoted fields may hold commas and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      field.clear();
      rows.push_back(row);
      row.clear();
    } else {
      field += c;
    }
  }
  return rows;
}

std::string cell(const Outcome& o, std::size_t row, const std::string& column) {
  const auto rows = parse_csv(o.out);
  for (std::size_t c = 0; c < rows.at(0).size(); ++c) {
    if (rows[0][c] == column) return rows.at(row).at(c);
  }
  FAIL("no column " << column);
  return {};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("shardrisk_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("delta examples") {
  const Outcome a = run({"delta", "--nodes", "10", "--committees", "2", "--adversary-frac", "0.25",
                         "--threshold", "1/3", "--method", "exact-binomial"});
  REQUIRE(a.code == 0);
  CHECK(std::stod(cell(a, 1, "delta")) == doctest::Approx(0.59954833984375).epsilon(1e-14));
  CHECK(cell(a, 1, "method") == "exact-binomial");

  const Outcome b = run({"delta", "--layout", "2,2", "--adversary-count", "2", "--threshold", "1/2",
                         "--method", "exact-hypergeometric"});
  REQUIRE(b.code == 0);
  CHECK(std::stod(cell(b, 1, "delta")) == doctest::Approx(1.0 / 3).epsilon(1e-14));

  const Outcome c = run({"delta", "--nodes", "10", "--committees", "2", "--adversary-frac", "0",
                         "--threshold", "1/3", "--method", "exact-binomial"});
  REQUIRE(c.code == 0);
  CHECK(cell(c, 1, "delta") == "0");
}

TEST_CASE("method groups expand") {
  const Outcome o = run({"delta", "--nodes", "100", "--committees", "4", "--adversary-frac", "1/4",
                         "--threshold", "1/3", "--method", "theorem1-bounds,union-bounds"});
  REQUIRE(o.code == 0);
  CHECK(parse_csv(o.out).size() == 9);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"delta", "--nodes", "10", "--committees", "2", "--threshold", "1/3", "--bogus"}).code == 2);
  CHECK(run({"delta", "--nodes", "10", "--committees", "2", "--adversary-frac", "0.25"}).code == 2);
  CHECK(run({"delta", "--nodes", "10", "--adversary-frac", "0.25", "--threshold", "1/3"}).code == 2);
  CHECK(run({"delta", "--layout", "5,5", "--nodes", "10", "--committees", "2", "--adversary-frac",
             "0.25", "--threshold", "1/3"})
            .code == 2);
  CHECK(run({"delta", "--layout", "5,5", "--adversary-frac", "0.25", "--adversary-count", "2",
             "--threshold", "1/3"})
            .code == 2);
  CHECK(run({"delta", "--layout", "5,5", "--adversary-frac", "abc", "--threshold", "1/3"}).code == 2);
  CHECK(run({"delta", "--layout", "5,5", "--adversary-frac", "0.25", "--threshold", "1/3", "--method",
             "nonsense"})
            .code == 2);
  CHECK(run({"delta", "--layout", "5,5", "--adversary-frac", "0.25", "--threshold", "1/3", "--format",
             "xml"})
            .code == 2);
  const Outcome domain = run({"delta", "--nodes", "10", "--committees", "20", "--adversary-frac", "0.25",
                              "--threshold", "1/3"});
  CHECK(domain.code == 1);
  CHECK(domain.err.find("error:") != std::string::npos);
  CHECK(run({"delta", "--layout", "5,5", "--adversary-frac", "1.5", "--threshold", "1/3"}).code == 1);
  CHECK(run({"asymptotic", "--layout", "5,5", "--adversary-frac", "0.5", "--threshold", "1/3"}).code == 1);
  const Outcome help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
}

TEST_CASE("csv and json carry the same values") {
  const std::vector<std::string> base{"bounds", "--nodes", "1000", "--committees", "10",
                                      "--adversary-frac", "1/4", "--threshold", "1/3"};
  const Outcome csv = run(base);
  auto with_json = base;
  with_json.insert(with_json.end(), {"--format", "json"});
  const Outcome js = run(with_json);
  REQUIRE(csv.code == 0);
  REQUIRE(js.code == 0);
  const auto rows = parse_csv(csv.out);
  const auto doc = nlohmann::ordered_json::parse(js.out);
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() + 1 == rows.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& obj = doc[r - 1];
    REQUIRE(obj.size() == rows[0].size());
    std::size_t c = 0;
    for (const auto& [key, value] : obj.items()) {
      CHECK(key == rows[0][c]);
      const std::string& text = rows[r][c];
      if (value.is_null()) {
        CHECK((text.empty() || text == "inf" || text == "-inf" || text == "nan"));
      } else if (value.is_number()) {
        CHECK(std::strtod(text.c_str(), nullptr) == value.get<double>());
      } else if (value.is_string()) {
        CHECK(text == value.get<std::string>());
      }
      ++c;
    }
  }
}

TEST_CASE("asymptotic internals") {
  const Outcome o = run({"asymptotic", "--nodes", "1000", "--committees", "10", "--adversary-count", "250",
                         "--threshold", "1/3", "--compare"});
  REQUIRE(o.code == 0);
  CHECK(cell(o, 1, "converged") == "true");
  CHECK(std::stod(cell(o, 1, "prefactor")) ==
        doctest::Approx(std::stod(cell(o, 1, "prefactor_contour"))).epsilon(1e-10));
  CHECK(std::stod(cell(o, 1, "exact_delta")) == doctest::Approx(0.20486376403665134).epsilon(1e-10));
  CHECK(std::stod(cell(o, 1, "log_survival_rel_error")) < 0.03);
}

TEST_CASE("size command") {
  const Outcome a = run({"size", "--nodes", "20", "--delta", "1e-9", "--threshold", "1/3",
                         "--adversary-frac", "0.25"});
  REQUIRE(a.code == 0);
  CHECK(parse_csv(a.out)[1] == std::vector<std::string>{"1", "20", "0", "0", "19"});
  const Outcome b = run({"size", "--nodes", "1", "--delta", "0.5", "--threshold", "1/3",
                         "--adversary-frac", "0.25"});
  REQUIRE(b.code == 0);
  CHECK(cell(b, 1, "K") == "1");
  CHECK(cell(b, 1, "n") == "1");
  const Outcome c = run({"size", "--min-n-for-K", "10", "--delta", "1e-3", "--threshold", "1/3",
                         "--adversary-frac", "0.25"});
  REQUIRE(c.code == 0);
  CHECK(cell(c, 1, "n") == "393");
  CHECK(std::stod(cell(c, 1, "bracket_lower")) <= 393);
  CHECK(std::stod(cell(c, 1, "bracket_upper")) >= 393);
  const Outcome d = run({"size", "--min-n-for-K", "10", "--delta", "1e-3", "--threshold", "1/3",
                         "--adversary-frac", "0.25", "--model", "exact"});
  CHECK(cell(d, 1, "n") == "348");
  CHECK(run({"size", "--delta", "1e-3", "--threshold", "1/3", "--adversary-frac", "0.25"}).code == 2);
  CHECK(run({"size", "--nodes", "10", "--min-n-for-K", "3", "--delta", "1e-3", "--threshold", "1/3",
             "--adversary-frac", "0.25"})
            .code == 2);
  CHECK(run({"size", "--min-n-for-K", "10", "--delta", "1e-3", "--threshold", "1/3",
             "--adversary-frac", "0.25", "--n-max", "20"})
            .code == 1);
}

TEST_CASE("simulate command") {
  const std::vector<std::string> base{"simulate", "--layout", "5,5", "--adversary-frac", "0.25",
                                      "--threshold", "1/3", "--samples", "200000", "--seed", "7"};
  const Outcome one = run(base);
  auto eight_args = base;
  eight_args.insert(eight_args.end(), {"--workers", "8"});
  const Outcome eight = run(eight_args);
  REQUIRE(one.code == 0);
  CHECK(one.out == eight.out);
  const double d = std::stod(cell(one, 1, "delta_hat"));
  CHECK(std::abs(d - 0.59954833984375) <= 5 * std::sqrt(0.6 * 0.4 / 200000));

  const Outcome single = run({"simulate", "--layout", "5,5", "--adversary-frac", "0.25", "--threshold",
                              "1/3", "--samples", "1"});
  const std::string v = cell(single, 1, "delta_hat");
  CHECK((v == "0" || v == "1"));
  CHECK(run({"simulate", "--layout", "5,5", "--adversary-frac", "0.25", "--threshold", "1/3",
             "--samples", "0"})
            .code == 2);
}

TEST_CASE("sweep-K is deterministic and lays out its columns") {
  const std::vector<std::string> base{"sweep", "--nodes", "200", "--committees", "2:12:5", "--threshold",
                                      "1/3", "--adversary-frac", "1/4", "--method",
                                      "exact-binomial,monte-carlo-average,monte-carlo-exact",
                                      "--samples", "5000", "--seed", "3"};
  const Outcome a = run(base);
  REQUIRE(a.code == 0);
  auto more = base;
  more.insert(more.end(), {"--workers", "3"});
  const Outcome b = run(more);
  CHECK(a.out == b.out);
  const auto rows = parse_csv(a.out);
  CHECK(rows[0] == std::vector<std::string>{"K", "n", "r", "exact-binomial", "monte-carlo-average",
                                            "monte-carlo-average_se", "monte-carlo-exact",
                                            "monte-carlo-exact_se", "exact-binomial_flags",
                                            "monte-carlo-average_flags", "monte-carlo-exact_flags"});
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][0] == "2");
  CHECK(rows[2][0] == "7");
  CHECK(rows[2][1] == "28");
  CHECK(rows[2][2] == "4");
}

TEST_CASE("sweep failures become flags") {
  const Outcome o = run({"sweep", "--nodes", "100", "--committees", "2,5", "--threshold", "1/3",
                         "--adversary-frac", "1/2", "--method", "exact-binomial,asymptotic"});
  REQUIRE(o.code == 0);
  const auto rows = parse_csv(o.out);
  CHECK_FALSE(rows[1][3].empty());
  CHECK(rows[1][4].empty());
  CHECK(rows[1][6].rfind("error:", 0) == 0);
}

TEST_CASE("sweep-n solves sizes") {
  const Outcome o = run({"sweep", "--mode", "sweep-n", "--committees", "1,10", "--delta", "1e-3",
                         "--threshold", "1/3", "--adversary-frac", "1/4", "--method",
                         "exact-binomial,bracket-lower,bracket-upper"});
  REQUIRE(o.code == 0);
  const auto rows = parse_csv(o.out);
  CHECK(rows[2][0] == "10");
  CHECK(rows[2][1].empty());
  CHECK(rows[2][2].empty());
  CHECK(rows[2][3] == "393");
  CHECK(std::stod(rows[1][5]) == doctest::Approx(397.64).epsilon(1e-4));
  CHECK(run({"sweep", "--mode", "sweep-n", "--committees", "1", "--delta", "1e-3", "--threshold", "1/3",
             "--adversary-frac", "1/4", "--method", "monte-carlo"})
            .code == 2);
}

TEST_CASE("sweep configs") {
  const std::string cfg = temp_path("cfg.json");
  write_file(cfg, R"({"schema": "shardrisk.sweep/1", "mode": "sweep-K", "nodes": 60,
                      "committees": {"from": 2, "to": 6, "step": 2}, "threshold": "1/3",
                      "adversary_frac": 0.25, "methods": ["exact-binomial", "exact-hypergeometric"],
                      "format": "json"})");
  const Outcome o = run({"sweep", "--config", cfg});
  REQUIRE(o.code == 0);
  const auto doc = nlohmann::json::parse(o.out);
  REQUIRE(doc.size() == 3);
  CHECK(doc[1]["K"] == 4);
  CHECK(doc[1]["n"] == 15);

  // A flag overrides the config.
  const Outcome csv = run({"sweep", "--config", cfg, "--format", "csv", "--committees", "3"});
  REQUIRE(csv.code == 0);
  CHECK(parse_csv(csv.out).size() == 2);

  write_file(cfg, R"({"schema": "shardrisk.sweep/0", "nodes": 60, "committees": [2], "threshold": "1/3",
                      "adversary_frac": "1/4"})");
  CHECK(run({"sweep", "--config", cfg}).code == 2);
  write_file(cfg, R"({"schema": "shardrisk.sweep/1", "nodes": 60, "committees": [2], "threshold": "1/3",
                      "adversary_frac": "1/4", "colour": "red"})");
  CHECK(run({"sweep", "--config", cfg}).code == 2);
  write_file(cfg, "{not json");
  CHECK(run({"sweep", "--config", cfg}).code == 2);
  write_file(cfg, R"({"schema": "shardrisk.sweep/1", "nodes": 60, "committees": [61], "threshold": "1/3",
                      "adversary_frac": "1/4"})");
  CHECK(run({"sweep", "--config", cfg}).code == 2);
  CHECK(run({"sweep", "--config", temp_path("missing.json")}).code == 2);
  std::remove(cfg.c_str());
}

TEST_CASE("output file and text format") {
  const std::string path = temp_path("out.csv");
  const Outcome o = run({"delta", "--layout", "5,5", "--adversary-frac", "0.25", "--threshold", "1/3",
                         "--output", path});
  REQUIRE(o.code == 0);
  CHECK(o.out.empty());
  CHECK(read_file(path).rfind("method,delta", 0) == 0);
  std::remove(path.c_str());
  const Outcome t = run({"delta", "--layout", "5,5", "--adversary-frac", "0.25", "--threshold", "1/3",
                         "--format", "text"});
  REQUIRE(t.code == 0);
  CHECK(t.out.rfind("method ", 0) == 0);
}
