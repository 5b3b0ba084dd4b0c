# Copyright 2026 The shardrisk Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import csv
import io
import json
import math

import pytest

import shardrisk


def test_exact_binomial():
    r = shardrisk.delta_exact_binomial([5, 5], "1/4", "1/3")
    assert r.method == "exact-binomial"
    assert r.delta == pytest.approx(9823 / 16384, rel=1e-14)
    assert r.log_survival == pytest.approx(math.log(1 - 9823 / 16384), rel=1e-13)


def test_exact_hypergeometric():
    r = shardrisk.delta_exact_hypergeometric([2, 2], 2, "1/2")
    assert r.delta == pytest.approx(1 / 3, rel=1e-14)
    big = shardrisk.delta_exact_hypergeometric(shardrisk.split_layout(1000, 2), 250, "1/3")
    assert big.delta == pytest.approx(1.0258257659354391e-9, rel=1e-10)


def test_bounds_sandwich():
    sizes = shardrisk.split_layout(1000, 10)
    b = shardrisk.theorem1_bounds(sizes, 0.25, "1/3")
    exact = shardrisk.delta_exact_binomial(sizes, 0.25, "1/3").delta
    assert b["lower"].delta <= exact <= b["upper_ferrante"].delta <= b["upper_ash"].delta
    fixed = shardrisk.union_bound_fixed_sizes(sizes, 0.25, "1/3")
    assert fixed.clamped and fixed.delta == 1.0


def test_asymptotic():
    out = shardrisk.delta_asymptotic(shardrisk.split_layout(1000, 10), 250, "1/3")
    assert out["converged"]
    assert out["result"].method == "asymptotic"
    assert 0.19 < out["result"].delta < 0.21


def test_sizing():
    assert shardrisk.max_committees(20, 1e-9, "1/3", 0.25) == {
        "K": 1, "n": 20, "r": 0, "prob": 0.0, "iterations": 19}
    r = shardrisk.min_committee_size(10, 1e-3, "1/3", 0.25)
    assert r["n"] == 393
    lo, hi = shardrisk.size_bracket(10, 1e-3, "1/3", 0.25)
    assert lo <= r["n"] <= hi


def test_simulation_reproducible():
    a = shardrisk.estimate_delta([5, 5], "1/3", adversary_frac=0.25, samples=50000, seed=7)
    b = shardrisk.estimate_delta([5, 5], "1/3", adversary_frac=0.25, samples=50000, seed=7, workers=4)
    assert a == b
    assert abs(a["delta_hat"] - 9823 / 16384) < 5 * math.sqrt(0.25 / 50000)
    e = shardrisk.estimate_delta([2, 2], "1/2", adversaries=2, samples=1, seed=1)
    assert e["delta_hat"] in (0.0, 1.0)


def test_domain_errors():
    with pytest.raises(shardrisk.DomainError):
        shardrisk.split_layout(3, 4)
    with pytest.raises(ValueError):
        shardrisk.delta_exact_binomial([5], 1.5, "1/3")


def test_cli_round_trip():
    args = ["bounds", "--nodes", "100", "--committees", "4", "--adversary-frac", "1/4",
            "--threshold", "1/3"]
    code, out, _ = shardrisk.run_cli(args)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    code, js, _ = shardrisk.run_cli(args + ["--format", "json"])
    assert code == 0
    doc = json.loads(js)
    assert [r["method"] for r in rows] == [r["method"] for r in doc]
    for r, d in zip(rows, doc):
        if d["delta"] is not None:
            assert float(r["delta"]) == d["delta"]
    assert shardrisk.run_cli(["delta", "--bogus"])[0] == 2
