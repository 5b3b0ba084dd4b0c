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

"""Failure probabilities of random committee partitions."""

from ._core import (
    DeltaResult,
    DomainError,
    delta_asymptotic,
    delta_exact_binomial,
    delta_exact_hypergeometric,
    estimate_delta,
    max_committees,
    min_committee_size,
    run_cli,
    size_bracket,
    split_layout,
    theorem1_bounds,
    union_bound_fixed_sizes,
)

__all__ = [
    "DeltaResult",
    "DomainError",
    "delta_asymptotic",
    "delta_exact_binomial",
    "delta_exact_hypergeometric",
    "estimate_delta",
    "max_committees",
    "min_committee_size",
    "run_cli",
    "size_bracket",
    "split_layout",
    "theorem1_bounds",
    "union_bound_fixed_sizes",
]
