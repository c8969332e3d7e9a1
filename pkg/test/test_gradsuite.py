from __future__ import annotations

import pytest

from pixel_eql.gradsuite import CHECKS, run_grad_suite


def test_every_objective_passes_on_a_few_instances():
    rows = run_grad_suite(instances=3, seed=0)
    assert [row.name for row in rows] == list(CHECKS)
    for row in rows:
        assert row.instances == 3
        assert row.passed, f"{row.name}: {row.max_rel_error:.2e}"


def test_suite_is_reproducible():
    first = run_grad_suite(instances=2, seed=5)
    second = run_grad_suite(instances=2, seed=5)
    assert [r.max_rel_error for r in first] == [r.max_rel_error for r in second]


def test_impossible_tolerance_fails():
    rows = run_grad_suite(instances=1, tolerance=0.0, seed=0)
    assert not any(row.passed for row in rows)


@pytest.mark.slow
def test_one_hundred_instances():
    assert all(row.passed for row in run_grad_suite(instances=100))
