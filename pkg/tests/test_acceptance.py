"""Acceptance battery: one test per criterion at its stated size and tolerance.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible in the pytest
log even with output capture on) and asserts both correctness and the
runtime budget.
"""

import time

import pytest

from orbitspace import verify

# (criterion, check, keyword arguments, runtime budget in seconds)
CRITERIA = [
    (1, verify.check_worked_densities, {}, 1.0),
    (2, verify.check_volume_identities, {}, 1.0),
    (3, verify.check_angular_volume, {}, 1.0),
    (4, verify.check_gaussian_consistency, {"samples": 10 ** 6}, 180.0),
    (5, verify.check_minor_and_jacobian_oracles, {}, 10.0),
    (6, verify.check_reduction, {"n": 10 ** 4}, 30.0),
    (7, verify.check_euler, {"n": 10 ** 4}, 10.0),
    (8, verify.check_image_membership, {"n": 10 ** 4}, 10.0),
    (9, verify.check_homogeneity, {}, 5.0),
]


@pytest.mark.parametrize("number,check,kwargs,budget", CRITERIA,
                         ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, check, kwargs, budget, capsys):
    start = time.perf_counter()
    result = check(seed=0, **kwargs)
    elapsed = time.perf_counter() - start
    ok = result.passed and elapsed < budget
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {result.name} "
              f"({len(result.rows)} rows, {elapsed:.2f} s of {budget:.0f} s)")
    failing = [row for row in result.rows if not row["pass"]]
    assert not failing, failing
    assert elapsed < budget


def test_gaussian_consistency_covers_singular_cases():
    rows = verify.check_gaussian_consistency(samples=10 ** 4)
    pairs = {(row["k"], row["m"]) for row in rows.rows}
    assert {(2, 2), (3, 3), (4, 4)} <= pairs
    assert pairs == {(k, m) for m in range(1, 5) for k in range(1, m + 1)}


def test_fault_injection_is_detected():
    results = verify.verify_suite(samples=10 ** 4, inject_fault=True)
    by_name = {r.name: r for r in results}
    assert not by_name["gaussian consistency"].passed
    assert by_name["reduction fidelity"].passed
