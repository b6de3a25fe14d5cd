"""The acceptance gate: every criterion runs at its stated tolerance and
prints one pass/fail line.  `pencil-lab accept` drives the same registry."""

import pytest

from pencil_lab.acceptance import CHECKS, CheckResult, Tier, all_gating_passed

TIER = Tier(quick=False)


@pytest.mark.parametrize(
    "index,name,func",
    [(i, name, func) for i, (name, func) in enumerate(CHECKS, start=1)],
    ids=[f"{i:02d}-{name.split(' (')[0].replace(' ', '-')}"
         for i, (name, _) in enumerate(CHECKS, start=1)],
)
def test_acceptance_criterion(index, name, func, capsys):
    import time

    t0 = time.time()
    passed, detail = func(TIER)
    result = CheckResult(
        index=index, name=name, passed=passed, detail=detail,
        elapsed=time.time() - t0,
    )
    with capsys.disabled():
        print(result.line())
    assert passed, f"acceptance criterion {index} failed: {detail}"


def test_all_gating_passed_helper():
    results = [
        CheckResult(1, "a", True, "", 0.0),
        CheckResult(2, "b", False, "", 0.0, gating=False),
    ]
    assert all_gating_passed(results)
    results.append(CheckResult(3, "c", False, "", 0.0))
    assert not all_gating_passed(results)
