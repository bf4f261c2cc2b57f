"""End-to-end acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line.  Run directly for just the
summary: ``python tests/test_acceptance.py``.
"""

import sys

import pytest

from alpha_lab import acceptance


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__.removeprefix("check_"))
def test_criterion(check, capsys):
    import time

    t0 = time.perf_counter()
    res = check(seed=0, tol=acceptance.tolerances())
    res.seconds = time.perf_counter() - t0
    with capsys.disabled():
        print(f"\n{res.line()} [{res.seconds:.1f}s]")
    assert res.passed, res.to_json()


def test_negative_override_is_rejected():
    with pytest.raises(ValueError):
        acceptance.tolerances({"threshold": -0.1})


if __name__ == "__main__":
    results = acceptance.run_all(seed=0, progress=lambda r: print(f"{r.line()} [{r.seconds:.1f}s]", flush=True))
    sys.exit(0 if all(r.passed for r in results) else 1)
