"""Acceptance criteria at desk scale (1e6 intervals per point, Bernoulli detection).

Each criterion prints one PASS/FAIL line per check; the terminal summary
lists one line per criterion.
"""

import pytest

from hvlab import acceptance

SEED = 20200712
N = 1_000_000


@pytest.mark.parametrize("k", sorted(acceptance.CRITERIA), ids=lambda k: f"criterion_{k}_{acceptance.CRITERIA[k][0].replace(' ', '_')}")
def test_criterion(k, capsys):
    checks = acceptance.run_criterion(k, SEED, N, partitions=2)
    with capsys.disabled():
        print()
        for c in checks:
            print("   ", c.line())
        print(f"    criterion {k} ({acceptance.CRITERIA[k][0]}): {'PASS' if all(c.passed for c in checks) else 'FAIL'}")
    assert checks
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)
