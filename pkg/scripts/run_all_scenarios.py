#!/usr/bin/env python3
"""Run every bundled scenario and print a one-line summary per file.

Positive scenarios must pass; the designed witnesses under
scenarios/negative/ must fail.  Exit code 0 when every file behaves as
expected.
"""

import sys
from pathlib import Path

from cliffcheck.runner import load_scenario, run

REPO = Path(__file__).resolve().parents[1]


def main() -> int:
    ok = True
    rows = []
    for path, expect_pass in [
        *[(p, True) for p in sorted((REPO / "scenarios").glob("*.json"))],
        *[(p, False) for p in sorted((REPO / "scenarios" / "negative").glob("*.json"))],
    ]:
        report = run(load_scenario(path))
        as_expected = report.passed == expect_pass
        ok &= as_expected
        worst = max((c.max_residual for c in report.checks), default=0.0)
        rows.append(
            (
                path.relative_to(REPO),
                "PASS" if report.passed else "FAIL",
                "expected" if as_expected else "UNEXPECTED",
                f"{worst:.3e}",
                f"{report.wall_time_s:.2f}s",
            )
        )
    width = max(len(str(r[0])) for r in rows)
    for name, status, expected, worst, wall in rows:
        print(f"{str(name):<{width}}  {status:<4} ({expected})  max_residual={worst}  {wall}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
