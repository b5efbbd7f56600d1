"""Scaling-limit study: distances to the Kwong and Choquard profiles in all
four (q, lambda-end) regimes.

    python scripts/run_limits.py [outdir]
"""

import pathlib
import sys

from sngs import cli

REGIMES = [
    (2.5, "zero", "1e-1,1e-2,1e-3"),
    (4.0, "zero", "1e-1,1e-2,1e-3"),
    (4.0, "infinity", "1e1,1e2,1e3"),
    (2.5, "infinity", "1e1,1e2,1e3"),
]


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for q, side, lams in REGIMES:
        out = outdir / f"limits_q{q:g}_{side}"
        code = cli.main(["sngs", "limits", "--q", str(q), "--side", side,
                         "--lambdas", lams, "--out", str(out), "--force"])
        print(f"q={q} side={side}: exit {code}  ->  {out}.csv")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
