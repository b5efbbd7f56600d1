"""Action-level monotonicity study: c_lambda over six decades of lambda.

Runs the `sweep` pipeline for q = 2.5 and q = 4 and reports whether the
ground-state action is non-decreasing in lambda.

    python scripts/run_sweep.py [outdir]
"""

import pathlib
import sys

from sngs import cli


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for q in (2.5, 4.0):
        out = outdir / f"sweep_q{q:g}"
        code = cli.main(["sngs", "sweep", "--q", str(q),
                         "--lambdas", "1e-3:1e3:log:13",
                         "--out", str(out), "--force"])
        print(f"q={q}: exit {code}  ->  {out}.csv")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
