"""Multi-start uniqueness scans at small and large lambda.

Twenty seeded Gaussian starts per parameter point; the evidence for
uniqueness is a single distinct converged state.

    python scripts/run_uniqueness.py [outdir]
"""

import pathlib
import sys

from sngs import cli

POINTS = [("1e-2", 2.5), ("1e-2", 4.0), ("1e2", 2.5), ("1e2", 4.0)]


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for lam, q in POINTS:
        out = outdir / f"scan_q{q:g}_lam{lam}"
        code = cli.main(["sngs", "scan", "--q", str(q), "--lambda", lam,
                         "--starts", "20", "--seed", "20240",
                         "--out", str(out), "--force"])
        print(f"q={q} lambda={lam}: exit {code}  ->  {out}.json")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
