"""Nondegeneracy certificates: sector spectra of the linearized operator for
states deep in both uniqueness regimes.

    python scripts/run_spectrum.py [outdir]
"""

import pathlib
import sys

from sngs import cli

CASES = [(4.0, "1e-2"), (2.5, "1e2")]


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for q, lam in CASES:
        out = outdir / f"spectrum_q{q:g}_lam{lam}"
        code = cli.main(["sngs", "spectrum", "--q", str(q), "--lambda", lam,
                         "--k-max", "3", "--out", str(out), "--force"])
        print(f"q={q} lambda={lam}: exit {code}  ->  {out}.json")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
