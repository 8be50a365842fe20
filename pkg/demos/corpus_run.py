"""Run every bundled model through the command-line front end and write the
JSON reports (and CSV trajectories) under one directory.

    python demos/corpus_run.py OUTDIR

Two runs, even in different processes, must leave byte-identical JSON files.
"""

import sys
from pathlib import Path

from qssr.cli import main

# model -> (QSS split, extra commands)
CORPUS = {
    "mm_irrev": ("c", [
        ["qss", "reduce", "--explicit"],
        ["qss", "verify", "--at", "e0=0,k1=1,km1=1,k2=1"],
        ["tf", "reduce", "--at", "e0=0", "--dir", "e0"],
        ["consistency", "--at", "k2=0", "--dir", "k2"],
        ["simulate", "--x0", "s=1", "--T", "5"],
        ["study", "--at", "e0=0", "--dir", "e0", "--eps", "1/50,1/100", "--anchor", "s=1", "--T", "5"],
    ]),
    "mm_rev": ("c", [
        ["qss", "affine"],
        ["tf", "reduce", "--at", "e0=0", "--dir", "e0"],
        ["consistency", "--at", "e0=0", "--dir", "e0"],
    ]),
    "bimolecular_irrev": ("c", [["qss", "affine", "--nonnegative"]]),
    "bimolecular_rev": ("c", [["qss", "affine", "--nonnegative"]]),
    "competitive": ("c2", [["qss", "affine", "--nonnegative"]]),
    "coop2": ("c1,c2", [["tf", "reduce", "--at", "e0=0", "--dir", "e0"]]),
    "coop2_irrev": ("c1,c2", [["qss", "affine", "--nonnegative"]]),
    "coop3": ("c1,c2,c3", [["tf", "reduce", "--at", "e0=0", "--dir", "e0"]]),
    "linear3": ("x3", [["qss", "reduce", "--explicit"]]),
    "pantea": ("x,y,z", [["tf", "reduce", "--at", "km1=0", "--dir", "km1"]]),
    "propanone": ("cX,cY,cZ", [
        ["qss", "affine", "--nonnegative"],
        ["tf", "reduce", "--at", "k1=0", "--dir", "k1"],
    ]),
}

CRITICAL = {"mm_irrev", "mm_rev", "bimolecular_irrev", "bimolecular_rev", "competitive",
            "coop2_irrev", "linear3"}


def run_corpus(out):
    out = Path(out)
    codes = {}
    for model, (qss, extra) in sorted(CORPUS.items()):
        jobs = [["odes"], ["qss", "reduce"]] + extra
        if model in CRITICAL:
            jobs.append(["qss", "critical"])
        for i, job in enumerate(jobs):
            target = out / model / f"{i:02d}"
            argv = job + ["--model", model, "--out", str(target)]
            if job[0] != "odes":
                argv += ["--qss", qss]
            codes[str(target)] = main(argv)
    return codes


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    codes = run_corpus(sys.argv[1])
    bad = {k: v for k, v in codes.items() if v == 1}
    for k in bad:
        print("error exit:", k, file=sys.stderr)
    sys.exit(1 if bad else 0)
