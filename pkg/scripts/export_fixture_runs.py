"""Run every shipped fixture config through the CLI and collect plot-ready data.

    python scripts/export_fixture_runs.py OUTDIR
"""

import argparse
import sys
from pathlib import Path

from tmlambda import cli

FIX = Path(__file__).resolve().parents[1] / "fixtures"

RUNS = [
    ("sites", "sites_111.toml", []),
    ("sites", "sites_001.toml", []),
    ("scan", "scan_theory.toml", []),
    ("optimize", "optimize_theory.toml", []),
    ("optimize", "optimize_experiment.toml", []),
    ("fit", "fit_measured.toml", []),
    ("spectrum", "spectrum_045T_bar.toml", []),
    ("spectrum", "spectrum_24mT_001.toml", []),
    ("spectrum", "spectrum_24mT_111_lowR.toml", []),
    ("spectrum", "spectrum_24mT_111_sidebands.toml", []),
]
EXT = {"sites": ".json", "scan": ".csv", "optimize": ".json", "fit": ".json", "spectrum": ".csv"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir")
    args = ap.parse_args()
    out = Path(args.outdir)
    failed = 0
    for cmd, cfg, extra in RUNS:
        stem = Path(cfg).stem
        argv = [cmd, "--config", str(FIX / cfg), "--out", str(out / (stem + EXT[cmd])), *extra]
        if cmd == "spectrum":
            argv += ["--features-out", str(out / f"{stem}_features.json")]
        code = cli.main(argv)
        print(f"{cmd:9s} {cfg:36s} exit {code}")
        failed += code != 0
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
