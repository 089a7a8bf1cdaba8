#!/usr/bin/env python3
"""Regenerate every loss-curve CSV bundle (figure ids 2a 2b 3 4 5a 5b).

Thin driver over the `fadecount figures` subcommand.  The 10^6-horizon
bundles (4, 5b) take ~30 s each; everything else is sub-second.  Pass figure
ids as arguments to restrict, e.g. `python3 scripts/make_figures.py 2a 3`.
"""
import sys
import time

sys.path.insert(0, "src")

from fadecount.cli import main

ids = sys.argv[1:] or ["2a", "2b", "3", "4", "5a", "5b"]
for fid in ids:
    t0 = time.perf_counter()
    rc = main(["figures", fid, "--output", "figures"])
    if rc != 0:
        sys.exit(rc)
    print(f"figure {fid}: written to figures/ in {time.perf_counter()-t0:.1f}s")
