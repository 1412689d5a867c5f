#!/usr/bin/env python3
"""Census of max-potential freeze outcomes across replicas.

Every run ends with all arrivals at a single site or alternating within one
adjacent pair; this tallies the split and the observed freeze times.
"""
import argparse

import numpy as np

from nqsim.dynamics import MaxRule
from nqsim.ensemble import EnsembleRequest, run_ensemble
from nqsim.ring import Neighborhood
from nqsim.verify import freeze_outcomes


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=6)
    ap.add_argument("--neighborhood", choices=["asym", "sym"], default="sym")
    ap.add_argument("--steps", type=int, default=10000)
    ap.add_argument("--replicas", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    kind = Neighborhood.parse(args.neighborhood)
    result = run_ensemble(
        EnsembleRequest(
            m=args.m, kind=kind, rule=MaxRule(), steps=args.steps,
            replicas=args.replicas, seed=args.seed, record_sites=True,
        )
    )
    outcomes = freeze_outcomes(result)
    tags = [o.tag for o in outcomes]
    times = [o.freeze_time for o in outcomes if o.freeze_time is not None]
    print(f"M={args.m} {kind.value}, T={args.steps}, {args.replicas} replicas")
    for tag in ("single", "pair", "unfrozen"):
        print(f"  {tag:>9}: {tags.count(tag)}")
    if times:
        print(f"  freeze time: median {int(np.median(times))}, max {max(times)}")
    pair_shares = [
        float(result.xi[r, site - 1]) / args.steps
        for r, o in enumerate(outcomes)
        if o.tag == "pair"
        for site in o.sites
    ]
    if pair_shares:
        print(f"  pair shares: min {min(pair_shares):.4f}, max {max(pair_shares):.4f}")


if __name__ == "__main__":
    main()
