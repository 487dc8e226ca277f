"""Null distribution of the three p-values for each worked model.

For every model a few hundred null data sets are drawn and the KS test
against U(0, 1) is reported, with a coarse text histogram of each sample.
"""
import sys

import numpy as np

from prepivot.harness import McDesign, run_uniformity

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 400

designs = {
    "model averaging": McDesign(model="ma", n=40, scheme="par"),
    "ridge": McDesign(model="ridge", n=100, corr=0.5, ridge_c0=0.15, B2=99),
    "kernel regression": McDesign(model="np", n=400),
    "stable location": McDesign(model="heavy", n=1000),
}

for name, design in designs.items():
    res = run_uniformity(design.with_(reps=reps, seed=3))
    print(f"\n{name}  (mean m_hat {np.mean(res.m_hat):.3f})" if res.m_hat.size else f"\n{name}")
    for method, p in res.p_values.items():
        counts, _ = np.histogram(p, bins=10, range=(0, 1))
        bars = " ".join(f"{c:3d}" for c in counts)
        print(f"  {method:>8}  KS p = {res.ks[method].pvalue:8.2e}   deciles: {bars}")
