"""Doping needed to reach Haar-level values grows linearly in N = log2 d."""

from dopedclifford import closed_forms as cf

for probe in ("otoc8", "otoc8-trace", "purity"):
    curve = cf.threshold_curve(range(4, 17), r=1, probe=probe)
    ks = [k for _, _, k in curve]
    fit = cf.fit_affine(range(4, 17), ks)
    print(f"{probe:>12}: k* = {ks}")
    print(f"{'':>12}  k* ~ {fit.slope:.2f} N + {fit.intercept:.2f}  (max residual {fit.max_residual:.2f})")
