"""Half-system purity fluctuations of a stabilizer input under T doping.

Compares the exact closed form with a Monte-Carlo estimate at N = 4 and shows
the decay toward the Haar value with rate f-.
"""

import math

from dopedclifford import closed_forms as cf
from dopedclifford.circuits import DopedCircuitSpec
from dopedclifford.engine import f_pm_theta
from dopedclifford.montecarlo import mc_purity_fluct

N, D = 4, 16
_, f_minus = f_pm_theta(math.pi / 4, D)
haar = cf.purity_fluct_haar(D)
print(f"f- = {f_minus} = {float(f_minus):.4f}; Haar variance {float(haar):.6f}")
print(f"{'k':>3} {'exact':>10} {'(exact-Haar)/f-^k':>18} {'MC':>10} {'stderr':>9}")
for k in (0, 2, 4, 8, 12):
    exact = cf.purity_fluct(D, k)
    mc = mc_purity_fluct(DopedCircuitSpec(N, k, seed=100 + k), 2, samples=50_000)
    print(f"{k:>3} {float(exact):>10.6f} {float((exact - haar) / f_minus ** k):>18.6f} "
          f"{mc.mean:>10.6f} {mc.stderr:>9.6f}")
