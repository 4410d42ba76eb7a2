"""How fast does T-gate doping push the 8-point OTOC toward its Haar value?

Prints, for N = 4 qubits, the exact average of
``d^-1 tr(A B_U C D_U A D_U C B_U)`` after k doping steps (from the
fourth-moment channel), the reference closed form, and a short Monte-Carlo
estimate for comparison.
"""

from dopedclifford import closed_forms as cf
from dopedclifford.circuits import DopedCircuitSpec
from dopedclifford.montecarlo import mc_otoc8

N, D = 4, 16
SAMPLES = 4_000

print(f"{'k':>3} {'trace form':>12} {'channel':>12} {'reference':>12} {'MC mean':>10} {'stderr':>8}")
for k in (0, 1, 2, 4, 8):
    exact = cf.otoc8_trace_doped(D, k)
    via_channel = cf.otoc8_via_channel(N, k)
    ref = cf.otoc8_doped(D, k)
    mc = mc_otoc8(DopedCircuitSpec(N, k, seed=k), samples=SAMPLES)
    print(f"{k:>3} {float(exact):>12.6f} {float(via_channel):>12.6f} {float(ref):>12.6f} "
          f"{mc.mean:>10.5f} {mc.stderr:>8.5f}")
print(f"Haar: trace form {float(cf.otoc8_trace_haar(D)):.6f}, reference {float(cf.otoc8_haar(D)):.6f}")
