"""
Work statistics of a driven qubit
=================================

Build the two-point-measurement work distribution for the cosine ramp at
two durations and check the exponential-work identity.
"""
import numpy as np

import workfluct as wf

beta_z = 0.6
beta = beta_z / wf.DEFAULT_Z

###############################################################################
# A short and a long drive. The long one is nearly adiabatic, so the work
# distribution collapses onto two atoms.
for tau in (0.05, 0.8):
    r = wf.evaluate(wf.DriveProtocol(tau=tau), beta)
    print(f"tau = {tau * 1e3:.0f} us")
    for w, p in zip(r.work.work, r.work.prob):
        print(f"  W = {w:+.4f} kHz   p = {p:.4f}")
    print(f"  <exp(-beta W)> = {r.mean:.8f}   var = {r.variance:.5f}")

###############################################################################
# Both means agree with exp(-beta dF) regardless of duration.
print("cosh(bZ)/cosh(bZ/2) =", np.cosh(beta_z) / np.cosh(beta_z / 2))
