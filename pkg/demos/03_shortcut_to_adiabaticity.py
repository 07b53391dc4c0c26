"""
Counter-diabatic driving
========================

Adding the transverse Y field cancels every transition, so even the fastest
drive reaches the minimal variance.
"""
import numpy as np

import workfluct as wf

tau = 0.05
cd = wf.DriveProtocol(tau=tau, kind="cd")

# the waveform that would be sent to hardware
for t in np.linspace(0, tau, 6):
    print(f"t {t * 1e3:5.1f} us  X {wf.x_schedule(cd, t):.3f}  Y {wf.cd_field(cd, t):.3f} kHz")

for bz in (0.6, 0.8):
    beta = bz / wf.DEFAULT_Z
    bare, fast = wf.evaluate(cd.with_kind("bare"), beta), wf.evaluate(cd, beta)
    print(f"bZ {bz}: bare var {bare.variance:.5f}, CD var {fast.variance:.5f}, "
          f"CD leakage {fast.transitions[0, 1]:.1e}")
