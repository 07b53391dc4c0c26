"""
How adiabatic is the ramp?
==========================

The adiabatic parameter falls as 1/tau; the work variance follows it down
towards the transition-free floor.
"""
import workfluct as wf
from workfluct.experiment import reference_transitions, evaluate_transitions

beta = 0.6 / wf.DEFAULT_Z
p = wf.DriveProtocol()
floor = evaluate_transitions(p, beta, reference_transitions(p, "adiabatic")).variance
ceiling = evaluate_transitions(p, beta, reference_transitions(p, "sudden")).variance
print(f"sudden variance {ceiling:.5f}, adiabatic variance {floor:.5f}")

for tau in (0.05, 0.1, 0.2, 0.3, 0.8):
    p = wf.DriveProtocol(tau=tau)
    rep = wf.adiabatic_parameter(p)
    r = wf.evaluate(p, beta)
    print(f"tau {tau * 1e3:4.0f} us  Gamma {rep.gamma:.4f}  (t* = {rep.argmax_time * 1e3:.1f} us)"
          f"  p_up {r.transitions[0, 1]:.2e}  var {r.variance:.5f}")
