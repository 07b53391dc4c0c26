"""
Undoing readout errors
======================

Pass the true joint probabilities through an imperfect detector, then
invert the confusion matrix to get them back.
"""
import numpy as np

import workfluct as wf

r = wf.evaluate(wf.DriveProtocol(tau=0.1), 0.6 / wf.DEFAULT_Z)
model = wf.DEFAULT_READOUT

p0_exp, pc_exp = wf.measure_joint(r.table, model)
corrected, adjustment = wf.correct_joint(p0_exp, pc_exp, model)

np.set_printoptions(precision=6, suppress=True)
print("true\n", r.table.entries)
print("measured\n", (pc_exp * p0_exp[None, :]).T)
print("corrected\n", corrected.entries)
print("max error", np.abs(corrected.entries - r.table.entries).max(), "clamped mass", adjustment)
