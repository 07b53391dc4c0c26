"""
Finite-sample bias of the free-energy estimator
===============================================

The log of a sample mean overestimates dF. The bias shrinks roughly as 1/N,
and broad work distributions (sudden quench) converge slower than narrow
ones (adiabatic).
"""
import workfluct as wf
from workfluct.experiment import endpoint_bases, evaluate_transitions

p = wf.DriveProtocol()
b0, b1 = endpoint_bases(p)
beta = 0.6 / wf.DEFAULT_Z
grid = [10, 100, 1000, 10000]

for which in ("sudden", "adiabatic"):
    r = evaluate_transitions(p, beta, wf.reference_transitions(p, which))
    s = wf.convergence_study(r.table, b0.values, b1.values, beta, grid, 200_000, seed=1)
    print(which, f"dF = {s.delta_f:.5f}")
    for n, b, e, se in zip(s.n_grid, s.bias, s.rmse, s.stderr):
        print(f"  N {n:6d}  bias {b:+.2e} +- {se:.1e}  rmse {e:.4f}")

# a single finite batch of trajectories
r = evaluate_transitions(p, beta, wf.reference_transitions(p, "sudden"))
batch = wf.sample_trajectories(r.table, b0.values, b1.values, 50, seed=2)
print("one batch of 50:", wf.jarzynski_estimator(batch, beta))
