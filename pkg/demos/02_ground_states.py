"""Lowest eigenstates of a vibronic chain by alternating sweeps.

The sweep solver works on the tensor-train cores directly, one site at
a time, shifting the spectrum towards an energy estimate so that the
interior of a band can be targeted.  On a three-site chain the dense
matrix is small enough to diagonalize exactly for comparison.
"""

import numpy as np

from ttchain import ChainSpec, CoupledModel, TiseConfig, solve_tise
from ttchain.tt import tt_to_dense

N     = 3
ALPHA = 0.1
BETA  = -0.01
MASS  = 1.0
NU    = 1.0e-3
OMG   = np.sqrt(2.0) * 1.0e-3
SIG   = 1.6e-4    # excitation <-> bond-stretch coupling

model = CoupledModel(ChainSpec(N, periodic=True), ALPHA, BETA, 0.0,
                     MASS, NU, OMG, sig=SIG)
h = model.to_operator((2, 4))

# Target the bottom of the single-excitation band.
e_est = ALPHA - 2.0 * abs(BETA)
cfg = TiseConfig(n_levels=5, ranks=15, repeats=20, conv_eps=1e-8,
                 e_est=e_est, seed=42)
result = solve_tise(h, cfg)

dense = np.linalg.eigvalsh(tt_to_dense(h))
near = dense[np.argsort(np.abs(dense - e_est))[:5]]

print(f"energy estimate: {e_est:+.6f}")
print(f"{'level':>5s} {'sweeps':>7s} {'energy':>18s} {'dense':>18s} {'diff':>10s}")
for k, (e, d) in enumerate(zip(np.sort(result.energies), np.sort(near))):
    sw = result.sweeps[k]
    print(f"{k:5d} {sw:7d} {e:+18.12f} {d:+18.12f} {abs(e - d):10.2e}")
