"""Excitation transfer along a 21-site chain.

A single excitation starts in the middle and spreads ballistically.
While the fronts are far from the chain ends the site populations
follow squared Bessel functions; once the fronts reflect, the edge
sites depart from that free-chain reference.
"""

import numpy as np

from ttchain import ChainSpec, ExcitonModel, TdseConfig
from ttchain.tdse import bessel_reference, initial_fundamental, propagate
from ttchain.observables import make_recorder

N      = 21
CENTER = 10
ALPHA  = 0.1
BETA   = -0.01

model = ExcitonModel(ChainSpec(N), ALPHA, BETA, eta=-0.1)
psi0 = initial_fundamental(model, CENTER, 2)
cfg = TdseConfig(scheme="s2", t_step=20.0, n_step=50, sub_steps=5,
                 max_rank=8, threshold=1e-12)

recorder = make_recorder(model, 2, reference=psi0)
records = [recorder.tdse_record(i, t, psi)
           for i, t, psi in propagate(model, psi0, cfg)]

# Population map: one row per sample, one column per site.
shades = " .:-=+*#%@"
print("site populations (rows: t = 0..1000, columns: sites 0..20)")
for rec in records[::5]:
    row = "".join(shades[min(int(p * 10), 9)] for p in rec.populations)
    print(f"t={rec.time:6.0f}  |{row}|")

# Against the free-chain Bessel reference at an early and a late time.
for snap in (records[10], records[45]):
    free = bessel_reference(model, [snap.time], CENTER)[0]
    mid = abs(snap.populations[CENTER] - free[CENTER])
    edge = max(abs(snap.populations[0] - free[0]),
               abs(snap.populations[N - 1] - free[N - 1]))
    print(f"t={snap.time:6.0f}  |center - Bessel| = {mid:.2e}"
          f"   |edge - Bessel| = {edge:.2e}")

# Norm and energy over the whole run.
norms = np.array([r.norm for r in records])
energies = np.array([r.energy for r in records])
print(f"norm span   {norms.max() - norms.min():.2e}")
print(f"energy span {energies.max() - energies.min():.2e}")
