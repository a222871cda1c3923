"""Classical equations of motion for the harmonic lattice.

Three steppers integrate Hamilton's equations for the chain of masses:
``rk`` is the classic fourth-order Runge-Kutta rule, ``vv`` the
kick-drift-kick velocity Verlet rule, and ``qe`` composes the exact
normal-mode flow of the quadratic Hamiltonian per sub-step.  The exact
flow also serves the mixed quantum-classical propagator, where a constant
extra force shifts the oscillation centers during a sub-step.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericsAbort

SOLVERS = ("rk", "vv", "qe")

# modes this far below the top frequency move ballistically
_ZERO_MODE_CUT = 1e-6


@dataclass(frozen=True)
class CeomConfig:
    """Settings for a classical propagation run."""

    solver: str = "qe"
    t_step: float = 1.0
    n_step: int = 1
    sub_steps: int = 1

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.t_step <= 0.0:
            raise ValueError("t_step must be positive")
        if self.n_step < 1:
            raise ValueError("n_step must be at least 1")
        if self.sub_steps < 1:
            raise ValueError("sub_steps must be at least 1")


class HarmonicFlow:
    """Exact flow of the quadratic lattice Hamiltonian.

    ``advance`` maps phase-space points over any time span; an optional
    constant force displaces the mode centers for the duration of the
    span.  Translation-free (zero-frequency) modes drift ballistically.
    """

    def __init__(self, model):
        omega, modes = model.normal_modes()
        self.omega = omega
        self.modes = modes
        self.root_m = np.sqrt(model.masses)
        top = float(omega.max()) if omega.size else 0.0
        self.free = omega <= _ZERO_MODE_CUT * top

    def advance(self, q, p, tau, force=None):
        """Phase-space point after ``tau`` under the quadratic flow."""
        y0 = self.modes.T @ (self.root_m * np.asarray(q, dtype=float))
        v0 = self.modes.T @ (np.asarray(p, dtype=float) / self.root_m)
        osc = ~self.free
        w = self.omega[osc]
        y = np.empty_like(y0)
        v = np.empty_like(v0)
        if force is None:
            y[self.free] = y0[self.free] + tau * v0[self.free]
            v[self.free] = v0[self.free]
            center = 0.0
        else:
            g = self.modes.T @ (np.asarray(force, dtype=float) / self.root_m)
            y[self.free] = (y0[self.free] + tau * v0[self.free]
                            + 0.5 * tau**2 * g[self.free])
            v[self.free] = v0[self.free] + tau * g[self.free]
            center = g[osc] / w**2
        s, c = np.sin(w * tau), np.cos(w * tau)
        dy = y0[osc] - center
        y[osc] = center + dy * c + (v0[osc] / w) * s
        v[osc] = -dy * w * s + v0[osc] * c
        return (self.modes @ y) / self.root_m, (self.modes @ v) * self.root_m


def ceom_coherent_init(model, displace):
    """Phase-space start resting at the given mean displacements."""
    n = model.chain.n_site
    q0 = np.asarray(displace, dtype=float)
    if q0.ndim == 0:
        q0 = np.full(n, float(q0))
    if q0.shape != (n,):
        raise ValueError(
            f"displace: expected a scalar or {n} values, got shape {q0.shape}"
        )
    return q0.copy(), np.zeros(n)


def ceom_exact(model, q0, p0, t):
    """One-shot exact propagation to time ``t``."""
    return HarmonicFlow(model).advance(q0, p0, t)


def _rk_substep(model, q, p, tau):
    def deriv(qq, pp):
        return pp / model.masses, model.force(qq)

    k1q, k1p = deriv(q, p)
    k2q, k2p = deriv(q + 0.5 * tau * k1q, p + 0.5 * tau * k1p)
    k3q, k3p = deriv(q + 0.5 * tau * k2q, p + 0.5 * tau * k2p)
    k4q, k4p = deriv(q + tau * k3q, p + tau * k3p)
    q = q + tau / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    p = p + tau / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return q, p


def _vv_substep(model, q, p, tau):
    p = p + 0.5 * tau * model.force(q)
    q = q + tau * p / model.masses
    p = p + 0.5 * tau * model.force(q)
    return q, p


def ceom_propagate(model, q0, p0, cfg, t0=0.0, index0=0, emit_initial=True):
    """Yield ``(index, time, q, p)`` after every main step."""
    q = np.asarray(q0, dtype=float).copy()
    p = np.asarray(p0, dtype=float).copy()
    tau = cfg.t_step / cfg.sub_steps
    flow = HarmonicFlow(model) if cfg.solver == "qe" else None
    if emit_initial:
        yield index0, t0, q.copy(), p.copy()
    for k in range(1, cfg.n_step + 1):
        for _ in range(cfg.sub_steps):
            if cfg.solver == "qe":
                q, p = flow.advance(q, p, tau)
            elif cfg.solver == "vv":
                q, p = _vv_substep(model, q, p, tau)
            else:
                q, p = _rk_substep(model, q, p, tau)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise NumericsAbort(
                f"classical propagation left the finite range at step "
                f"{index0 + k}",
                step=index0 + k,
            )
        yield index0 + k, t0 + k * cfg.t_step, q.copy(), p.copy()
