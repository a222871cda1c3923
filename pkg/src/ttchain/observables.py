"""Site-resolved measurements and uniform run records.

Every propagation or eigensolver run reduces to a stream of
:class:`ObservableRecord` rows holding energies, norms, autocorrelation
and per-site summaries.  The reductions work directly on tensor trains:
Gram environments accumulated from both chain ends make the one-site
density matrix exact for unnormalized trains, and the result is rescaled
to unit trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tt import tt_expect, tt_inner, tt_norm


def _left_environments(state):
    """Gram matrices of the train head, one per site boundary."""
    envs = [np.ones((1, 1), dtype=complex)]
    for core in state.cores:
        envs.append(np.einsum("aib,ac,cid->bd", core.conj(), envs[-1], core))
    return envs


def _right_environments(state):
    envs = [np.ones((1, 1), dtype=complex)]
    for core in reversed(state.cores):
        envs.append(np.einsum("aib,bd,cid->ac", core.conj(), envs[-1], core))
    envs.reverse()
    return envs


def site_densities(state):
    """All one-site reduced density matrices in a single sweep."""
    left = _left_environments(state)
    right = _right_environments(state)
    out = []
    for k, core in enumerate(state.cores):
        rho = np.einsum(
            "aib,ac,cjd,bd->ji", core.conj(), left[k], core, right[k + 1]
        )
        out.append(rho / np.trace(rho).real)
    return out


def reduce_site(state, site):
    """Reduced density matrix of one site, unit trace."""
    n = state.n_site
    if not 0 <= site < n:
        raise ValueError(f"site must be in 0..{n - 1}, got {site}")
    return site_densities(state)[site]


def _moments(rho, op):
    mean = float(np.real(np.trace(rho @ op)))
    second = float(np.real(np.trace(rho @ op @ op)))
    return mean, float(np.sqrt(max(second - mean**2, 0.0)))


def expect_local(state, site, op):
    """Mean and spread of a Hermitian one-site operator."""
    return _moments(reduce_site(state, site), np.asarray(op))


@dataclass
class ObservableRecord:
    """One measured row of a run: scalars plus per-site series.

    Fields that make no sense for a given run kind stay ``None``; the
    density matrices are only attached on request since they dominate
    the storage footprint.
    """

    kind: str
    index: int
    time: float | None
    energy: float
    energy_parts: dict = field(default_factory=dict)
    norm: float | None = None
    acf: complex | None = None
    qnum: np.ndarray | None = None
    populations: np.ndarray | None = None
    r_mean: np.ndarray | None = None
    r_unc: np.ndarray | None = None
    p_mean: np.ndarray | None = None
    p_unc: np.ndarray | None = None
    densities: tuple | None = None


class Recorder:
    """Builds records for one run; the initial state anchors the ACF."""

    def __init__(self, model, n_dims=2, reference=None, keep_densities=False):
        self.model = model
        self.n_dims = n_dims
        self.reference = reference
        self.keep_densities = keep_densities
        self._obs = None
        self._parts = None

    @property
    def obs(self):
        if self._obs is None:
            self._obs = self.model.site_observables(self.n_dims)
        return self._obs

    @property
    def parts(self):
        if self._parts is None:
            self._parts = self.model.energy_components(self.n_dims)
        return self._parts

    def _site_rows(self, psi):
        dens = site_densities(psi)
        rows = {}
        for name, ops in self.obs.items():
            stats = [_moments(rho, op) for rho, op in zip(dens, ops)]
            rows[name] = (
                np.array([s[0] for s in stats]),
                np.array([s[1] for s in stats]),
            )
        return dens, rows

    def _energy(self, psi, nrm2):
        parts = {
            name: float(np.real(tt_expect(op, psi))) / nrm2
            for name, op in self.parts.items()
        }
        if "total" in parts:
            return parts.pop("total"), parts
        return sum(parts.values()), parts

    def _state_record(self, kind, index, time, psi, acf, energy=None):
        nrm = tt_norm(psi)
        if energy is None:
            energy, parts = self._energy(psi, nrm**2)
        else:
            parts = {
                name: float(np.real(tt_expect(op, psi))) / nrm**2
                for name, op in self.parts.items()
                if name != "total"
            }
        dens, rows = self._site_rows(psi)
        if self.model.kind == "coupled":
            qnum = rows["qnum_ph"][0]
            populations = rows["qnum_ex"][0]
        else:
            qnum = rows["qnum"][0]
            populations = qnum if self.model.kind == "exciton" else None
        r_mean = r_unc = p_mean = p_unc = None
        if "position" in rows:
            r_mean, r_unc = rows["position"]
            p_mean, p_unc = rows["momentum"]
        return ObservableRecord(
            kind=kind, index=index, time=time, energy=energy,
            energy_parts=parts, norm=float(nrm), acf=acf,
            qnum=qnum, populations=populations,
            r_mean=r_mean, r_unc=r_unc, p_mean=p_mean, p_unc=p_unc,
            densities=tuple(dens) if self.keep_densities else None,
        )

    def tdse_record(self, index, time, psi):
        acf = None
        if self.reference is not None:
            acf = complex(tt_inner(self.reference, psi))
        return self._state_record("tdse", index, time, psi, acf)

    def tise_record(self, level, energy, psi):
        return self._state_record("tise", level, None, psi, None,
                                  energy=float(energy))

    def qcmd_record(self, index, time, a, q, p):
        from .qcmd import qcmd_energy

        a = np.asarray(a, dtype=complex)
        parts = qcmd_energy(self.model, a, q, p)
        energy = parts.pop("total")
        acf = None
        if self.reference is not None:
            acf = complex(np.vdot(self.reference, a))
        return ObservableRecord(
            kind="qcmd", index=index, time=time, energy=energy,
            energy_parts=parts, norm=float(np.linalg.norm(a)), acf=acf,
            populations=np.abs(a) ** 2,
            r_mean=np.asarray(q, dtype=float).copy(),
            p_mean=np.asarray(p, dtype=float).copy(),
        )

    def ceom_record(self, index, time, q, p):
        kinetic = float(self.model.kinetic(p))
        potential = float(self.model.potential(q))
        return ObservableRecord(
            kind="ceom", index=index, time=time,
            energy=kinetic + potential,
            energy_parts={"kinetic": kinetic, "potential": potential},
            r_mean=np.asarray(q, dtype=float).copy(),
            p_mean=np.asarray(p, dtype=float).copy(),
        )


def make_recorder(model, n_dims=2, reference=None, keep_densities=False):
    """Recorder for a run over the given model."""
    return Recorder(model, n_dims, reference, keep_densities)
