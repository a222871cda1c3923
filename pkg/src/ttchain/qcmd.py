"""Mean-field dynamics of a quantum excitation over a classical lattice.

The chain is split into a single-excitation amplitude vector ``a`` (one
complex entry per site) and classical lattice coordinates ``(q, p)``.
They evolve under the coupled equations

    i da_i/dt = [alpha_i + sig_i (q_{i+1} - q_{i-1}) + W] a_i
                + beta_{i-1} a_{i-1} + beta_i a_{i+1}
    dq_i/dt   = p_i / m_i
    dp_i/dt   = f_i(q) - sig_{i-1} |a_{i-1}|^2 + sig_{i+1} |a_{i+1}|^2

where ``f`` is the harmonic lattice force and ``W`` the instantaneous
classical energy; ``W`` shifts the diagonal uniformly, so it only rotates
the global phase of ``a`` and leaves every population and every
autocorrelation magnitude untouched.  Terms referencing a missing
neighbor are dropped on open chains.

Each propagation step interleaves two exactly solvable sub-flows: the
quantum amplitudes advance under the frozen-lattice Hamiltonian through
an eigendecomposition, and the lattice advances under the harmonic flow
with the excitation forces held constant.  Three compositions are
offered per sub-step of length tau:

    lt   Q(tau) C(tau)                first order
    sm   C(tau/2) Q(tau) C(tau/2)     second order
    pb   Q(tau/2) C(tau) Q(tau/2)     second order

All of them conserve the amplitude norm to rounding accuracy because the
quantum sub-flow is exactly unitary; none renormalizes on its own.  With
``normalize`` set, the amplitudes are rescaled to unit norm after every
main step.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .ceom import HarmonicFlow
from .errors import NumericsAbort

SCHEMES = ("lt", "sm", "pb")

_MAGIC = b"WQCM"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class QcmdConfig:
    """Settings for a mean-field propagation run."""

    scheme: str = "sm"
    t_step: float = 1.0
    n_step: int = 1
    sub_steps: int = 1
    normalize: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.t_step <= 0.0:
            raise ValueError("t_step must be positive")
        if self.n_step < 1:
            raise ValueError("n_step must be at least 1")
        if self.sub_steps < 1:
            raise ValueError("sub_steps must be at least 1")


def qcmd_energy(model, a, q, p):
    """Energy split into quantum, classical and coupling parts.

    The quantum part covers the site energies and hops, the classical
    part the lattice kinetic plus potential energy, and the coupling
    part the excitation density weighted by the local stretches.  The
    phase term ``W`` belongs to none of them.
    """
    a = np.asarray(a, dtype=complex)
    quantum = float(np.real(np.conj(a) @ (model.exciton.hop_matrix() @ a)))
    classical = float(model.phonon.kinetic(p) + model.phonon.potential(q))
    coupling = float(np.abs(a) ** 2 @ model.qu_coupling(q))
    return {
        "quantum": quantum,
        "classical": classical,
        "coupling": coupling,
        "total": quantum + classical + coupling,
    }


class _MeanFieldStepper:
    """Alternates exact quantum and classical sub-flows."""

    def __init__(self, model, scheme):
        self.model = model
        self.scheme = scheme
        self.flow = HarmonicFlow(model.phonon)
        self.hop = model.exciton.hop_matrix()
        self.coupled = bool(np.any(model.sigs != 0.0))

    def _quantum(self, a, q, p, tau):
        h = self.hop.copy()
        n = h.shape[0]
        h[np.arange(n), np.arange(n)] += self.model.qu_coupling(q)
        vals, vecs = np.linalg.eigh(h)
        a = vecs @ (np.exp(-1j * tau * vals) * (vecs.T @ a))
        # W commutes with everything, so it factors into a global phase
        w = self.model.phonon.kinetic(p) + self.model.phonon.potential(q)
        return np.exp(-1j * tau * w) * a

    def _classical(self, a, q, p, tau):
        force = self.model.cl_coupling(a) if self.coupled else None
        return self.flow.advance(q, p, tau, force)

    def substep(self, a, q, p, tau):
        if self.scheme == "lt":
            q, p = self._classical(a, q, p, tau)
            a = self._quantum(a, q, p, tau)
        elif self.scheme == "sm":
            q, p = self._classical(a, q, p, 0.5 * tau)
            a = self._quantum(a, q, p, tau)
            q, p = self._classical(a, q, p, 0.5 * tau)
        else:
            a = self._quantum(a, q, p, 0.5 * tau)
            q, p = self._classical(a, q, p, tau)
            a = self._quantum(a, q, p, 0.5 * tau)
        return a, q, p


def qcmd_propagate(model, a0, q0, p0, cfg, t0=0.0, index0=0, emit_initial=True):
    """Yield ``(index, time, a, q, p)`` after every main step.

    ``q0`` and ``p0`` default to a lattice at rest in its minimum.  The
    model must expose only the antisymmetric stretch coupling; richer
    couplings have no mean-field form here.
    """
    model.require_sigma_only()
    n = model.chain.n_site
    a = np.asarray(a0, dtype=complex).copy()
    if a.shape != (n,):
        raise ValueError(f"a0: expected {n} amplitudes, got shape {a.shape}")
    q = np.zeros(n) if q0 is None else np.asarray(q0, dtype=float).copy()
    p = np.zeros(n) if p0 is None else np.asarray(p0, dtype=float).copy()
    if q.shape != (n,) or p.shape != (n,):
        raise ValueError(f"q0, p0: expected {n} values each")

    stepper = _MeanFieldStepper(model, cfg.scheme)
    tau = cfg.t_step / cfg.sub_steps
    if emit_initial:
        yield index0, t0, a.copy(), q.copy(), p.copy()
    for k in range(1, cfg.n_step + 1):
        try:
            for _ in range(cfg.sub_steps):
                a, q, p = stepper.substep(a, q, p, tau)
        except np.linalg.LinAlgError as exc:
            raise NumericsAbort(
                f"linear algebra failure during step {index0 + k}: {exc}",
                step=index0 + k,
            ) from exc
        if cfg.normalize:
            a = a / np.linalg.norm(a)
        if not (
            np.all(np.isfinite(q))
            and np.all(np.isfinite(p))
            and np.all(np.isfinite(a))
        ):
            raise NumericsAbort(
                f"mean-field propagation left the finite range at step "
                f"{index0 + k}",
                step=index0 + k,
            )
        yield index0 + k, t0 + k * cfg.t_step, a.copy(), q.copy(), p.copy()


def checkpoint_to_bytes(index, time, a, q, p):
    """Serialize a mean-field phase-space point with its step label."""
    a = np.ascontiguousarray(a, dtype="<c16")
    q = np.ascontiguousarray(q, dtype="<f8")
    p = np.ascontiguousarray(p, dtype="<f8")
    if not (a.ndim == q.ndim == p.ndim == 1 and a.size == q.size == p.size):
        raise ValueError("a, q and p must be site vectors of equal length")
    head = [
        _MAGIC,
        struct.pack("<H", _FORMAT_VERSION),
        struct.pack("<Q", int(index)),
        struct.pack("<d", float(time)),
        struct.pack("<Q", a.size),
    ]
    return b"".join(head + [a.tobytes(), q.tobytes(), p.tobytes()])


def checkpoint_from_bytes(data):
    if data[:4] != _MAGIC:
        raise ValueError("not a mean-field checkpoint (bad magic)")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (index,) = struct.unpack_from("<Q", data, 6)
    (time,) = struct.unpack_from("<d", data, 14)
    (n,) = struct.unpack_from("<Q", data, 22)
    off = 30
    a = np.frombuffer(data, dtype="<c16", count=n, offset=off).astype(complex)
    off += 16 * n
    q = np.frombuffer(data, dtype="<f8", count=n, offset=off).astype(float)
    off += 8 * n
    p = np.frombuffer(data, dtype="<f8", count=n, offset=off).astype(float)
    off += 8 * n
    if off != len(data):
        raise ValueError("checkpoint size does not match its header")
    return int(index), float(time), a, q, p


def save_checkpoint(path, index, time, a, q, p):
    with open(path, "wb") as fh:
        fh.write(checkpoint_to_bytes(index, time, a, q, p))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return checkpoint_from_bytes(fh.read())
