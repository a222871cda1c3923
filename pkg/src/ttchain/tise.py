"""Stationary states of tensor-train operators.

The workhorse is an alternating sweep scheme: with all cores but one frozen,
the energy functional reduces to a small Hermitian eigenproblem for that
core, and sweeping back and forth relaxes the whole train.  Excited states
reuse the same machinery through Wielandt deflation: previously found
states are shifted upwards by a rank-one term added directly inside each
micro-problem, so the deflated operator never has to be formed as a train.

A quasi-exact route that matricizes the operator and diagonalizes it
densely serves as the reference at small system sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .errors import NumericsAbort
from .tt import (
    DENSE_CAP_DEFAULT,
    TTState,
    TruncationPolicy,
    dense_to_tt,
    random_tt,
    tt_add,
    tt_apply,
    tt_norm,
    tt_orthonormalize,
    tt_scale,
    tt_to_dense,
)

EIGEN_SELECTORS = ("dense-all", "dense-hermitian", "sparse-shift-invert")

# micro-problems smaller than this are always solved densely
_SPARSE_MICRO_DIM = 2000


@dataclass(frozen=True)
class TiseConfig:
    """Settings for a stationary-state solve."""

    n_levels: int = 1
    solver: str = "als"
    eigen: str = "dense-hermitian"
    ranks: int = 8
    repeats: int = 20
    conv_eps: float = 1e-8
    e_est: float | None = None
    seed: int = 42

    def __post_init__(self):
        if self.n_levels < 1:
            raise ValueError("n_levels must be at least 1")
        if self.solver not in ("als", "qe"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.eigen not in EIGEN_SELECTORS:
            raise ValueError(f"unknown eigen selector {self.eigen!r}")
        if self.ranks < 1:
            raise ValueError("ranks must be at least 1")
        if self.repeats < 3:
            raise ValueError("repeats must be at least 3; the stopping rule "
                             "examines the last three sweeps")
        if self.conv_eps <= 0.0:
            raise ValueError("conv_eps must be positive")


@dataclass
class TiseResult:
    """Energies and eigenstates with per-level convergence diagnostics."""

    energies: np.ndarray
    states: list
    sweeps: list
    history: list
    residuals: np.ndarray
    converged: list

    @property
    def n_levels(self):
        return len(self.states)


def deflation_shift(h):
    """Upper bound 2 max_row sum_col |H| evaluated core by core."""
    g = np.array([[1.0]])
    for core in h.cores:
        g = g @ np.abs(core).sum(axis=2).max(axis=1)
    return 2.0 * float(g[0, 0])


def _env_left(env, x_core, h_core):
    return np.einsum("ahc,aib,hijg,cjd->bgd", env, x_core.conj(), h_core,
                     x_core, optimize=True)


def _env_right(env, x_core, h_core):
    return np.einsum("bgd,aib,hijg,cjd->ahc", env, x_core.conj(), h_core,
                     x_core, optimize=True)


def _overlap_left(env, x_core, p_core):
    return np.einsum("aA,aib,AiB->bB", env, x_core.conj(), p_core,
                     optimize=True)


def _overlap_right(env, x_core, p_core):
    return np.einsum("bB,aib,AiB->aA", env, x_core.conj(), p_core,
                     optimize=True)


def _micro_matrix(lenv, h_core, renv):
    a = np.einsum("ahc,hijg,bgd->aibcjd", lenv, h_core, renv, optimize=True)
    dim = a.shape[0] * a.shape[1] * a.shape[2]
    a = a.reshape(dim, dim)
    return (a + a.conj().T) / 2.0


def _solve_micro(a, eigen, e_est, site):
    dim = a.shape[0]
    try:
        if (eigen == "sparse-shift-invert" and dim > _SPARSE_MICRO_DIM
                and e_est is not None):
            val, vec = spla.eigsh(a, k=1, sigma=e_est, which="LM")
            return float(val[0]), vec[:, 0]
        vals, vecs = np.linalg.eigh(a)
    except (np.linalg.LinAlgError, spla.ArpackError) as exc:
        raise NumericsAbort(f"micro eigensolver failed at site {site}: {exc}",
                            step=site) from exc
    idx = 0 if e_est is None else int(np.argmin(np.abs(vals - e_est)))
    return float(vals[idx]), vecs[:, idx]


def als_sweep(h, trial, deflation=(), eigen="dense-hermitian", e_est=None,
              gamma=None):
    """One forward-plus-backward relaxation pass over all cores.

    ``trial`` must be right-orthonormalized; the returned state is again
    right-orthonormalized with unit norm.  ``deflation`` holds states to be
    shifted up by ``gamma`` inside every micro-problem.
    """
    n = trial.n_site
    if gamma is None:
        gamma = deflation_shift(h) if deflation else 0.0
    cores = [c.copy() for c in trial.cores]
    h_cores = h.cores
    p_cores = [p.cores for p in deflation]

    def micro(lenv, renv, olenvs, orenvs, k):
        a = _micro_matrix(lenv, h_cores[k], renv)
        for j in range(len(p_cores)):
            w = np.einsum("aA,AiB,bB->aib", olenvs[j], p_cores[j][k],
                          orenvs[j], optimize=True).reshape(-1)
            a = a + gamma * np.outer(w, w.conj())
        return _solve_micro(a, eigen, e_est, k)

    # right environments against the incoming right-orthonormal gauge
    renvs = [None] * (n + 1)
    renvs[n] = np.ones((1, 1, 1), dtype=complex)
    orenvs = [None] * (n + 1)
    orenvs[n] = [np.ones((1, 1), dtype=complex) for _ in p_cores]
    for k in range(n - 1, 0, -1):
        renvs[k] = _env_right(renvs[k + 1], cores[k], h_cores[k])
        orenvs[k] = [_overlap_right(orenvs[k + 1][j], cores[k], p_cores[j][k])
                     for j in range(len(p_cores))]

    lenv = np.ones((1, 1, 1), dtype=complex)
    olenv = [np.ones((1, 1), dtype=complex) for _ in p_cores]
    val = 0.0
    for k in range(n):
        val, vec = micro(lenv, renvs[k + 1], olenv, orenvs[k + 1], k)
        r0, d, r1 = cores[k].shape
        core = vec.reshape(r0, d, r1)
        if k == n - 1:
            cores[k] = core
            break
        q, r = np.linalg.qr(core.reshape(r0 * d, r1))
        cores[k] = q.reshape(r0, d, -1)
        cores[k + 1] = np.einsum("ab,bic->aic", r, cores[k + 1])
        lenv = _env_left(lenv, cores[k], h_cores[k])
        olenv = [_overlap_left(olenv[j], cores[k], p_cores[j][k])
                 for j in range(len(p_cores))]

    # backward half-sweep against the now left-orthonormal gauge
    lenvs = [np.ones((1, 1, 1), dtype=complex)]
    olenvs = [[np.ones((1, 1), dtype=complex) for _ in p_cores]]
    for k in range(n - 1):
        lenvs.append(_env_left(lenvs[k], cores[k], h_cores[k]))
        olenvs.append([_overlap_left(olenvs[k][j], cores[k], p_cores[j][k])
                       for j in range(len(p_cores))])

    renv = np.ones((1, 1, 1), dtype=complex)
    orenv = [np.ones((1, 1), dtype=complex) for _ in p_cores]
    for k in range(n - 1, -1, -1):
        val, vec = micro(lenvs[k], renv, olenvs[k], orenv, k)
        r0, d, r1 = cores[k].shape
        core = vec.reshape(r0, d, r1)
        if k == 0:
            cores[k] = core / np.linalg.norm(vec)
            break
        q, r = np.linalg.qr(core.reshape(r0, d * r1).conj().T)
        cores[k] = q.conj().T.reshape(-1, d, r1)
        cores[k - 1] = np.einsum("aib,bc->aic", cores[k - 1], r.conj().T)
        renv = _env_right(renv, cores[k], h_cores[k])
        orenv = [_overlap_right(orenv[j], cores[k], p_cores[j][k])
                 for j in range(len(p_cores))]

    return TTState(cores), val


def _residual(h, state, energy):
    return tt_norm(tt_add(tt_apply(h, state), tt_scale(state, -energy)))


def solve_tise(h, cfg, dense_cap=DENSE_CAP_DEFAULT):
    """Lowest (or e_est-nearest) levels of a Hermitian TT operator."""
    if cfg.solver == "qe":
        return solve_tise_dense(h, cfg, dense_cap=dense_cap)
    rng = np.random.default_rng(cfg.seed)
    gamma = deflation_shift(h)
    states, sweeps, history, converged = [], [], [], []
    energies, residuals = [], []
    for level in range(cfg.n_levels):
        trial = tt_orthonormalize(random_tt(h.dims, cfg.ranks, rng),
                                  direction="right")
        track = []
        done = False
        for sweep in range(cfg.repeats):
            try:
                trial, val = als_sweep(h, trial, states, cfg.eigen, cfg.e_est,
                                       gamma)
            except NumericsAbort as exc:
                raise NumericsAbort(f"level {level}, sweep {sweep + 1}: {exc}",
                                    step=exc.step) from exc
            track.append(val)
            if len(track) >= 4:
                deltas = np.abs(np.diff(np.asarray(track[-4:])))
                if np.all(deltas < cfg.conv_eps):
                    done = True
                    break
        states.append(trial)
        energies.append(track[-1])
        sweeps.append(len(track))
        history.append(np.asarray(track))
        converged.append(done)
        residuals.append(_residual(h, trial, track[-1]))
    return TiseResult(np.asarray(energies), states, sweeps, history,
                      np.asarray(residuals), converged)


def solve_tise_dense(h, cfg, dense_cap=DENSE_CAP_DEFAULT):
    """Quasi-exact levels from the matricized operator."""
    mat = tt_to_dense(h, dense_cap=dense_cap)
    scale = np.linalg.norm(mat)
    if np.linalg.norm(mat - mat.conj().T) > 1e-12 * max(1.0, scale):
        raise ValueError("operator is not Hermitian; refusing the dense solve")
    mat = (mat + mat.conj().T) / 2.0
    n = min(cfg.n_levels, mat.shape[0])
    if cfg.eigen == "sparse-shift-invert" and n < mat.shape[0] - 1:
        sigma = cfg.e_est
        if sigma is None:
            vals, vecs = spla.eigsh(mat, k=n, which="SA")
        else:
            vals, vecs = spla.eigsh(mat, k=n, sigma=sigma, which="LM")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    else:
        vals, vecs = np.linalg.eigh(mat)
        if cfg.eigen == "dense-all" and cfg.e_est is not None:
            pick = np.argsort(np.abs(vals - cfg.e_est), kind="stable")[:n]
            pick = np.sort(pick)
        else:
            pick = np.arange(n)
        vals, vecs = vals[pick], vecs[:, pick]
    policy = TruncationPolicy(max_rank=cfg.ranks)
    states, residuals = [], []
    for j in range(len(vals)):
        state = dense_to_tt(vecs[:, j], policy, dims=h.dims,
                            dense_cap=dense_cap)
        states.append(state)
        residuals.append(_residual(h, state, float(vals[j])))
    return TiseResult(np.asarray(vals, dtype=float), states,
                      [0] * len(vals), [np.asarray([v]) for v in vals],
                      np.asarray(residuals), [True] * len(vals))
