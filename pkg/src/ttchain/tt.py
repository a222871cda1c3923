"""Tensor-train containers and the algebra used throughout the library.

A state is stored as a list of order-3 cores with shape
``(rank_left, dim, rank_right)``; an operator as order-4 cores with shape
``(rank_left, dim_row, dim_col, rank_right)``.  Boundary ranks are always 1,
entries are complex128 and row-major.  Dense conversions use site-major
ordering, i.e. the first site is the slowest index (Kronecker order).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DenseCapExceeded

DENSE_CAP_DEFAULT = 4096

# Singular values below this fraction of the largest one are always dropped.
_SV_FLOOR = 1e-14

_MAGIC = b"WTTC"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TruncationPolicy:
    """Rank-revealing truncation rule: relative cutoff plus a hard rank cap."""

    max_rank: int
    threshold: float = 0.0

    def __post_init__(self):
        if int(self.max_rank) < 1:
            raise ValueError(f"max_rank must be >= 1, got {self.max_rank}")
        if not 0.0 <= self.threshold < 1.0:
            raise ValueError(f"threshold must be in [0, 1), got {self.threshold}")


#: Policy that keeps everything above the numerical floor.
EXACT_POLICY = TruncationPolicy(max_rank=2**31 - 1, threshold=0.0)


class _TTBase:
    _core_ndim = None

    def __init__(self, cores):
        cores = [np.array(c, dtype=np.complex128, order="C") for c in cores]
        if not cores:
            raise ValueError("need at least one core")
        for k, c in enumerate(cores):
            if c.ndim != self._core_ndim:
                raise ValueError(
                    f"core {k}: expected ndim {self._core_ndim}, got {c.ndim}"
                )
            if self._core_ndim == 4 and c.shape[1] != c.shape[2]:
                raise ValueError(f"core {k}: row/col dims differ: {c.shape}")
        if cores[0].shape[0] != 1 or cores[-1].shape[-1] != 1:
            raise ValueError("boundary ranks must be 1")
        for k in range(len(cores) - 1):
            if cores[k].shape[-1] != cores[k + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between cores {k} and {k + 1}: "
                    f"{cores[k].shape[-1]} vs {cores[k + 1].shape[0]}"
                )
        for c in cores:
            c.flags.writeable = False
        self.cores = tuple(cores)

    def __len__(self):
        return len(self.cores)

    @property
    def n_site(self):
        return len(self.cores)

    @property
    def dims(self):
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self):
        return (1,) + tuple(c.shape[-1] for c in self.cores)

    def copy(self):
        return type(self)([c.copy() for c in self.cores])

    def __repr__(self):
        return (
            f"{type(self).__name__}(n_site={self.n_site}, dims={self.dims}, "
            f"ranks={self.ranks})"
        )


class TTState(_TTBase):
    """Tensor-train vector over a chain of local spaces."""

    _core_ndim = 3

    def __add__(self, other):
        return tt_add(self, other)

    def __mul__(self, scalar):
        return tt_scale(self, scalar)

    __rmul__ = __mul__

    def norm(self):
        return tt_norm(self)


class TTOperator(_TTBase):
    """Tensor-train operator over a chain of local spaces."""

    _core_ndim = 4

    def __add__(self, other):
        return tt_add(self, other)

    def __mul__(self, scalar):
        return tt_scale(self, scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, TTState):
            return tt_apply(self, other)
        return tt_op_mul(self, other)


def tt_from_product(site_vectors):
    """Rank-1 state from one local vector per site."""
    cores = []
    for k, v in enumerate(site_vectors):
        v = np.asarray(v, dtype=np.complex128)
        if v.ndim != 1:
            raise ValueError(f"site {k}: expected a vector, got ndim {v.ndim}")
        if not np.any(v):
            raise ValueError(f"site {k}: zero local vector")
        cores.append(v.reshape(1, -1, 1))
    return TTState(cores)


def tt_zero(dims):
    """Rank-1 all-zero state."""
    return TTState([np.zeros((1, d, 1), dtype=np.complex128) for d in dims])


def tt_identity(dims):
    """Rank-1 identity operator."""
    return TTOperator(
        [np.eye(d, dtype=np.complex128).reshape(1, d, d, 1) for d in dims]
    )


def _check_same_kind(a, b):
    if type(a) is not type(b):
        raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")


def tt_add(a, b):
    """Sum of two trains of the same kind via rank-block concatenation."""
    _check_same_kind(a, b)
    n = a.n_site
    if n == 1:
        return type(a)([a.cores[0] + b.cores[0]])
    cores = []
    for k in range(n):
        ca, cb = a.cores[k], b.cores[k]
        rl = 1 if k == 0 else ca.shape[0] + cb.shape[0]
        rr = 1 if k == n - 1 else ca.shape[-1] + cb.shape[-1]
        shape = (rl,) + ca.shape[1:-1] + (rr,)
        c = np.zeros(shape, dtype=np.complex128)
        if k == 0:
            c[..., : ca.shape[-1]] = ca
            c[..., ca.shape[-1]:] = cb
        elif k == n - 1:
            c[: ca.shape[0]] = ca
            c[ca.shape[0]:] = cb
        else:
            c[: ca.shape[0], ..., : ca.shape[-1]] = ca
            c[ca.shape[0]:, ..., ca.shape[-1]:] = cb
        cores.append(c)
    return type(a)(cores)


def tt_scale(a, scalar):
    """Scalar multiple; the factor is absorbed into the first core."""
    cores = [c.copy() for c in a.cores]
    cores[0] = cores[0] * complex(scalar)
    return type(a)(cores)


def tt_inner(a, b):
    """Inner product <a|b> with the convention of conjugating ``a``."""
    if not isinstance(a, TTState) or not isinstance(b, TTState):
        raise TypeError("tt_inner expects two TTState arguments")
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    env = np.ones((1, 1), dtype=np.complex128)
    for ca, cb in zip(a.cores, b.cores):
        env = np.einsum("ab,aic,bid->cd", env, ca.conj(), cb, optimize=True)
    return complex(env[0, 0])


def tt_norm(a):
    """2-norm; operator cores are treated as vectors over merged indices."""
    if isinstance(a, TTOperator):
        a = TTState([c.reshape(c.shape[0], -1, c.shape[-1]) for c in a.cores])
    val = tt_inner(a, a).real
    return float(np.sqrt(max(val, 0.0)))


def tt_apply(op, x):
    """Apply an operator train to a state train; ranks multiply."""
    if not isinstance(op, TTOperator) or not isinstance(x, TTState):
        raise TypeError("tt_apply expects (TTOperator, TTState)")
    if op.dims != x.dims:
        raise ValueError(f"dimension mismatch: {op.dims} vs {x.dims}")
    cores = []
    for hc, xc in zip(op.cores, x.cores):
        y = np.einsum("aijb,cjd->acibd", hc, xc, optimize=True)
        r1 = hc.shape[0] * xc.shape[0]
        r2 = hc.shape[-1] * xc.shape[-1]
        cores.append(y.reshape(r1, hc.shape[1], r2))
    return TTState(cores)


def tt_op_mul(a, b):
    """Operator product ``a @ b`` as a train; ranks multiply."""
    if not isinstance(a, TTOperator) or not isinstance(b, TTOperator):
        raise TypeError("tt_op_mul expects two TTOperator arguments")
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    cores = []
    for ca, cb in zip(a.cores, b.cores):
        y = np.einsum("aijb,cjkd->acikbd", ca, cb, optimize=True)
        r1 = ca.shape[0] * cb.shape[0]
        r2 = ca.shape[-1] * cb.shape[-1]
        cores.append(y.reshape(r1, ca.shape[1], cb.shape[2], r2))
    return TTOperator(cores)


def tt_expect(op, x):
    """Sandwich <x|op|x> without forming the intermediate product state."""
    if op.dims != x.dims:
        raise ValueError(f"dimension mismatch: {op.dims} vs {x.dims}")
    env = np.ones((1, 1, 1), dtype=np.complex128)
    for xc, hc in zip(x.cores, op.cores):
        env = np.einsum(
            "ahb,aic,hijg,bjd->cgd", env, xc.conj(), hc, xc, optimize=True
        )
    return complex(env[0, 0, 0])


def tt_orthonormalize(x, direction="left"):
    """Return a gauge-equivalent state with orthonormal cores.

    ``left`` makes cores 0..N-2 left-orthonormal (norm carried by the last
    core), ``right`` makes cores 1..N-1 right-orthonormal.
    """
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    cores = [c.copy() for c in x.cores]
    n = len(cores)
    if direction == "left":
        for k in range(n - 1):
            rl, d, rr = cores[k].shape
            q, r = np.linalg.qr(cores[k].reshape(rl * d, rr))
            cores[k] = q.reshape(rl, d, q.shape[1])
            cores[k + 1] = np.einsum("ab,bic->aic", r, cores[k + 1])
    else:
        for k in range(n - 1, 0, -1):
            rl, d, rr = cores[k].shape
            q, r = np.linalg.qr(cores[k].reshape(rl, d * rr).conj().T)
            s = q.shape[1]
            cores[k] = q.conj().T.reshape(s, d, rr)
            cores[k - 1] = np.einsum("aib,bc->aic", cores[k - 1], r.conj().T)
    return TTState(cores)


def _select_rank(s, policy):
    if s.size == 0 or s[0] <= 0.0:
        return 1
    cut = max(policy.threshold, _SV_FLOOR) * s[0]
    keep = int(np.count_nonzero(s > cut))
    return max(1, min(keep, policy.max_rank))


def tt_truncate(x, policy):
    """Rank truncation by SVD sweeps; the result is right-orthonormalized.

    Keeps singular values strictly above ``threshold`` relative to the
    largest one at each cut, then clips to ``max_rank``.  Values below
    1e-14 of the largest are always dropped.  An all-zero input collapses
    to the rank-1 zero state.
    """
    if not isinstance(x, TTState):
        raise TypeError("tt_truncate expects a TTState")
    if all(not np.any(c) for c in x.cores):
        return tt_zero(x.dims)
    cores = list(tt_orthonormalize(x, "left").cores)
    cores = [c.copy() for c in cores]
    for k in range(len(cores) - 1, 0, -1):
        rl, d, rr = cores[k].shape
        u, s, vh = np.linalg.svd(cores[k].reshape(rl, d * rr), full_matrices=False)
        r = _select_rank(s, policy)
        cores[k] = vh[:r].reshape(r, d, rr)
        carry = u[:, :r] * s[:r]
        cores[k - 1] = np.einsum("aib,bc->aic", cores[k - 1], carry)
    return TTState(cores)


def _dense_size(dims, dense_cap):
    size = 1
    for d in dims:
        size *= int(d)
    if size > dense_cap:
        raise DenseCapExceeded(
            f"dense conversion needs a cap of at least {size} "
            f"(product of dims {tuple(dims)}), configured cap is {dense_cap}"
        )
    return size


def tt_to_dense(x, dense_cap=DENSE_CAP_DEFAULT):
    """Dense vector (state) or matrix (operator), site-major ordering."""
    size = _dense_size(x.dims, dense_cap)
    if isinstance(x, TTState):
        acc = x.cores[0].reshape(x.dims[0], -1)
        for core in x.cores[1:]:
            r, d, rr = core.shape
            acc = acc @ core.reshape(r, d * rr)
            acc = acc.reshape(-1, rr)
        return np.ascontiguousarray(acc.reshape(size))
    acc = x.cores[0][0]
    for core in x.cores[1:]:
        d = core.shape[1]
        acc = np.einsum("IJr,rijq->IiJjq", acc, core, optimize=True)
        acc = acc.reshape(acc.shape[0] * d, acc.shape[2] * d, -1)
    return np.ascontiguousarray(acc[:, :, 0])


def dense_to_tt(tensor, policy, dims=None, dense_cap=DENSE_CAP_DEFAULT):
    """Decompose a dense tensor into a state train by sequential SVDs.

    ``tensor`` is either shaped by site dims or a flat vector accompanied
    by ``dims``.
    """
    t = np.asarray(tensor, dtype=np.complex128)
    if dims is None:
        dims = t.shape
    dims = tuple(int(d) for d in dims)
    size = _dense_size(dims, dense_cap)
    if t.size != size:
        raise ValueError(f"tensor size {t.size} does not match dims {dims}")
    if not np.any(t):
        return tt_zero(dims)
    rest = t.reshape(dims[0], -1)
    r = 1
    cores = []
    for k in range(len(dims) - 1):
        u, s, vh = np.linalg.svd(rest, full_matrices=False)
        rk = _select_rank(s, policy)
        cores.append(u[:, :rk].reshape(r, dims[k], rk))
        rest = (s[:rk, None] * vh[:rk]).reshape(rk * dims[k + 1], -1)
        r = rk
    cores.append(rest.reshape(r, dims[-1], 1))
    return TTState(cores)


def random_tt(dims, rank, rng):
    """Random complex state with ranks clipped to the representable maximum."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    ranks = [1]
    for k in range(n - 1):
        left = int(np.prod(dims[: k + 1]))
        right = int(np.prod(dims[k + 1:]))
        ranks.append(min(int(rank), left, right))
    ranks.append(1)
    cores = []
    for k in range(n):
        shape = (ranks[k], dims[k], ranks[k + 1])
        cores.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return TTState(cores)


def tt_to_bytes(x):
    """Serialize a train: magic, version, N, dims, ranks, complex core data."""
    head = [_MAGIC, struct.pack("<H", _FORMAT_VERSION), struct.pack("<Q", x.n_site)]
    head.extend(struct.pack("<Q", d) for d in x.dims)
    head.extend(struct.pack("<Q", r) for r in x.ranks)
    body = [np.ascontiguousarray(c, dtype="<c16").tobytes() for c in x.cores]
    return b"".join(head + body)


def _parse_tt_header(data):
    if data[:4] != _MAGIC:
        raise ValueError("not a tensor-train checkpoint (bad magic)")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (n,) = struct.unpack_from("<Q", data, 6)
    off = 14
    dims = struct.unpack_from(f"<{n}Q", data, off)
    off += 8 * n
    ranks = struct.unpack_from(f"<{n + 1}Q", data, off)
    off += 8 * (n + 1)
    return n, dims, ranks, off


def _tt_from_bytes(data, order):
    n, dims, ranks, off = _parse_tt_header(data)
    cores = []
    for k in range(n):
        if order == 3:
            shape = (ranks[k], dims[k], ranks[k + 1])
        else:
            shape = (ranks[k], dims[k], dims[k], ranks[k + 1])
        count = int(np.prod(shape))
        core = np.frombuffer(data, dtype="<c16", count=count, offset=off)
        off += 16 * count
        cores.append(core.reshape(shape).astype(np.complex128))
    if off != len(data):
        raise ValueError("checkpoint size does not match its header")
    return (TTState if order == 3 else TTOperator)(cores)


def tt_state_from_bytes(data):
    return _tt_from_bytes(data, 3)


def tt_operator_from_bytes(data):
    return _tt_from_bytes(data, 4)


def save_tt(x, path):
    with open(path, "wb") as fh:
        fh.write(tt_to_bytes(x))


def load_tt_state(path):
    with open(path, "rb") as fh:
        return tt_state_from_bytes(fh.read())


def load_tt_operator(path):
    with open(path, "rb") as fh:
        return tt_operator_from_bytes(fh.read())
