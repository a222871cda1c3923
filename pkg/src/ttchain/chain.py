"""Chain topology, ladder operators and the supercore operator construction.

A nearest-neighbor operator sum over a chain,

    H = sum_i S_i  +  sum_i sum_lam L_{i,lam} (x) M_{i+1,lam}
        (+ wrap-around pairs M_{0,lam} ... L_{N-1,lam} for cyclic chains)

is assembled directly into a tensor-train operator whose cores hold the
single-site terms S, the coupling factors L and M and identities I in a
fixed block layout.  Interior operator ranks are 2 + xi (+ xi_wrap for
cyclic chains) where xi counts the coupling pairs crossing a cut.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tt import TTOperator


@dataclass(frozen=True)
class ChainSpec:
    """Topology of a chain: site count, boundary condition, homogeneity."""

    n_site: int
    periodic: bool = False
    homogen: bool = True

    def __post_init__(self):
        if int(self.n_site) < 2:
            raise ValueError(f"n_site must be >= 2, got {self.n_site}")

    @property
    def n_bond(self):
        return self.n_site if self.periodic else self.n_site - 1


def ladder_ops(n_dim):
    """Truncated oscillator ladder matrices on an ``n_dim`` local basis.

    Returns a dict with keys ``raise``, ``lower``, ``number``, ``position``
    and ``momentum``; position and momentum are in oscillator units,
    x = (raise + lower)/sqrt(2) and p = i (raise - lower)/sqrt(2).
    """
    if int(n_dim) < 2:
        raise ValueError(f"n_dim must be >= 2, got {n_dim}")
    d = int(n_dim)
    lower = np.zeros((d, d))
    k = np.arange(1, d)
    lower[k - 1, k] = np.sqrt(k)
    raise_ = lower.T.copy()
    number = raise_ @ lower
    position = (raise_ + lower) / np.sqrt(2.0)
    momentum = 1j * (raise_ - lower) / np.sqrt(2.0)
    return {
        "raise": raise_,
        "lower": lower,
        "number": number,
        "position": position,
        "momentum": momentum,
    }


class SlimParts:
    """Per-site pieces of a nearest-neighbor operator sum.

    ``s[i]`` is the single-site term at site i.  ``l[i][lam]`` acts on site
    i and pairs with ``m[i+1][lam]`` on site i+1; for cyclic chains
    ``l[-1]`` pairs with ``m[0]`` through the wrap-around bond.  On open
    chains ``l[-1]`` and ``m[0]`` must be empty.
    """

    def __init__(self, n_site, periodic, s, l, m):
        n_site = int(n_site)
        if not (len(s) == len(l) == len(m) == n_site):
            raise ValueError(
                f"need {n_site} entries per part, got "
                f"s:{len(s)} l:{len(l)} m:{len(m)}"
            )
        self.n_site = n_site
        self.periodic = bool(periodic)
        self.s = []
        self.l = []
        self.m = []
        for i in range(n_site):
            si = np.asarray(s[i], dtype=np.complex128)
            if si.ndim != 2 or si.shape[0] != si.shape[1]:
                raise ValueError(f"site {i}: S must be square, got {si.shape}")
            d = si.shape[0]
            li = [np.asarray(x, dtype=np.complex128) for x in l[i]]
            mi = [np.asarray(x, dtype=np.complex128) for x in m[i]]
            for tag, mats in (("L", li), ("M", mi)):
                for mat in mats:
                    if mat.shape != (d, d):
                        raise ValueError(
                            f"site {i}: {tag} shape {mat.shape} does not match "
                            f"local dim {d}"
                        )
            self.s.append(si)
            self.l.append(li)
            self.m.append(mi)
        if not self.periodic:
            if self.l[-1] or self.m[0]:
                raise ValueError(
                    "open chains must have empty l[-1] and m[0] (no wrap bond)"
                )
        for i in range(n_site - 1):
            if len(self.l[i]) != len(self.m[i + 1]):
                raise ValueError(
                    f"coupling count mismatch at cut {i}: "
                    f"{len(self.l[i])} L terms vs {len(self.m[i + 1])} M terms"
                )
        if self.periodic and len(self.l[-1]) != len(self.m[0]):
            raise ValueError(
                f"coupling count mismatch at the wrap bond: "
                f"{len(self.l[-1])} L terms vs {len(self.m[0])} M terms"
            )

    @classmethod
    def homogeneous(cls, n_site, periodic, s, l_list, m_list):
        """Broadcast one S and one list of (L, M) pairs to every site."""
        n_site = int(n_site)
        l = [list(l_list) for _ in range(n_site)]
        m = [list(m_list) for _ in range(n_site)]
        if not periodic:
            l[-1] = []
            m[0] = []
        return cls(n_site, periodic, [s] * n_site, l, m)

    @property
    def dims(self):
        return tuple(si.shape[0] for si in self.s)

    def xi(self, cut):
        """Number of coupling pairs crossing the cut after site ``cut``."""
        return len(self.l[cut % self.n_site])


def slim_to_tt(spec, parts):
    """Assemble the supercore tensor-train operator for ``parts``.

    The first core is the block row [S, L, I, M_wrap], middle cores carry
    the block matrix [[I,0,0,0],[M,0,0,0],[S,L,I,0],[0,0,0,J]] with J an
    identity on the wrap channels, and the last core is the block column
    [I, M, S, L_wrap].  Open chains drop the wrap blocks.
    """
    if spec.n_site != parts.n_site or spec.periodic != parts.periodic:
        raise ValueError(
            f"chain spec (n_site={spec.n_site}, periodic={spec.periodic}) does "
            f"not match parts (n_site={parts.n_site}, periodic={parts.periodic})"
        )
    n = parts.n_site
    dims = parts.dims
    wrap = len(parts.l[-1]) if parts.periodic else 0
    xi = [len(parts.l[i]) for i in range(n - 1)]
    ranks = [1] + [2 + xi[i] + wrap for i in range(n - 1)] + [1]

    eye = [np.eye(d, dtype=np.complex128) for d in dims]
    cores = []

    first = np.zeros((1, dims[0], dims[0], ranks[1]), dtype=np.complex128)
    first[0, :, :, 0] = parts.s[0]
    for lam, mat in enumerate(parts.l[0]):
        first[0, :, :, 1 + lam] = mat
    first[0, :, :, 1 + xi[0]] = eye[0]
    for w, mat in enumerate(parts.m[0]):
        first[0, :, :, 2 + xi[0] + w] = mat
    cores.append(first)

    for k in range(1, n - 1):
        rl, rr = ranks[k], ranks[k + 1]
        xin, xout = xi[k - 1], xi[k]
        core = np.zeros((rl, dims[k], dims[k], rr), dtype=np.complex128)
        core[0, :, :, 0] = eye[k]
        for lam, mat in enumerate(parts.m[k]):
            core[1 + lam, :, :, 0] = mat
        core[1 + xin, :, :, 0] = parts.s[k]
        for lam, mat in enumerate(parts.l[k]):
            core[1 + xin, :, :, 1 + lam] = mat
        core[1 + xin, :, :, 1 + xout] = eye[k]
        for w in range(wrap):
            core[2 + xin + w, :, :, 2 + xout + w] = eye[k]
        cores.append(core)

    last = np.zeros((ranks[n - 1], dims[-1], dims[-1], 1), dtype=np.complex128)
    last[0, :, :, 0] = eye[-1]
    for lam, mat in enumerate(parts.m[-1]):
        last[1 + lam, :, :, 0] = mat
    last[1 + xi[-1], :, :, 0] = parts.s[-1]
    for w, mat in enumerate(parts.l[-1] if parts.periodic else []):
        last[2 + xi[-1] + w, :, :, 0] = mat
    cores.append(last)
    return TTOperator(cores)
