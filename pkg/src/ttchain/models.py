"""Chain Hamiltonians: excitonic, phononic and coupled exciton-phonon models.

All quantities are in atomic units (hbar = 1).  Each model knows how to
produce its nearest-neighbor operator parts (see :mod:`ttchain.chain`), the
matching tensor-train operator, local observables, and whatever analytic
reference data exists for it.

Excitonic chains
    H = sum_i alpha_i b+_i b_i
      + sum_i beta_i (b+_i b_{i+1} + b_i b+_{i+1}) + eta

Phononic chains, first quantized,
    H = sum_i p_i^2 / (2 m_i) + 1/2 sum_i m_i nu_i^2 q_i^2
      + 1/2 sum_i mu_i omg_i^2 (q_i - q_{i+1})^2

are rewritten with site-local oscillators of effective frequency

    nu_eff_i^2 = nu_i^2 + m_{i-1}/(m_i + m_{i-1}) omg_{i-1}^2
                        + m_{i+1}/(m_i + m_{i+1}) omg_i^2

which leaves a bilinear position coupling with strength

    omg_eff_i = mu_i omg_i^2 / (2 sqrt(m_i nu_eff_i m_{i+1} nu_eff_{i+1})).

The coupled model adds exciton-phonon terms with site (chi), symmetric and
antisymmetric position (rho, sig) and pair-distance (tau) couplings; their
second-quantized coefficients divide by sqrt(2 m nu_eff) of the position
factor involved.
"""

from __future__ import annotations

import heapq

import numpy as np

from .chain import ChainSpec, SlimParts, ladder_ops, slim_to_tt
from .errors import UnsupportedModelError


def _site_list(value, chain, name):
    n = chain.n_site
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name}: expected a scalar or {n} site values, got shape {arr.shape}")
    if chain.homogen and not np.all(arr == arr[0]):
        raise ValueError(f"{name}: non-uniform values on a homogeneous chain")
    return arr.copy()


def _bond_list(value, chain, name):
    nb = chain.n_bond
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(nb, float(arr))
    if arr.shape != (nb,):
        raise ValueError(f"{name}: expected a scalar or {nb} bond values, got shape {arr.shape}")
    if chain.homogen and not np.all(arr == arr[0]):
        raise ValueError(f"{name}: non-uniform values on a homogeneous chain")
    return arr.copy()


class ExcitonModel:
    """Tight-binding excitations on a chain with hard local truncation."""

    kind = "exciton"

    def __init__(self, chain, alpha, beta, eta=0.0):
        self.chain = chain
        self.alphas = _site_list(alpha, chain, "alpha")
        self.betas = _bond_list(beta, chain, "beta")
        self.eta = float(eta)

    def slim_parts(self, n_dim=2):
        n = self.chain.n_site
        ops = ladder_ops(n_dim)
        up, dn, num = ops["raise"], ops["lower"], ops["number"]
        eye = np.eye(n_dim)
        s = [self.alphas[i] * num + (self.eta / n) * eye for i in range(n)]
        l = [[] for _ in range(n)]
        m = [[] for _ in range(n)]
        for b in range(self.chain.n_bond):
            l[b] = [self.betas[b] * up, self.betas[b] * dn]
            m[(b + 1) % n] = [dn, up]
        return SlimParts(n, self.chain.periodic, s, l, m)

    def to_operator(self, n_dim=2, qtt=False):
        if qtt:
            raise NotImplementedError("quantized local dimensions are not supported")
        return slim_to_tt(self.chain, self.slim_parts(n_dim))

    def hop_matrix(self):
        """Single-excitation hopping matrix (tridiagonal, circulant if cyclic)."""
        n = self.chain.n_site
        h = np.zeros((n, n))
        h[np.arange(n), np.arange(n)] = self.alphas
        for b in range(self.chain.n_bond):
            j = (b + 1) % n
            h[b, j] += self.betas[b]
            h[j, b] += self.betas[b]
        return h

    def exact_levels(self, n_levels, two_quanta=True):
        """Analytic spectrum for homogeneous chains.

        Ground level eta, the N single-excitation levels, and for cyclic
        chains (``two_quanta``) the N(N-1)/2 two-excitation levels obtained
        from pair sums over momenta shifted by half a lattice unit.
        """
        if not self.chain.homogen:
            raise UnsupportedModelError("analytic levels need a homogeneous chain")
        n = self.chain.n_site
        levels = [self.eta]
        levels.extend(self.eta + np.linalg.eigvalsh(self.hop_matrix()))
        if self.chain.periodic and two_quanta:
            alpha, beta = self.alphas[0], self.betas[0]
            k = (2.0 * np.arange(n) + 1.0) * np.pi / n
            eps = alpha + 2.0 * beta * np.cos(k)
            for a in range(n):
                for b in range(a + 1, n):
                    levels.append(self.eta + eps[a] + eps[b])
        levels = np.sort(np.asarray(levels))
        return levels[: int(n_levels)]

    def site_observables(self, n_dim=2):
        num = ladder_ops(n_dim)["number"]
        return {"qnum": [num] * self.chain.n_site}

    def energy_components(self, n_dim=2):
        return {"total": self.to_operator(n_dim)}

    def fundamental_vectors(self, n_dim=2):
        ground = np.zeros(n_dim, dtype=complex)
        ground[0] = 1.0
        excited = np.zeros(n_dim, dtype=complex)
        excited[1] = 1.0
        return ground, excited


class PhononModel:
    """Harmonic lattice vibrations with site and bond restoring forces."""

    kind = "phonon"

    def __init__(self, chain, mass, nu, omg):
        self.chain = chain
        self.masses = _site_list(mass, chain, "mass")
        self.nus = _site_list(nu, chain, "nu")
        self.omgs = _bond_list(omg, chain, "omg")
        if np.any(self.masses <= 0.0):
            raise ValueError("mass: all site masses must be positive")
        if np.any(self.nus < 0.0) or np.any(self.omgs < 0.0):
            raise ValueError("nu/omg: frequencies must be non-negative")
        self.mu = np.array(
            [
                self.masses[b] * self.masses[(b + 1) % chain.n_site]
                / (self.masses[b] + self.masses[(b + 1) % chain.n_site])
                for b in range(chain.n_bond)
            ]
        )
        self.nu_eff = self._effective_site_frequencies()
        self.omg_eff = self._effective_bond_couplings()

    def _effective_site_frequencies(self):
        n = self.chain.n_site
        val = self.nus**2
        for b in range(self.chain.n_bond):
            i, j = b, (b + 1) % n
            frac = self.omgs[b] ** 2 / (self.masses[i] + self.masses[j])
            val[i] += self.masses[j] * frac
            val[j] += self.masses[i] * frac
        if np.any(val <= 0.0):
            raise ValueError("effective site frequencies must be positive; "
                             "a free chain cannot be quantized site-locally")
        return np.sqrt(val)

    def _effective_bond_couplings(self):
        n = self.chain.n_site
        out = np.empty(self.chain.n_bond)
        for b in range(self.chain.n_bond):
            j = (b + 1) % n
            out[b] = self.mu[b] * self.omgs[b] ** 2 / (
                2.0 * np.sqrt(self.masses[b] * self.nu_eff[b] * self.masses[j] * self.nu_eff[j])
            )
        return out

    def slim_parts(self, n_dim):
        n = self.chain.n_site
        ops = ladder_ops(n_dim)
        num = ops["number"]
        x = ops["raise"] + ops["lower"]
        eye = np.eye(n_dim)
        s = [self.nu_eff[i] * (num + 0.5 * eye) for i in range(n)]
        l = [[] for _ in range(n)]
        m = [[] for _ in range(n)]
        for b in range(self.chain.n_bond):
            l[b] = [-self.omg_eff[b] * x]
            m[(b + 1) % n] = [x.copy()]
        return SlimParts(n, self.chain.periodic, s, l, m)

    def to_operator(self, n_dim, qtt=False):
        if qtt:
            raise NotImplementedError("quantized local dimensions are not supported")
        return slim_to_tt(self.chain, self.slim_parts(n_dim))

    # -- classical side -------------------------------------------------

    def potential(self, q):
        q = np.asarray(q, dtype=float)
        val = 0.5 * np.sum(self.masses * self.nus**2 * q**2)
        for b in range(self.chain.n_bond):
            j = (b + 1) % self.chain.n_site
            val += 0.5 * self.mu[b] * self.omgs[b] ** 2 * (q[b] - q[j]) ** 2
        return float(val)

    def kinetic(self, p):
        p = np.asarray(p, dtype=float)
        return float(0.5 * np.sum(p**2 / self.masses))

    def force(self, q):
        q = np.asarray(q, dtype=float)
        f = -self.masses * self.nus**2 * q
        for b in range(self.chain.n_bond):
            j = (b + 1) % self.chain.n_site
            df = self.mu[b] * self.omgs[b] ** 2 * (q[j] - q[b])
            f[b] += df
            f[j] -= df
        return f

    def hess_pot(self):
        n = self.chain.n_site
        k = np.diag(self.masses * self.nus**2)
        for b in range(self.chain.n_bond):
            j = (b + 1) % n
            c = self.mu[b] * self.omgs[b] ** 2
            k[b, b] += c
            k[j, j] += c
            k[b, j] -= c
            k[j, b] -= c
        return k

    def hess_kin(self):
        return np.diag(1.0 / self.masses)

    def normal_modes(self):
        """Frequencies and mass-weighted modes of the harmonic lattice.

        Returns ``(omega, modes)`` where ``omega`` is ascending and column k
        of ``modes`` is the mass-weighted eigenvector of mode k.  Raises on
        unstable (negative-curvature) lattices; zero modes are kept.
        """
        root_minv = np.diag(1.0 / np.sqrt(self.masses))
        kw = root_minv @ self.hess_pot() @ root_minv
        w2, modes = np.linalg.eigh((kw + kw.T) / 2.0)
        scale = max(np.max(np.abs(w2)), 1.0)
        if np.any(w2 < -1e-12 * scale):
            raise ValueError(f"unstable lattice: negative curvature {w2.min()}")
        return np.sqrt(np.clip(w2, 0.0, None)), modes

    def exact_levels(self, n_levels):
        """Lowest harmonic levels sum_k (n_k + 1/2) Omega_k, ascending."""
        if not self.chain.homogen:
            raise UnsupportedModelError("analytic levels need a homogeneous chain")
        omega, _ = self.normal_modes()
        ground = 0.5 * float(np.sum(omega))
        start = (0,) * len(omega)
        heap = [(ground, start)]
        seen = {start}
        levels = []
        while heap and len(levels) < int(n_levels):
            energy, occ = heapq.heappop(heap)
            levels.append(energy)
            for k, w in enumerate(omega):
                nxt = occ[:k] + (occ[k] + 1,) + occ[k + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (energy + w, nxt))
        return np.asarray(levels)

    # -- local operators ------------------------------------------------

    def position_matrix(self, site, n_dim):
        """Physical displacement operator of one site on its local basis."""
        ops = ladder_ops(n_dim)
        return (ops["raise"] + ops["lower"]) / np.sqrt(
            2.0 * self.masses[site] * self.nu_eff[site]
        )

    def momentum_matrix(self, site, n_dim):
        ops = ladder_ops(n_dim)
        return 1j * (ops["raise"] - ops["lower"]) * np.sqrt(
            self.masses[site] * self.nu_eff[site] / 2.0
        )

    def site_observables(self, n_dim):
        n = self.chain.n_site
        num = ladder_ops(n_dim)["number"]
        return {
            "qnum": [num] * n,
            "position": [self.position_matrix(i, n_dim) for i in range(n)],
            "momentum": [self.momentum_matrix(i, n_dim) for i in range(n)],
        }

    def energy_components(self, n_dim):
        return {"total": self.to_operator(n_dim)}

    def fundamental_vectors(self, n_dim):
        ground = np.zeros(n_dim, dtype=complex)
        ground[0] = 1.0
        excited = np.zeros(n_dim, dtype=complex)
        excited[1] = 1.0
        return ground, excited

    def coherent_zeta(self, displace):
        """Displacement amplitudes zeta_i = <R_i> sqrt(m_i nu_eff_i / 2)."""
        n = self.chain.n_site
        arr = np.asarray(displace, dtype=float)
        if arr.ndim == 0:
            arr = np.full(n, float(arr))
        if arr.shape != (n,):
            raise ValueError(f"displace: expected a scalar or {n} values, got shape {arr.shape}")
        return arr * np.sqrt(self.masses * self.nu_eff / 2.0)


class CoupledModel:
    """Excitons dressed with lattice vibrations through local couplings.

    Site local spaces are products (exciton factor slow, phonon factor
    fast).  The coupling constants: chi scales b+b R on one site, rho and
    sig couple b+b to the neighbor-distance and to the transversal
    difference R_{i+1} - R_{i-1}, and tau scales the hop pair with the bond
    stretch.  On open chains terms referencing a missing neighbor are
    dropped.
    """

    kind = "coupled"

    def __init__(self, chain, alpha, beta, eta, mass, nu, omg,
                 chi=0.0, rho=0.0, sig=0.0, tau=0.0):
        self.chain = chain
        self.exciton = ExcitonModel(chain, alpha, beta, eta)
        self.phonon = PhononModel(chain, mass, nu, omg)
        self.chis = _site_list(chi, chain, "chi")
        self.rhos = _bond_list(rho, chain, "rho")
        self.sigs = _bond_list(sig, chain, "sig")
        self.taus = _bond_list(tau, chain, "tau")
        if chain.periodic and chain.n_site < 3 and (
            np.any(self.sigs != 0.0) or np.any(self.taus != 0.0)
        ):
            raise ValueError("cyclic chains with sig or tau couplings need n_site >= 3")
        self._derive_bars()

    def _derive_bars(self):
        n = self.chain.n_site
        m, nu_eff = self.phonon.masses, self.phonon.nu_eff
        root = np.sqrt(2.0 * m * nu_eff)

        self.chi_bar = self.chis / root
        nb = self.chain.n_bond
        self.rho_bar = np.zeros(nb)
        self.rho_bbar = np.zeros(nb)
        self.tau_bar = np.zeros(nb)
        self.tau_bbar = np.zeros(nb)
        for b in range(nb):
            j = (b + 1) % n
            self.rho_bar[b] = self.rhos[b] / root[j]
            self.rho_bbar[b] = self.rhos[b] / root[b]
            self.tau_bar[b] = self.taus[b] / root[j]
            self.tau_bbar[b] = self.taus[b] / root[b]

        # sig acts per site; bond-length input covers sites 0..n_bond-1 and a
        # missing last entry on open chains is treated as zero.
        self.sig_site = np.zeros(n)
        self.sig_site[: nb] = self.sigs
        self.sig_bar = np.zeros(n)
        self.sig_bbar = np.zeros(n)
        for i in range(n):
            if self.chain.periodic or i + 1 < n:
                self.sig_bar[i] = self.sig_site[i] / root[(i + 1) % n]
            if self.chain.periodic or i - 1 >= 0:
                self.sig_bbar[i] = self.sig_site[i] / root[(i - 1) % n]

    def dims(self, n_dims):
        dx, dp = (int(n_dims), int(n_dims)) if np.isscalar(n_dims) else (
            int(n_dims[0]), int(n_dims[1])
        )
        return dx, dp

    def _site_coupling_coeff(self, i):
        """Weight of the local n (c+ + c) term: chi minus the rho back-action."""
        coeff = self.chi_bar[i]
        if self.chain.periodic or i < self.chain.n_site - 1:
            coeff -= self.rho_bbar[i % self.chain.n_bond]
        return coeff

    def slim_parts(self, n_dims):
        dx, dp = self.dims(n_dims)
        ex_ops = ladder_ops(dx)
        ph_ops = ladder_ops(dp)
        up, dn, num = ex_ops["raise"], ex_ops["lower"], ex_ops["number"]
        x = ph_ops["raise"] + ph_ops["lower"]
        ex_eye, ph_eye = np.eye(dx), np.eye(dp)

        ex_parts = self.exciton.slim_parts(dx)
        ph_parts = self.phonon.slim_parts(dp)
        n = self.chain.n_site

        s, l, m = [], [], []
        for i in range(n):
            si = np.kron(ex_parts.s[i], ph_eye) + np.kron(ex_eye, ph_parts.s[i])
            si = si + self._site_coupling_coeff(i) * np.kron(num, x)
            s.append(si)
            l.append([])
            m.append([])

        for b in range(self.chain.n_bond):
            j = (b + 1) % n
            l[b] = [
                np.kron(mat, ph_eye) for mat in ex_parts.l[b]
            ] + [
                np.kron(ex_eye, mat) for mat in ph_parts.l[b]
            ] + [
                (self.rho_bar[b] + self.sig_bar[b]) * np.kron(num, ph_eye),
                -np.kron(ex_eye, x),
                self.tau_bar[b] * np.kron(up, ph_eye),
                -self.tau_bbar[b] * np.kron(up, x),
                self.tau_bar[b] * np.kron(dn, ph_eye),
                -self.tau_bbar[b] * np.kron(dn, x),
            ]
            m[j] = [
                np.kron(mat, ph_eye) for mat in ex_parts.m[j]
            ] + [
                np.kron(ex_eye, mat) for mat in ph_parts.m[j]
            ] + [
                np.kron(ex_eye, x),
                self.sig_bbar[j] * np.kron(num, ph_eye),
                np.kron(dn, x),
                np.kron(dn, ph_eye),
                np.kron(up, x),
                np.kron(up, ph_eye),
            ]
        return SlimParts(n, self.chain.periodic, s, l, m)

    def to_operator(self, n_dims, qtt=False):
        if qtt:
            raise NotImplementedError("quantized local dimensions are not supported")
        return slim_to_tt(self.chain, self.slim_parts(n_dims))

    def energy_components(self, n_dims):
        """Separate exciton, phonon and coupling operators on the product space."""
        dx, dp = self.dims(n_dims)
        ex_parts = self.exciton.slim_parts(dx)
        ph_parts = self.phonon.slim_parts(dp)
        ph_eye, ex_eye = np.eye(dp), np.eye(dx)
        n = self.chain.n_site

        def lift(parts, left):
            s, l, m = [], [], []
            for i in range(n):
                if left:
                    s.append(np.kron(parts.s[i], ph_eye))
                    l.append([np.kron(mat, ph_eye) for mat in parts.l[i]])
                    m.append([np.kron(mat, ph_eye) for mat in parts.m[i]])
                else:
                    s.append(np.kron(ex_eye, parts.s[i]))
                    l.append([np.kron(ex_eye, mat) for mat in parts.l[i]])
                    m.append([np.kron(ex_eye, mat) for mat in parts.m[i]])
            return SlimParts(n, self.chain.periodic, s, l, m)

        dx_ops, dp_ops = ladder_ops(dx), ladder_ops(dp)
        num = dx_ops["number"]
        x = dp_ops["raise"] + dp_ops["lower"]
        full = self.slim_parts(n_dims)
        coupling_s = [
            self._site_coupling_coeff(i) * np.kron(num, x) for i in range(n)
        ]
        coupling_l = [
            full.l[i][len(ex_parts.l[i]) + len(ph_parts.l[i]):] for i in range(n)
        ]
        coupling_m = [
            full.m[i][len(ex_parts.m[i]) + len(ph_parts.m[i]):] for i in range(n)
        ]
        coupling = SlimParts(n, self.chain.periodic, coupling_s, coupling_l, coupling_m)
        return {
            "exciton": slim_to_tt(self.chain, lift(ex_parts, True)),
            "phonon": slim_to_tt(self.chain, lift(ph_parts, False)),
            "coupling": slim_to_tt(self.chain, coupling),
        }

    # -- mean-field interface -------------------------------------------

    def require_sigma_only(self):
        if np.any(self.chis != 0.0) or np.any(self.rhos != 0.0) or np.any(self.taus != 0.0):
            raise UnsupportedModelError(
                "mean-field dynamics supports only the sig coupling; "
                "chi, rho and tau must vanish"
            )

    def qu_coupling(self, q):
        """Site energies sig_i (q_{i+1} - q_{i-1}); missing neighbors drop."""
        n = self.chain.n_site
        q = np.asarray(q, dtype=float)
        out = np.zeros(n)
        for i in range(n):
            if self.chain.periodic or i + 1 < n:
                out[i] += self.sig_site[i] * q[(i + 1) % n]
            if self.chain.periodic or i - 1 >= 0:
                out[i] -= self.sig_site[i] * q[(i - 1) % n]
        return out

    def cl_coupling(self, a):
        """Forces on the lattice from the excitation density |a_i|^2."""
        n = self.chain.n_site
        dens = np.abs(np.asarray(a)) ** 2
        f = np.zeros(n)
        for i in range(n):
            if self.chain.periodic or i - 1 >= 0:
                f[i] -= self.sig_site[(i - 1) % n] * dens[(i - 1) % n]
            if self.chain.periodic or i + 1 < n:
                f[i] += self.sig_site[(i + 1) % n] * dens[(i + 1) % n]
        return f

    # -- local observables ----------------------------------------------

    def site_observables(self, n_dims):
        dx, dp = self.dims(n_dims)
        n = self.chain.n_site
        ex_num = ladder_ops(dx)["number"]
        ph_num = ladder_ops(dp)["number"]
        ex_eye, ph_eye = np.eye(dx), np.eye(dp)
        return {
            "qnum_ex": [np.kron(ex_num, ph_eye)] * n,
            "qnum_ph": [np.kron(ex_eye, ph_num)] * n,
            "position": [
                np.kron(ex_eye, self.phonon.position_matrix(i, dp)) for i in range(n)
            ],
            "momentum": [
                np.kron(ex_eye, self.phonon.momentum_matrix(i, dp)) for i in range(n)
            ],
        }

    def fundamental_vectors(self, n_dims):
        dx, dp = self.dims(n_dims)
        ground = np.zeros(dx * dp, dtype=complex)
        ground[0] = 1.0
        excited = np.zeros(dx * dp, dtype=complex)
        excited[dp] = 1.0
        return ground, excited
