"""Closed-form reference results for the projected Jaynes-Cummings generator.

Everything here is computed from formulas (or from small matrices assembled by
hand from the action of ``QLQ`` on a hand-picked basis) and never from the
dense superoperators in :mod:`nzqlq.liouville`; tests compare the two routes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import JCParams, LadderSpec, thermal_weights

SQRT2 = np.sqrt(2.0)


# ------------------------------------------------------- vacuum spectrum

@dataclass(frozen=True)
class VacuumSpectrum:
    n_max: int
    couplings: np.ndarray   # a_n, n = 1..N
    detunings: np.ndarray   # Delta_n, n = 1..N

    @property
    def zero_multiplicity(self) -> int:
        return 2 * self.n_max

    @property
    def positive(self) -> np.ndarray:
        """``sqrt(Delta_n^2 + 2 a_n)`` for n = 1..N."""
        return np.sqrt(self.detunings ** 2 + 2 * self.couplings)

    @property
    def nonzero(self) -> np.ndarray:
        lam = self.positive
        return np.sort(np.concatenate([-lam, lam]))

    def multiset(self) -> np.ndarray:
        """All ``4N`` eigenvalues of the Delta-N = 0 block restricted to range(Q)."""
        return np.sort(np.concatenate([np.zeros(self.zero_multiplicity), self.nonzero]))


def vacuum_spectrum(n_max: int, g: float, delta: float = 0.0) -> VacuumSpectrum:
    n = np.arange(1, n_max + 1)
    a = 2 * n * g ** 2
    a[0] = g ** 2
    return VacuumSpectrum(n_max, a.astype(float), np.full(n_max, float(delta)))


def theorem3_spectrum(spec: LadderSpec) -> VacuumSpectrum:
    """Generalised ladder: ``a_1 = |v_1|^2``, ``a_n = 2|v_n|^2``, per-n detuning."""
    a = 2 * np.abs(spec.v) ** 2
    a[0] = np.abs(spec.v[0]) ** 2
    return VacuumSpectrum(spec.n_max, a, spec.detunings)


def dressed_splitting(n: int, g: float, delta: float = 0.0) -> float:
    """Bare JC splitting of the n-excitation doublet."""
    return float(np.sqrt(delta ** 2 + 4 * n * g ** 2))


# ------------------------------------------------- Delta-N = 0 D/O basis

def delta0_basis_labels(n_max: int) -> list[str]:
    """Order used for the ``4N`` coordinates: ``Dg1, De1, ..., DgN, DeN, O1, O1', ...``."""
    lab = []
    for n in range(1, n_max + 1):
        lab += [f"Dg{n}", f"De{n}"]
    for n in range(1, n_max + 1):
        lab += [f"O{n}", f"O'{n}"]
    return lab


def delta0_generator(n_max: int, g: float, delta: float = 0.0) -> np.ndarray:
    """``QLQ`` on the Delta-N = 0 part of range(Q) in D/O coordinates (vacuum bath).

    Columns hold the expansion of ``QLQ|b_j>`` in the (non-orthonormal) basis
    ``D_{g,n} = |g,n><g,n| - |g,0><g,0|``, ``D_{e,n} = |e,n><e,n| - |e,0><e,0|``,
    ``O_n = |e,n-1><g,n|``, ``O'_n = |g,n><e,n-1|``.
    """
    N = n_max
    M = np.zeros((4 * N, 4 * N))
    dg = lambda n: 2 * (n - 1)
    de = lambda n: 2 * (n - 1) + 1
    o = lambda n: 2 * N + 2 * (n - 1)
    op = lambda n: 2 * N + 2 * (n - 1) + 1
    for n in range(1, N + 1):
        c = g * np.sqrt(n)
        M[o(n), dg(n)] += c
        M[op(n), dg(n)] -= c
        M[o(1), de(n)] += g
        M[op(1), de(n)] -= g
        if n < N:
            c1 = g * np.sqrt(n + 1)
            M[o(n + 1), de(n)] -= c1
            M[op(n + 1), de(n)] += c1
        M[o(n), o(n)] = delta
        M[op(n), op(n)] = -delta
        M[dg(n), o(n)] += c
        M[dg(n), op(n)] -= c
        if n >= 2:
            M[de(n - 1), o(n)] -= c
            M[de(n - 1), op(n)] += c
    return M


def delta0_basis_vectors(n_max: int) -> np.ndarray:
    """Column-stacked Liouville vectors of the D/O basis (``d^2 x 4N``)."""
    from .model import index
    d = 2 * (n_max + 1)
    B = np.zeros((d * d, 4 * n_max))
    pos = lambda i, j: i + d * j
    for n in range(1, n_max + 1):
        k = 2 * (n - 1)
        B[pos(index(0, n), index(0, n)), k] = 1
        B[pos(index(0, 0), index(0, 0)), k] = -1
        B[pos(index(1, n), index(1, n)), k + 1] = 1
        B[pos(index(1, 0), index(1, 0)), k + 1] = -1
        B[pos(index(1, n - 1), index(0, n)), 2 * n_max + k] = 1
        B[pos(index(0, n), index(1, n - 1)), 2 * n_max + k + 1] = 1
    return B


@dataclass
class ClosedFormMetric:
    n_max: int
    eigenvalues: np.ndarray     # +-lambda_n, paired with columns below
    right: np.ndarray           # 4N x 2N
    left: np.ndarray            # 4N x 2N, <l_i|r_j> = delta_ij
    eta: np.ndarray
    kappa: float
    max_residual: float
    biorth_residual: float


def closed_form_metric_delta0(n_max: int, g: float = 1.0) -> ClosedFormMetric:
    """Explicit Delta-N = 0 eigenvectors at resonance and the metric they span."""
    N = n_max
    if N < 1:
        raise ValueError("n_max must be >= 1")
    M = delta0_generator(N, g)
    M12 = M[: 2 * N, 2 * N:]
    M21 = M[2 * N:, : 2 * N]
    lam = vacuum_spectrum(N, g).positive

    def pair(n):
        v = np.zeros(2 * N)
        v[2 * (n - 1)] = 1.0
        v[2 * (n - 1) + 1] = -1.0
        return v

    ys, us = [], []
    for n0 in range(1, N + 1):
        if n0 == 1:
            y = pair(1)
            u = sum(np.sqrt(m) / (2 * m - 1) * -pair(m) for m in range(1, N + 1))
        else:
            y = np.sqrt(n0) / (2 * n0 - 1) * pair(1) - pair(n0)
            u = -pair(n0)
        ys.append(y)
        us.append(u)

    eigs, R, L = [], [], []
    for n0 in range(N):
        for sign in (1.0, -1.0):
            z = sign * lam[n0]
            r = np.concatenate([M12 @ ys[n0] / z, ys[n0]])
            l = np.concatenate([M21.T @ us[n0] / z, us[n0]])
            l = l / (l @ r)
            eigs.append(z)
            R.append(r)
            L.append(l)
    R = np.array(R).T
    L = np.array(L).T
    eigs = np.array(eigs)
    res = max(np.linalg.norm(M @ R - R * eigs), np.linalg.norm(M.T @ L - L * eigs))
    biorth = float(np.abs(L.T @ R - np.eye(2 * N)).max())
    eta = L @ L.T
    ev = np.linalg.eigvalsh(eta)[::-1][: 2 * N]
    return ClosedFormMetric(N, eigs, R, L, eta, float(ev[0] / ev[-1]), float(res), biorth)


# ------------------------------------------------------- secular solvers

def _bisect(f, lo: float, hi: float, tol: float = 1e-13, maxiter: int = 200) -> float:
    """Root of an increasing function with ``f(lo) < 0 < f(hi)``."""
    flo = f(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


@dataclass
class ThermalReduction:
    beta: float
    g: float
    delta: float
    p: np.ndarray             # mode weights p_0..p_N
    q: np.ndarray             # q_k, k = 1..N
    roots: np.ndarray         # lambda_k, k = 1..N

    @property
    def n_max(self) -> int:
        return self.q.size

    @property
    def K(self) -> np.ndarray:
        """``K_ij = i delta_ij - q_i sqrt(i j)``."""
        i = np.arange(1, self.n_max + 1, dtype=float)
        return np.diag(i) - self.q[:, None] * np.sqrt(np.outer(i, i))

    @property
    def v_tilde(self) -> np.ndarray:
        return np.sqrt(self.q * np.arange(1, self.n_max + 1))

    @property
    def K_sym(self) -> np.ndarray:
        v = self.v_tilde
        return np.diag(np.arange(1.0, self.n_max + 1)) - np.outer(v, v)

    def secular(self, lam: float) -> float:
        i = np.arange(1, self.n_max + 1)
        return float(np.sum(self.q * i / (i - lam)))

    @property
    def f0(self) -> float:
        return float(self.q.sum())

    @property
    def positive(self) -> np.ndarray:
        return np.sqrt(self.delta ** 2 + 4 * self.g ** 2 * self.roots)

    @property
    def nonzero(self) -> np.ndarray:
        lam = self.positive
        return np.sort(np.concatenate([-lam, lam]))

    def interlacing_ok(self) -> bool:
        k = np.arange(1, self.n_max + 1)
        return bool(np.all(self.roots > k - 1) and np.all(self.roots < k))


def thermal_reduction(beta: float, omega_c: float, g: float, n_max: int,
                      delta: float = 0.0, offset: float = 1e-12,
                      tol: float = 1e-13) -> ThermalReduction:
    """Reduced ``N x N`` problem of the thermal Delta-N = 0 sector.

    Roots of ``sum_i q_i i / (i - lambda) = 1`` are bracketed one per unit
    interval. ``beta = inf`` gives the vacuum limit, where channels with
    ``q_k = 0`` decouple and their root sits exactly on the pole ``k``.
    """
    if beta is None or not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p = thermal_weights(beta, omega_c, n_max)
    q = 0.5 * (p[1:] + p[:-1])
    i = np.arange(1, n_max + 1, dtype=float)
    w = q * i

    def f(lam):
        return float(np.sum(w / (i - lam))) - 1.0

    roots = np.empty(n_max)
    for k in range(1, n_max + 1):
        if w[k - 1] == 0.0:
            roots[k - 1] = k
            continue
        lo = 0.0 if k == 1 else k - 1 + offset
        if k > 1 and w[k - 2] == 0.0:
            # no pole on the left: the root may sit arbitrarily close to k-1
            lo = k - 1.0
        hi = k - offset
        roots[k - 1] = _bisect(f, lo, hi, tol)
    return ThermalReduction(float(beta), float(g), float(delta), p, q, roots)


# ---------------------------------------------- Delta-N = +1 rank-one problem

def dressed_manifolds(params: JCParams):
    """Eigenpairs of every excitation manifold of the truncated JC Hamiltonian.

    Returns a list indexed by excitation number ``r = 0..N+1``; each entry is
    ``(energies, vectors, states)`` with ``states`` the ``(s, n)`` labels the
    vector components refer to.
    """
    N = params.n_max
    w0, wc, g = params.omega0, params.omega_c, params.g
    out = []
    for r in range(N + 2):
        states = []
        if r <= N:
            states.append((0, r))
        if r >= 1:
            states.append((1, r - 1))
        h = np.diag([wc * n + (w0 / 2 if s else -w0 / 2) for s, n in states])
        if len(states) == 2:
            h[0, 1] = h[1, 0] = g * np.sqrt(r)
        E, V = np.linalg.eigh(h)
        out.append((E, V, states))
    return out


@dataclass
class SecularResult:
    poles: np.ndarray         # distinct poles carrying positive residue
    residues: np.ndarray      # merged residues R_a
    zeros: np.ndarray         # one per gap (d_a, d_{a+1})
    raw_poles: np.ndarray
    raw_residues: np.ndarray

    def __call__(self, z: complex):
        return np.sum(self.residues / (self.poles - z))


def m1_secular_zeros(params: JCParams, beta: float | None = None,
                     merge_tol: float = 1e-12, residue_tol: float = 1e-14,
                     offset: float = 1e-12, tol: float = 1e-13) -> SecularResult:
    """Zeros of ``F_+(z) = sum r / (d - z)`` for the Delta-N = +1 sector."""
    p = thermal_weights(np.inf if beta is None else beta, params.omega_c, params.n_max)
    man = dressed_manifolds(params)
    poles, res = [], []
    for k in range(params.n_max + 1):
        Eu, Vu, su = man[k + 1]
        El, Vl, sl = man[k]
        ie = su.index((1, k))
        ig = sl.index((0, k))
        for a in range(len(Eu)):
            for b in range(len(El)):
                poles.append(Eu[a] - El[b])
                res.append(p[k] * (Vu[ie, a] * Vl[ig, b]) ** 2)
    poles, res = np.array(poles), np.array(res)
    order = np.argsort(poles)
    poles, res = poles[order], res[order]
    scale = max(1.0, float(np.abs(poles).max()))
    d, R = [], []
    for x, r in zip(poles, res):
        if d and x - d[-1] < merge_tol * scale:
            R[-1] += r
        else:
            d.append(x)
            R.append(r)
    d, R = np.array(d), np.array(R)
    keep = R > residue_tol
    d, R = d[keep], R[keep]

    def f(z):
        return float(np.sum(R / (d - z)))

    zeros = np.array([_bisect(f, d[a] + offset, d[a + 1] - offset, tol)
                      for a in range(len(d) - 1)])
    return SecularResult(d, R, zeros, poles, res)


# ------------------------------------------------------ assorted constants

def bare_resonance_bound(n_max) -> float:
    """``g_c(N) = 2 / (sqrt N + sqrt(N - 2))``."""
    N = np.asarray(n_max, dtype=float)
    if np.any(N < 2):
        raise ValueError("bound needs n_max >= 2")
    return 2.0 / (np.sqrt(N) + np.sqrt(N - 2.0))


DELTA_S_G1 = (6 + 5 * np.sqrt(2) + 4 * np.sqrt(3) + 3 * np.sqrt(6)) / 32


@dataclass(frozen=True)
class BrightSubspace:
    W_even: np.ndarray
    P_bright: np.ndarray
    bright_vectors: np.ndarray   # columns spanning range(P_bright)
    C_proj: float
    delta_s_g1: float


def bright_subspace_constants() -> BrightSubspace:
    """Even-chain first-order coupling (Delta-N = -2, 0, +2) and its bright projector."""
    W = np.array([[0.0, 0.25, 0.0], [-0.25, 0.0, 0.25], [0.0, -0.25, 0.0]])
    P = -8 * W @ W
    # bright states: eigenvectors of W for +-i/sqrt(8), normalised
    B = np.array([[1, 1j * SQRT2, -1], [1, -1j * SQRT2, -1]]).T / 2
    c_proj = float(np.abs(B[2, 0]) ** 2)
    return BrightSubspace(W, P, B, c_proj, float(DELTA_S_G1))


def lindblad_slope(delta: float, g: float) -> float:
    """``d lambda_1 / d kappa`` at ``kappa = 0`` for cavity damping.

    ``-1/2 - (1/4) 2g^2 / (2g^2 + Delta^2)``; equals ``-3/4`` at resonance.
    The detuned form was fixed against finite differences of the dense
    generator (see tests), not derived.
    """
    if g == 0:
        raise ValueError("slope undefined at g = 0")
    x = 2 * g * g / (2 * g * g + delta * delta)
    return -0.5 - 0.25 * x


# ------------------------------------------------------------ band catalog

FAMILIES = {"F": 1, "G": 2, "H": 3}

# Only shipped phenomenological value: F family, n = 0, g near 0.30.
SIGMA_EFF_F0 = 0.326


@dataclass(frozen=True)
class BandEntry:
    family: str
    n: int                 # internal index n >= 0; printed labels use n + 1
    g: float
    delta_E: float
    g_res: float
    lambda_c: float | None = None

    @property
    def k(self) -> int:
        return FAMILIES[self.family]

    @property
    def label(self) -> str:
        return f"{self.family}{self.n + 1}"


def band_spacing(k: int, n: int, g):
    """``|k - g (sqrt(n+k+1) + sqrt(n+1))|``."""
    return np.abs(k - np.asarray(g) * (np.sqrt(n + k + 1) + np.sqrt(n + 1)))


def band_resonance(k: int, n: int) -> float:
    return k / (np.sqrt(n + k + 1) + np.sqrt(n + 1))


def band_lambda_c(k: int, n: int, g: float, sigma_eff: float) -> float:
    """``sqrt(Delta E / Sigma_eff)``."""
    if not sigma_eff > 0:
        raise ValueError("sigma_eff must be positive")
    return float(np.sqrt(band_spacing(k, n, g) / sigma_eff))


def band_catalog(g: float, n_range=range(0, 8), sigma_eff: dict | None = None,
                 families=("F", "G", "H")) -> list[BandEntry]:
    """Enumerate band entries; ``sigma_eff`` maps ``(family, n)`` to a value."""
    sigma_eff = sigma_eff or {}
    out = []
    for fam in families:
        k = FAMILIES[fam]
        for n in n_range:
            if n < 0:
                raise ValueError("band index n must be >= 0")
            s = sigma_eff.get((fam, n))
            lc = band_lambda_c(k, n, g, s) if s is not None else None
            out.append(BandEntry(fam, n, float(g), float(band_spacing(k, n, g)),
                                 float(band_resonance(k, n)), lc))
    return out


# ----------------------------------------------- resonant first-order matrix

@dataclass
class DegeneratePerturbation:
    n_max: int
    g: float
    z: float                  # cluster centre, +sqrt(2) g or -sqrt(2) g
    W: np.ndarray             # <l_i| Q L_CR Q |r_j>, 5 x 5
    eigenvalues: np.ndarray   # of W / g, sorted by imaginary part
    charpoly: np.ndarray      # coefficients of det(mu - W/g), leading 1

    @property
    def max_imag_slope(self) -> float:
        """Predicted ``max|Im lambda| / (lambda g)`` at small deformation."""
        return float(np.abs(self.eigenvalues.imag).max())


def degenerate_perturbation_matrix(n_max: int, g: float = 1.0, sign: int = +1,
                                   cluster_tol: float = 1e-6,
                                   expected_dim: int = 5) -> DegeneratePerturbation:
    """First-order counter-rotating coupling inside the resonant cluster.

    Needs ``g = omega_c`` (here ``omega_c = omega0 = g``) and ``n_max >= 4``;
    the cluster sits at ``sign * sqrt(2) g`` of the undeformed vacuum ``QLQ``.
    """
    from .liouville import commutator_superoperator, nz_projector, projected_generator
    from .model import build_jc, counter_rotating
    from .spectra import eigendecompose

    if n_max < 4:
        raise ValueError("resonant cluster needs n_max >= 4")
    params = JCParams(omega0=g, omega_c=g, g=g, n_max=n_max)
    L0 = commutator_superoperator(build_jc(params))
    P = nz_projector(n_max=n_max, omega_c=g)
    A = projected_generator(L0, P).matrix
    spec = eigendecompose(A)
    z = sign * SQRT2 * g
    idx = np.flatnonzero(np.abs(spec.eigenvalues - z) < cluster_tol * g)
    if idx.size != expected_dim:
        raise ValueError(f"cluster at {z:.6f} has dimension {idx.size}, expected {expected_dim}")
    R = spec.right[:, idx]
    Lv = spec.left[:, idx]
    Lv = Lv @ np.linalg.inv(Lv.conj().T @ R).conj().T
    Q = np.eye(A.shape[0]) - P.matrix
    Lcr = commutator_superoperator(counter_rotating(params)).matrix
    W = Lv.conj().T @ (Q @ Lcr @ Q) @ R
    mu = np.linalg.eigvals(W / g)
    mu = mu[np.lexsort((mu.real, mu.imag))]
    cp = np.poly(W / g)
    return DegeneratePerturbation(n_max, g, z, W, mu, cp)
