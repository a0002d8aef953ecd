"""Superoperators under column-stacking vectorisation and their Delta-N sectors.

``vec(rho)`` stacks columns, so ``vec(A rho B) = kron(B.T, A) vec(rho)`` and the
matrix unit ``|i><j|`` lands at position ``i + d*j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import BathSpec, Operator, excitation_labels, mode_operators, VACUUM


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray
    n_max: int
    label: str = ""

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim2(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def __matmul__(self, other):
        m = other.matrix if isinstance(other, Superoperator) else other
        return Superoperator(self.matrix @ m, self.n_max, self.label)


def _as_matrix(x) -> np.ndarray:
    return x.matrix if hasattr(x, "matrix") else np.asarray(x)


def _real_if_possible(M: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(M) and not np.any(M.imag):
        return M.real.copy()
    return M


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def commutator_superoperator(H) -> Superoperator:
    """``L = I (x) H - H^T (x) I``, i.e. ``L vec(rho) = vec([H, rho])``."""
    Hm = _as_matrix(H)
    d = Hm.shape[0]
    eye = np.eye(d)
    L = np.kron(eye, Hm) - np.kron(Hm.T, eye)
    n_max = getattr(H, "n_max", d // 2 - 1)
    return Superoperator(_real_if_possible(L), n_max, f"L[{getattr(H, 'label', '')}]")


def lindblad_dissipator(n_max: int) -> Superoperator:
    """Photon loss ``a rho a^dag - {a^dag a, rho}/2``."""
    a, _ = mode_operators(n_max)
    d = a.shape[0]
    eye = np.eye(d)
    n_op = a.T @ a
    D = np.kron(a.conj(), a) - 0.5 * (np.kron(eye, n_op) + np.kron(n_op.T, eye))
    return Superoperator(D, n_max, "L_D")


def partial_trace_bath(rho: np.ndarray, n_max: int) -> np.ndarray:
    t = np.asarray(rho).reshape(n_max + 1, 2, n_max + 1, 2)
    return np.einsum("msmt->st", t)


def nz_map(rho: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    """``rho -> Tr_B(rho) (x) rho_B`` in interleaved (mode, qubit) order."""
    n_max = rho_b.shape[0] - 1
    return np.kron(rho_b, partial_trace_bath(rho, n_max))


def nz_projector(bath: BathSpec = VACUUM, n_max: int = 3, omega_c: float = 1.0) -> Superoperator:
    """Nakajima-Zwanzig projector as a dense ``d^2 x d^2`` matrix."""
    rho_b = bath.density(omega_c, n_max)
    d = 2 * (n_max + 1)
    M = n_max + 1
    # P[(m s, m' s'), (n t, n' t')] = rho_B[m, m'] delta_st delta_s't' delta_nn'
    # with row index (m s) + d (m' s') and column index (n t) + d (n' t').
    T = np.einsum("ab,st,ST,cC->bSasCTct", rho_b, np.eye(2), np.eye(2), np.eye(M))
    # axes (m', s', m, s | n', t', n, t): C-order flattening of each half
    # reproduces the column-stacked index (2m + s) + d (2m' + s').
    P = T.reshape(d * d, d * d)
    return Superoperator(P, n_max, f"P[{bath.describe()}]")


def nz_projector_by_columns(bath: BathSpec, n_max: int, omega_c: float = 1.0) -> np.ndarray:
    """Reference construction: apply the NZ map to every matrix unit."""
    rho_b = bath.density(omega_c, n_max)
    d = 2 * (n_max + 1)
    P = np.zeros((d * d, d * d))
    for col in range(d * d):
        E = np.zeros(d * d)
        E[col] = 1.0
        P[:, col] = vec(nz_map(unvec(E, d), rho_b))
    return P


def complement(P) -> Superoperator:
    Pm = _as_matrix(P)
    return Superoperator(np.eye(Pm.shape[0]) - Pm, getattr(P, "n_max", 0), "Q")


def projected_generator(L, P) -> Superoperator:
    """``Q L Q`` with ``Q = I - P``."""
    Lm, Pm = _as_matrix(L), _as_matrix(P)
    Q = np.eye(Pm.shape[0]) - Pm
    A = _real_if_possible(Q @ Lm @ Q)
    return Superoperator(A, getattr(L, "n_max", 0), "QLQ")


def qlq(H, bath: BathSpec = VACUUM, omega_c: float = 1.0, kappa: float = 0.0) -> Superoperator:
    """Convenience: ``Q (L_H + kappa L_D) Q`` for Hamiltonian ``H``."""
    L = commutator_superoperator(H)
    n_max = L.n_max
    Lm = L.matrix
    if kappa:
        Lm = Lm + kappa * lindblad_dissipator(n_max).matrix
    P = nz_projector(bath, n_max, omega_c)
    return projected_generator(Superoperator(Lm, n_max), P)


def qlq_sector(H, delta_n: int, bath: BathSpec = VACUUM, omega_c: float = 1.0,
               kappa: float = 0.0) -> np.ndarray:
    """One excitation-number block of ``Q (L_H + kappa L_D) Q`` without forming the full product.

    Valid only for ``U(1)``-conserving ``H``: every factor is block diagonal in ``Delta N``.
    """
    L = commutator_superoperator(H)
    n_max = L.n_max
    idx = np.flatnonzero(delta_n_labels(n_max) == delta_n)
    ix = np.ix_(idx, idx)
    Ls = L.matrix[ix]
    if kappa:
        Ls = Ls + kappa * lindblad_dissipator(n_max).matrix[ix]
    Qs = np.eye(idx.size) - nz_projector(bath, n_max, omega_c).matrix[ix]
    return _real_if_possible(Qs @ Ls @ Qs)


def range_basis(P, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal columns spanning range(I - P)."""
    Pm = _as_matrix(P)
    Q = np.eye(Pm.shape[0]) - Pm
    # QQ^H is Hermitian with range(Q); eigh gives an orthonormal basis.
    w, V = np.linalg.eigh(Q @ Q.conj().T)
    return V[:, w > tol * max(1.0, w.max())]


# ---------------------------------------------------------------- sectors

def delta_n_labels(n_max: int) -> np.ndarray:
    """Delta-N of every Liouville basis unit, in vec order."""
    n = excitation_labels(n_max)
    # vec index i + d*j  <->  |i><j|
    return (n[:, None] - n[None, :]).reshape(-1, order="F")


def liouville_number(n_max: int) -> np.ndarray:
    """``L_N = I (x) N_exc - N_exc^T (x) I`` (diagonal)."""
    return np.diag(delta_n_labels(n_max).astype(float))


@dataclass
class SectorDecomposition:
    n_max: int
    sectors: dict[int, np.ndarray]
    blocks: dict[int, np.ndarray]
    leakage: float
    tolerance: float
    full: np.ndarray = field(repr=False, default=None)

    @property
    def block_diagonal(self) -> bool:
        return self.leakage <= self.tolerance

    def block(self, dn: int) -> np.ndarray:
        return self.blocks[dn]

    def embed(self, dn: int, v: np.ndarray) -> np.ndarray:
        """Lift a sector vector back to the full Liouville space."""
        out = np.zeros(self.full.shape[0], dtype=np.result_type(v, float))
        out[self.sectors[dn]] = v
        return out


def sector_decompose(A, n_max: int | None = None, tol: float | None = None) -> SectorDecomposition:
    Am = _as_matrix(A)
    if n_max is None:
        n_max = A.n_max
    labels = delta_n_labels(n_max)
    if labels.size != Am.shape[0]:
        raise ValueError(f"operator of size {Am.shape[0]} does not match n_max={n_max}")
    sectors = {int(k): np.flatnonzero(labels == k) for k in np.unique(labels)}
    blocks = {k: Am[np.ix_(idx, idx)] for k, idx in sectors.items()}
    same = labels[:, None] == labels[None, :]
    leakage = float(np.linalg.norm(np.where(same, 0.0, Am)))
    if tol is None:
        tol = 1e-12 * max(1.0, float(np.linalg.norm(Am)))
    return SectorDecomposition(n_max, sectors, blocks, leakage, tol, Am)


@dataclass
class SectorRow:
    delta_n: int
    dim: int
    frobenius: float
    herm_residual: float
    projector_norm: float
    non_hermitian_weight: float


def sector_diagnostics(decomp: SectorDecomposition, P=None) -> list[SectorRow]:
    """Per-sector size, norm and Hermiticity residual.

    ``P`` (optional) gives the projector whose per-sector support is reported.
    """
    Pm = None if P is None else _as_matrix(P)
    rows = []
    for k, idx in decomp.sectors.items():
        B = decomp.blocks[k]
        herm = float(np.linalg.norm(B - B.conj().T))
        pn = float(np.linalg.norm(Pm[np.ix_(idx, idx)])) if Pm is not None else float("nan")
        rows.append(SectorRow(k, len(idx), float(np.linalg.norm(B)), herm, pn, herm ** 2))
    return rows


def non_hermitian_share(rows: list[SectorRow], deltas) -> float:
    """Fraction of total squared anti-Hermitian Frobenius weight held by ``deltas``."""
    total = sum(r.non_hermitian_weight for r in rows)
    part = sum(r.non_hermitian_weight for r in rows if r.delta_n in set(deltas))
    return part / total if total else 0.0


# ---------------------------------------------------------------- parity

def liouville_parity(n_max: int) -> np.ndarray:
    from .model import parity_operator
    p = np.diag(parity_operator(n_max).matrix)
    return np.kron(p, p)


def liouville_parity_blocks(A, n_max: int | None = None, tol: float = 1e-12):
    """Split ``A`` into the ``s = +1`` and ``s = -1`` eigenspaces of ``Pi (x) Pi``.

    Returns ``{+1: (indices, block), -1: (indices, block)}``.
    """
    Am = _as_matrix(A)
    if n_max is None:
        n_max = A.n_max
    s = liouville_parity(n_max)
    comm = np.linalg.norm(s[:, None] * Am - Am * s[None, :])
    if comm > tol * max(1.0, np.linalg.norm(Am)):
        raise ValueError(f"operator does not commute with Liouville parity (residual {comm:.3e})")
    out = {}
    for sign in (1, -1):
        idx = np.flatnonzero(s == sign)
        out[sign] = (idx, Am[np.ix_(idx, idx)])
    return out
