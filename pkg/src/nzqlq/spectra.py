"""Non-symmetric eigensystems, pseudo-Hermitian metrics and resolvent probes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .liouville import _as_matrix


class AmbiguousZeroModes(ValueError):
    """An eigenvalue sits too close to the zero-mode threshold to classify."""


@dataclass
class SpectralData:
    eigenvalues: np.ndarray
    right: np.ndarray          # columns r_n, unit 2-norm
    left: np.ndarray           # columns l_n, <l_m|r_n> = delta_mn within groups
    groups: list[np.ndarray]   # index sets of numerically degenerate eigenvalues
    biorth_residual: float
    zero_tol: float
    singular_groups: list[int]

    @property
    def zero_modes(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.eigenvalues) < self.zero_tol)

    @property
    def nonzero_modes(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.eigenvalues) >= self.zero_tol)

    def group_value(self, j: int) -> complex:
        return complex(np.mean(self.eigenvalues[self.groups[j]]))

    def find_group(self, z: complex, tol: float) -> int:
        d = [abs(self.group_value(j) - z) for j in range(len(self.groups))]
        j = int(np.argmin(d))
        if d[j] > tol:
            raise KeyError(f"no eigenvalue group within {tol:g} of {z}")
        return j


def default_zero_tol(w: np.ndarray) -> float:
    return max(1e-10, 1e-12 * float(np.abs(w).max(initial=0.0)))


def cluster(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group eigenvalues into chains whose neighbours lie closer than ``tol``."""
    if w.size == 0:
        return []
    order = np.lexsort((w.imag, w.real))
    parent = list(range(w.size))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # Sorted by real part: only neighbours within tol in Re can be within tol.
    for a in range(len(order)):
        i = order[a]
        for b in range(a + 1, len(order)):
            j = order[b]
            if w[j].real - w[i].real >= tol:
                break
            if abs(w[j] - w[i]) < tol:
                parent[find(j)] = find(i)
    buckets: dict[int, list[int]] = {}
    for i in order:
        buckets.setdefault(find(i), []).append(int(i))
    groups = [np.array(v) for v in buckets.values()]
    groups.sort(key=lambda g: (w[g].real.mean(), w[g].imag.mean()))
    return groups


def eigendecompose(A, group_tol: float | None = None, zero_tol: float | None = None,
                   singular_tol: float = 1e-10) -> SpectralData:
    """Full eigensystem with groupwise biorthonormalised left/right vectors.

    Right vectors are orthonormalised inside each degenerate group (so each
    keeps unit norm); left vectors are then fixed by ``L_g^H R_g = I``.
    """
    Am = _as_matrix(A)
    if not np.all(np.isfinite(Am)):
        raise ValueError("matrix has non-finite entries")
    w, VL, VR = sla.eig(Am, left=True, right=True)
    scale = float(np.abs(w).max(initial=0.0))
    if group_tol is None:
        group_tol = 1e-8 * max(scale, 1e-300)
    if zero_tol is None:
        zero_tol = default_zero_tol(w)
    groups = cluster(w, group_tol)
    R = VR.astype(complex)
    L = VL.astype(complex)
    singular = []
    for k, g in enumerate(groups):
        if len(g) > 1:
            R[:, g], _ = np.linalg.qr(R[:, g])
        S = L[:, g].conj().T @ R[:, g]
        sv = np.linalg.svd(S, compute_uv=False)
        if sv[-1] < singular_tol * max(sv[0], 1e-300):
            singular.append(k)
            L[:, g] = L[:, g] @ np.linalg.pinv(S, rcond=singular_tol).conj().T
        else:
            L[:, g] = L[:, g] @ np.linalg.inv(S).conj().T
    ok = [i for k, g in enumerate(groups) if k not in singular for i in g]
    if ok:
        G = L[:, ok].conj().T @ R[:, ok]
        biorth = float(np.abs(G - np.eye(len(ok))).max())
    else:
        biorth = float("nan")
    return SpectralData(w, R, L, groups, biorth, zero_tol, singular)


def eigvals(A) -> np.ndarray:
    return sla.eigvals(_as_matrix(A))


@dataclass
class RealityReport:
    max_imag: float
    n_complex: int


def reality_report(spec, tol: float = 1e-8) -> RealityReport:
    w = spec.eigenvalues if isinstance(spec, SpectralData) else np.asarray(spec)
    im = np.abs(w.imag)
    return RealityReport(float(im.max(initial=0.0)), int(np.count_nonzero(im > tol)))


@dataclass
class MetricResult:
    eta: np.ndarray
    intertwining_residual: float
    kappa: float
    min_eigenvalue: float
    hermitization_residual: float
    similarity_spectrum_error: float
    n_modes: int


def build_metric(A, spec: SpectralData | None = None, zero_tol: float | None = None,
                 biorth_limit: float = 1e-8) -> MetricResult:
    """``eta = sum_{lambda_n != 0} |l_n><l_n|`` and its four diagnostics.

    ``kappa`` is the ratio of largest to smallest nonzero singular value of
    ``eta``; ``min_eigenvalue`` and the Hermitisation residual are evaluated
    on the invariant subspace spanned by the nonzero-mode right vectors.
    """
    Am = _as_matrix(A)
    if spec is None:
        spec = eigendecompose(Am, zero_tol=zero_tol)
    zt = spec.zero_tol if zero_tol is None else zero_tol
    mag = np.abs(spec.eigenvalues)
    near = (mag > zt / 10) & (mag < 10 * zt)
    if np.any(near):
        raise AmbiguousZeroModes(
            f"{near.sum()} eigenvalue(s) within a decade of the zero threshold {zt:g}")
    nz = np.flatnonzero(mag >= zt)
    if nz.size == 0:
        raise AmbiguousZeroModes("no nonzero modes")
    if not spec.biorth_residual < biorth_limit:
        raise ValueError(f"biorthonormality residual {spec.biorth_residual:.2e} too large")
    Lnz = spec.left[:, nz]
    Rnz = spec.right[:, nz]
    eta = Lnz @ Lnz.conj().T
    inter = float(np.linalg.norm(Am.conj().T @ eta - eta @ Am))
    sv = np.linalg.svd(eta, compute_uv=False)
    kappa = float(sv[0] / sv[nz.size - 1])
    # Compression onto V = span(R_nz), which A leaves invariant.
    Qv, _ = np.linalg.qr(Rnz)
    A_r = Qv.conj().T @ Am @ Qv
    eta_r = Qv.conj().T @ eta @ Qv
    eta_r = (eta_r + eta_r.conj().T) / 2
    ev, U = np.linalg.eigh(eta_r)
    min_ev = float(ev.min())
    if min_ev > 0:
        root = (U * np.sqrt(ev)) @ U.conj().T
        inv_root = (U / np.sqrt(ev)) @ U.conj().T
        Hs = root @ A_r @ inv_root
        herm = float(np.linalg.norm(Hs - Hs.conj().T))
        sim = np.sort_complex(np.linalg.eigvalsh((Hs + Hs.conj().T) / 2).astype(complex))
        ref = np.sort_complex(spec.eigenvalues[nz])
        sim_err = float(np.abs(sim - ref).max())
    else:
        herm = sim_err = float("inf")
    return MetricResult(eta, inter, kappa, min_ev, herm, sim_err, int(nz.size))


def numerical_rank(A, tol: float = 1e-10) -> int:
    s = np.linalg.svd(_as_matrix(A), compute_uv=False)
    return int(np.count_nonzero(s > tol * s[0])) if s.size and s[0] > 0 else 0


def zero_mode_count(A, tol: float = 1e-10) -> int:
    """Kernel dimension: singular values below ``tol * sigma_max``."""
    Am = _as_matrix(A)
    return Am.shape[0] - numerical_rank(Am, tol)


def nullity(A, z: complex = 0.0, tol: float = 1e-10) -> int:
    Am = _as_matrix(A)
    return zero_mode_count(Am - z * np.eye(Am.shape[0]), tol)


def resolvent_norm(A, z: complex) -> float:
    """``||(A - z)^{-1}||_2 = 1 / sigma_min(A - z)``."""
    Am = _as_matrix(A)
    s = np.linalg.svd(Am - z * np.eye(Am.shape[0]), compute_uv=False)
    return float(1.0 / s[-1]) if s[-1] > 0 else float("inf")


def spectral_projector(spec: SpectralData, j: int) -> np.ndarray:
    """Biorthogonal projector ``sum_{n in group j} |r_n><l_n|``."""
    g = spec.groups[j]
    return spec.right[:, g] @ spec.left[:, g].conj().T


@dataclass
class ReducedWeights:
    values: np.ndarray     # group representative eigenvalue
    weights: np.ndarray    # ||P L Q Pi_j Q L P||_F
    scale: float           # ||L||_F^2, the reference for "relative" weight
    trace_norm2: float     # ||vec(I_bath)||^2 = n_max + 1

    @property
    def relative(self) -> np.ndarray:
        return self.weights / self.scale

    @property
    def calibrated(self) -> np.ndarray:
        """``w_j^2 / (n_max + 1)``: strips the bath-trace covector norm from ``P``."""
        return self.weights ** 2 / self.trace_norm2

    def sum_squares(self, nonzero_only: bool = True, zero_tol: float = 1e-10) -> float:
        m = np.abs(self.values) > zero_tol if nonzero_only else slice(None)
        return float(np.sum(self.weights[m] ** 2))


def reduced_weights(L, P, spec: SpectralData | None = None, A=None,
                    delta_n: int | None = None, n_max: int | None = None) -> ReducedWeights:
    """Memory-kernel weight ``||P L Q Pi_j Q L P||_F`` of every eigenvalue group of ``QLQ``.

    With ``delta_n`` the computation is restricted to that excitation sector
    (all three operators are block diagonal in it).
    """
    Lm, Pm = _as_matrix(L), _as_matrix(P)
    if n_max is None:
        n_max = getattr(L, "n_max", None) or getattr(P, "n_max", None)
    if n_max is None:
        n_max = int(round(np.sqrt(Pm.shape[0]) / 2)) - 1
    scale = float(np.linalg.norm(Lm) ** 2)
    if delta_n is not None:
        from .liouville import delta_n_labels
        idx = np.flatnonzero(delta_n_labels(n_max) == delta_n)
        Lm, Pm = Lm[np.ix_(idx, idx)], Pm[np.ix_(idx, idx)]
        if A is not None:
            A = _as_matrix(A)[np.ix_(idx, idx)]
    Q = np.eye(Pm.shape[0]) - Pm
    if spec is None:
        Am = Q @ Lm @ Q if A is None else _as_matrix(A)
        spec = eigendecompose(Am)
    left_op = Pm @ Lm @ Q
    right_op = Q @ Lm @ Pm
    vals, ws = [], []
    for j, g in enumerate(spec.groups):
        a = left_op @ spec.right[:, g]
        b = spec.left[:, g].conj().T @ right_op
        ws.append(float(np.linalg.norm(a @ b)))
        vals.append(spec.group_value(j))
    return ReducedWeights(np.array(vals), np.array(ws), scale, float(n_max + 1))


def sector_metric(A, delta_n: int, n_max: int | None = None, **kw) -> MetricResult:
    """:func:`build_metric` on one excitation-number block of ``A``."""
    from .liouville import sector_decompose
    dec = sector_decompose(A, n_max)
    if delta_n not in dec.blocks:
        raise KeyError(f"no sector with delta_n = {delta_n}")
    return build_metric(dec.block(delta_n), **kw)
