"""Parameter sweeps: counter-rotating deformation, cavity damping, sigma_x coupling."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .liouville import (commutator_superoperator, liouville_parity_blocks, lindblad_dissipator,
                        nz_projector, projected_generator, qlq, sector_decompose)
from .model import VACUUM, BathSpec, JCParams, build_deformed, build_jc, build_spin_boson
from .oracles import bare_resonance_bound
from .spectra import eigvals

log = logging.getLogger(__name__)

DEFAULT_TOL_IMAG = 1e-8


@dataclass(frozen=True)
class ScanGrid:
    parameter: str = "lambda"
    start: float = 0.0
    stop: float = 1.0
    step: float | None = 0.002
    explicit: tuple | None = None
    tol_imag: float = DEFAULT_TOL_IMAG

    def __post_init__(self):
        if not self.tol_imag > 0:
            raise ValueError("tol_imag must be > 0")
        if self.explicit is None:
            if self.step is None or not self.step > 0:
                raise ValueError("step must be > 0")
            if not self.stop >= self.start:
                raise ValueError("stop must be >= start")
        else:
            pts = np.asarray(self.explicit, dtype=float)
            if pts.size == 0 or np.any(np.diff(pts) <= 0):
                raise ValueError("explicit points must be strictly increasing")

    @classmethod
    def parse(cls, text: str, parameter: str = "lambda", tol_imag: float = DEFAULT_TOL_IMAG):
        """``start:stop:step`` or a comma separated list."""
        if ":" in text:
            a, b, c = (float(x) for x in text.split(":"))
            return cls(parameter, a, b, c, None, tol_imag)
        pts = tuple(float(x) for x in text.split(","))
        return cls(parameter, pts[0], pts[-1], None, pts, tol_imag)

    @property
    def points(self) -> np.ndarray:
        if self.explicit is not None:
            return np.asarray(self.explicit, dtype=float)
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9))
        # integer multiples avoid accumulated drift; the endpoint is always included
        pts = np.round(self.start + self.step * np.arange(n + 1), 12)
        if self.stop - pts[-1] > 1e-9 * self.step:
            pts = np.append(pts, self.stop)
        return pts

    def describe(self) -> dict:
        return {"start": self.start, "stop": self.stop, "step": self.step}


@dataclass
class ScanResult:
    parameter: str
    points: np.ndarray
    max_imag: np.ndarray          # NaN marks a failed point
    n_complex: np.ndarray
    tol_imag: float
    intervals: list[tuple[float, float]] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)

    @property
    def complex_mask(self) -> np.ndarray:
        return np.nan_to_num(self.max_imag, nan=-1.0) > self.tol_imag

    @property
    def endpoint_complex(self) -> bool:
        return bool(self.complex_mask[-1])

    @property
    def lambda_first(self) -> float | None:
        return self.intervals[0][0] if self.intervals else None

    @property
    def lambda_onset_terminal(self) -> float | None:
        if self.intervals and self.endpoint_complex:
            return self.intervals[-1][0]
        return None

    @property
    def bubbles(self) -> list[tuple[float, float]]:
        return self.intervals[:-1] if self.endpoint_complex else list(self.intervals)

    @property
    def n_bub(self) -> int:
        return len(self.bubbles)

    @property
    def classification(self) -> str:
        if not self.intervals:
            return "P"
        return "B" if self.endpoint_complex else "R"

    @property
    def max_imag_overall(self) -> float:
        return float(np.nanmax(self.max_imag)) if np.any(np.isfinite(self.max_imag)) else float("nan")

    def transitions(self) -> list[tuple[float, float]]:
        """Grid cells ``(a, b)`` in which the reality indicator flips."""
        m = self.complex_mask
        ok = np.isfinite(self.max_imag)
        out = []
        for i in range(len(m) - 1):
            if ok[i] and ok[i + 1] and m[i] != m[i + 1]:
                out.append((float(self.points[i]), float(self.points[i + 1])))
        return out


def complex_intervals(points: np.ndarray, max_imag: np.ndarray, tol: float):
    """Maximal runs of grid points with ``max_imag > tol``; failed points split runs."""
    out, gaps = [], []
    start = None
    for i, (x, v) in enumerate(zip(points, max_imag)):
        if not np.isfinite(v):
            gaps.append(float(x))
            if start is not None:
                out.append((float(points[start]), float(points[i - 1])))
                start = None
            continue
        if v > tol and start is None:
            start = i
        elif v <= tol and start is not None:
            out.append((float(points[start]), float(points[i - 1])))
            start = None
    if start is not None:
        out.append((float(points[start]), float(points[-1])))
    return out, gaps


def _pmap(fn, items, threads: int | None):
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


class DeformedGenerator:
    """``QLQ(lambda)`` with the projector and both commutators cached."""

    def __init__(self, params: JCParams, bath: BathSpec = VACUUM, use_parity: bool = True):
        from .model import counter_rotating
        self.params = params
        N = params.n_max
        P = nz_projector(bath, N, params.omega_c).matrix
        self.Q = np.eye(P.shape[0]) - P
        L0 = commutator_superoperator(build_jc(params)).matrix
        L1 = commutator_superoperator(counter_rotating(params)).matrix
        self.A0 = self.Q @ L0 @ self.Q
        self.A1 = self.Q @ L1 @ self.Q
        self.blocks = None
        if use_parity:
            b0 = liouville_parity_blocks(self.A0, N)
            b1 = liouville_parity_blocks(self.A1, N)
            self.blocks = [(b0[s][1], b1[s][1]) for s in (1, -1)]

    def matrix(self, lam: float) -> np.ndarray:
        return self.A0 + lam * self.A1

    def eigvals(self, lam: float) -> np.ndarray:
        if self.blocks is None:
            return eigvals(self.matrix(lam))
        return np.concatenate([eigvals(a + lam * b) for a, b in self.blocks])


def _reality(w: np.ndarray, tol: float) -> tuple[float, int]:
    im = np.abs(w.imag)
    return float(im.max(initial=0.0)), int(np.count_nonzero(im > tol))


def lambda_scan(params: JCParams, grid: ScanGrid, bath: BathSpec = VACUUM,
                threads: int | None = None, generator: DeformedGenerator | None = None) -> ScanResult:
    """Reality census of ``QLQ(lambda)`` along the grid."""
    gen = generator or DeformedGenerator(params, bath)
    pts = grid.points

    def one(lam):
        try:
            return _reality(gen.eigvals(lam), grid.tol_imag)
        except (np.linalg.LinAlgError, ValueError) as exc:
            log.warning("eigensolver failed at lambda=%g: %s", lam, exc)
            return float("nan"), -1

    res = _pmap(one, pts, threads)
    mi = np.array([r[0] for r in res])
    nc = np.array([r[1] for r in res])
    iv, gaps = complex_intervals(pts, mi, grid.tol_imag)
    return ScanResult(grid.parameter, pts, mi, nc, grid.tol_imag, iv, gaps)


def refine_transition(params: JCParams, bracket: tuple[float, float], tol_lambda: float = 1e-4,
                      tol_imag: float = DEFAULT_TOL_IMAG, bath: BathSpec = VACUUM,
                      generator: DeformedGenerator | None = None) -> float | None:
    """Bisect the reality indicator inside ``bracket``; ``None`` if it does not flip."""
    gen = generator or DeformedGenerator(params, bath)

    def cplx(lam):
        return _reality(gen.eigvals(lam), tol_imag)[0] > tol_imag

    a, b = map(float, bracket)
    ca, cb = cplx(a), cplx(b)
    if ca == cb:
        return None
    while b - a > tol_lambda:
        m = 0.5 * (a + b)
        if cplx(m) == ca:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


@dataclass
class PhaseRow:
    g: float
    n_max: int
    result: ScanResult
    g_c: float | None

    @property
    def classification(self) -> str:
        return self.result.classification


def phase_map(g_list, n_max_list, grid: ScanGrid, omega0: float = 1.0, omega_c: float = 1.0,
              threads: int | None = None) -> list[PhaseRow]:
    rows = []
    for N in n_max_list:
        gc = float(bare_resonance_bound(N)) if N >= 2 else None
        for g in g_list:
            p = JCParams(omega0=omega0, omega_c=omega_c, g=float(g), n_max=int(N))
            rows.append(PhaseRow(float(g), int(N), lambda_scan(p, grid, threads=threads), gc))
    return rows


def perturbation_scaling_table(n_max: int = 4, g: float = 1.0,
                               lambdas=(1e-4, 1e-3, 1e-2, 1e-1)) -> list[dict]:
    """``max|Im lambda|`` and its ratio to ``lambda g`` at the ``g = omega_c`` resonance."""
    gen = DeformedGenerator(JCParams(omega0=g, omega_c=g, g=g, n_max=n_max))
    out = []
    for lam in lambdas:
        mi = float(np.abs(gen.eigvals(lam).imag).max())
        out.append({"lambda": float(lam), "max_imag": mi, "ratio": mi / (lam * g)})
    return out


# ------------------------------------------------------------- damping sweep

@dataclass
class KappaSweepResult:
    kappa: np.ndarray
    lambda1: np.ndarray           # tracked eigenvalue (complex)
    overlap: np.ndarray           # |<r(prev)|r(k)>| at each step
    n_complex: np.ndarray         # Delta-N = 0 nonzero modes with |Im| > tol
    n_modes: np.ndarray           # Delta-N = 0 nonzero modes
    slope: float | None
    slope_overlap: float
    min_overlap: float = 0.7

    @property
    def tracked(self) -> np.ndarray:
        """Mask of points reached through unambiguous overlaps only."""
        ok = self.overlap >= self.min_overlap
        return np.logical_and.accumulate(ok)


class _DampedBlock:
    def __init__(self, params: JCParams):
        N = params.n_max
        P = nz_projector(VACUUM, N, params.omega_c).matrix
        Q = np.eye(P.shape[0]) - P
        L0 = Q @ commutator_superoperator(build_jc(params)).matrix @ Q
        LD = Q @ lindblad_dissipator(N).matrix @ Q
        self.idx = sector_decompose(L0, N).sectors[0]
        ix = np.ix_(self.idx, self.idx)
        self.A0, self.AD = L0[ix], LD[ix]

    def eig(self, kappa: float):
        import scipy.linalg as sla
        return sla.eig(self.A0 + kappa * self.AD)


def _pick(w, V, ref_vec):
    ov = np.abs(V.conj().T @ ref_vec) / np.linalg.norm(V, axis=0)
    j = int(np.argmax(ov))
    return j, float(ov[j])


def kappa_sweep(params: JCParams, kappa_grid, delta_kappa: float = 1e-4,
                tol_imag: float = 1e-12, min_overlap: float = 0.7,
                zero_tol: float = 1e-10) -> KappaSweepResult:
    """Follow ``lambda_1 = +sqrt(Delta^2 + 2 g^2)`` as cavity damping is switched on.

    Tracking uses right-eigenvector overlap with the previous grid point.
    The slope at ``kappa = 0`` is a central difference over ``+-delta_kappa``.
    """
    ks = np.asarray(kappa_grid, dtype=float)
    blk = _DampedBlock(params)
    lam1 = np.sqrt(params.delta ** 2 + 2 * params.g ** 2)
    w0, V0 = blk.eig(0.0)
    j0 = int(np.argmin(np.abs(w0 - lam1)))
    r0 = V0[:, j0] / np.linalg.norm(V0[:, j0])

    def track(kappas, ref):
        vals, ovs, census, modes = [], [], [], []
        for k in kappas:
            w, V = blk.eig(k)
            j, ov = _pick(w, V, ref)
            ref = V[:, j] / np.linalg.norm(V[:, j])
            vals.append(w[j])
            ovs.append(ov)
            nz = np.abs(w) > zero_tol
            census.append(int(np.count_nonzero(np.abs(w[nz].imag) > tol_imag)))
            modes.append(int(np.count_nonzero(nz)))
        return np.array(vals), np.array(ovs), np.array(census), np.array(modes)

    vals, ovs, census, modes = track(ks, r0)
    (lp,), (op,), _, _ = track([delta_kappa], r0)
    (lm,), (om,), _, _ = track([-delta_kappa], r0)
    q = min(op, om)
    slope = float(((lp - lm) / (2 * delta_kappa)).real) if q >= min_overlap else None
    return KappaSweepResult(ks, vals, ovs, census, modes, slope, q, min_overlap)


# ------------------------------------------------------- sigma_x continuation

@dataclass
class SigmaxContinuation:
    n_max: int
    g: np.ndarray
    max_imag: dict                # parity -> array over g
    g_c: float | None
    block: int | None             # parity sector that first turns complex


def _spin_boson_blocks(n_max: int, g: float, omega0: float, omega_c: float):
    p = JCParams(omega0=omega0, omega_c=omega_c, g=g, n_max=n_max)
    A = qlq(build_spin_boson(p), omega_c=omega_c)
    b = liouville_parity_blocks(A, n_max)
    return {s: b[s][1] for s in (1, -1)}


def sigmax_continuation(n_max: int, g_grid, omega0: float = 1.0, omega_c: float = 1.0,
                        tol_imag: float = DEFAULT_TOL_IMAG, tol_g: float = 1e-3) -> SigmaxContinuation:
    """Per-parity reality trace of the spin-boson ``QLQ`` along ``g``; first onset bisected."""
    gs = np.asarray(g_grid, dtype=float)
    trace = {1: [], -1: []}
    for g in gs:
        blocks = _spin_boson_blocks(n_max, g, omega0, omega_c)
        for s in (1, -1):
            trace[s].append(float(np.abs(eigvals(blocks[s]).imag).max(initial=0.0)))
    trace = {s: np.array(v) for s, v in trace.items()}
    first = None
    for s in (1, -1):
        hit = np.flatnonzero(trace[s] > tol_imag)
        if hit.size and hit[0] > 0 and (first is None or hit[0] < first[1]):
            first = (s, hit[0])
    if first is None:
        return SigmaxContinuation(n_max, gs, trace, None, None)
    s, i = first
    a, b = gs[i - 1], gs[i]
    while b - a > tol_g:
        m = 0.5 * (a + b)
        mi = np.abs(eigvals(_spin_boson_blocks(n_max, m, omega0, omega_c)[s]).imag).max()
        if mi > tol_imag:
            b = m
        else:
            a = m
    return SigmaxContinuation(n_max, gs, trace, 0.5 * (a + b), s)
