"""Hamiltonians and bath states on the truncated qubit x Fock space.

Basis convention (fixed for the whole package): interleaved product basis
``|g,0>, |e,0>, |g,1>, |e,1>, ..., |g,N>, |e,N>`` so that the state ``|s,n>``
sits at index ``2*n + s`` with ``s = 0`` for ``g`` and ``s = 1`` for ``e``.
This is ``kron(mode, qubit)`` ordering.  ``sigma_z|e> = +|e>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BASIS_TAG = "interleaved"


@dataclass(frozen=True)
class JCParams:
    omega0: float = 1.0
    omega_c: float = 1.0
    g: float = 0.3
    n_max: int = 3

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        for name in ("omega0", "omega_c", "g"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def delta(self) -> float:
        return self.omega0 - self.omega_c

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


@dataclass(frozen=True)
class LadderSpec:
    """Generic single-photon-exchange ladder.

    ``E_g[n]`` and ``E_e[n]`` are the diagonal energies of ``|g,n>`` and
    ``|e,n>`` (n = 0..N); ``v[n-1]`` couples ``|g,n>`` to ``|e,n-1>``.
    """

    E_g: np.ndarray
    E_e: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        E_g = np.asarray(self.E_g, dtype=float)
        E_e = np.asarray(self.E_e, dtype=float)
        v = np.asarray(self.v, dtype=complex)
        if E_g.ndim != 1 or E_g.shape != E_e.shape:
            raise ValueError("E_g and E_e must be 1-D arrays of equal length")
        if len(E_g) < 2 or v.shape != (len(E_g) - 1,):
            raise ValueError(
                f"need len(v) == len(E_g) - 1 >= 1, got {v.shape} and {E_g.shape}")
        object.__setattr__(self, "E_g", E_g)
        object.__setattr__(self, "E_e", E_e)
        object.__setattr__(self, "v", v)

    @property
    def n_max(self) -> int:
        return len(self.E_g) - 1

    @property
    def detunings(self) -> np.ndarray:
        """``Delta_n = E_e[n-1] - E_g[n]`` for n = 1..N."""
        return self.E_e[:-1] - self.E_g[1:]

    @classmethod
    def from_jc(cls, params: JCParams, phases=None) -> "LadderSpec":
        n = np.arange(params.n_max + 1)
        E_g = -params.omega0 / 2 + params.omega_c * n
        E_e = params.omega0 / 2 + params.omega_c * n
        v = params.g * np.sqrt(n[1:]).astype(complex)
        if phases is not None:
            v = v * np.exp(1j * np.asarray(phases))
        return cls(E_g, E_e, v)


@dataclass(frozen=True)
class BathSpec:
    """Bath reference state: ``beta=None`` is the vacuum."""

    beta: float | None = None

    def __post_init__(self):
        if self.beta is not None and not (self.beta > 0):
            raise ValueError(f"beta must be > 0 (use None for vacuum), got {self.beta}")

    @property
    def is_vacuum(self) -> bool:
        return self.beta is None or np.isinf(self.beta)

    def weights(self, omega_c: float, n_max: int) -> np.ndarray:
        if self.is_vacuum:
            p = np.zeros(n_max + 1)
            p[0] = 1.0
            return p
        return thermal_weights(self.beta, omega_c, n_max)

    def density(self, omega_c: float, n_max: int) -> np.ndarray:
        return np.diag(self.weights(omega_c, n_max))

    def describe(self) -> str:
        return "vacuum" if self.is_vacuum else f"thermal(beta={self.beta:g})"


VACUUM = BathSpec()


@dataclass(frozen=True)
class Operator:
    """Dense matrix on the qubit x Fock space plus its basis metadata."""

    matrix: np.ndarray
    n_max: int
    label: str = ""
    basis: str = field(default=BASIS_TAG)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def index(s: int, n: int) -> int:
    """Position of ``|s,n>`` (s=0: g, s=1: e) in the interleaved basis."""
    return 2 * n + s


def mode_operators(n_max: int):
    """Return ``(a, sigma_minus)`` embedded in the full space."""
    a_mode = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g><e| with g at index 0
    a = np.kron(a_mode, np.eye(2))
    sigma_minus = np.kron(np.eye(n_max + 1), sm)
    return a, sigma_minus


def _diagonal_jc(params: JCParams) -> np.ndarray:
    n = np.repeat(np.arange(params.n_max + 1), 2)
    sz = np.tile([-1.0, 1.0], params.n_max + 1)
    return np.diag(params.omega0 / 2 * sz + params.omega_c * n)


def build_jc(params: JCParams) -> Operator:
    H = _diagonal_jc(params)
    for n in range(1, params.n_max + 1):
        i, j = index(1, n - 1), index(0, n)
        H[i, j] = H[j, i] = params.g * np.sqrt(n)
    return Operator(H, params.n_max, "jc")


def build_ladder(spec: LadderSpec) -> Operator:
    N = spec.n_max
    H = np.zeros((2 * (N + 1),) * 2, dtype=complex)
    H[0::2, 0::2] = np.diag(spec.E_g)
    H[1::2, 1::2] = np.diag(spec.E_e)
    for n in range(1, N + 1):
        i, j = index(1, n - 1), index(0, n)
        H[i, j] = spec.v[n - 1]
        H[j, i] = np.conj(spec.v[n - 1])
    if not np.any(H.imag):
        H = H.real.copy()
    return Operator(H, N, "ladder")


def counter_rotating(params: JCParams) -> Operator:
    """``g (sigma_+ a^dag + sigma_- a)``: couples ``|g,n>`` to ``|e,n+1>``."""
    H = np.zeros((params.dim,) * 2)
    for n in range(params.n_max):
        i, j = index(1, n + 1), index(0, n)
        H[i, j] = H[j, i] = params.g * np.sqrt(n + 1)
    return Operator(H, params.n_max, "counter_rotating")


def build_deformed(params: JCParams, lam: float) -> Operator:
    H = build_jc(params).matrix + lam * counter_rotating(params).matrix
    return Operator(H, params.n_max, f"deformed(lambda={lam:g})")


def build_spin_boson(params: JCParams) -> Operator:
    """``omega0/2 sz + omega_c a^dag a + g sx (a + a^dag)``."""
    a, sm = mode_operators(params.n_max)
    sx = sm + sm.T
    H = _diagonal_jc(params) + params.g * sx @ (a + a.T)
    return Operator(H, params.n_max, "spin_boson")


def excitation_number(n_max: int) -> Operator:
    n = np.repeat(np.arange(n_max + 1), 2) + np.tile([0, 1], n_max + 1)
    return Operator(np.diag(n.astype(float)), n_max, "N_exc")


def excitation_labels(n_max: int) -> np.ndarray:
    """Integer excitation number of every basis state."""
    return np.repeat(np.arange(n_max + 1), 2) + np.tile([0, 1], n_max + 1)


def parity_operator(n_max: int) -> Operator:
    """``sigma_z (x) (-1)^{a^dag a}``."""
    n = np.repeat(np.arange(n_max + 1), 2)
    sz = np.tile([-1.0, 1.0], n_max + 1)
    return Operator(np.diag(sz * (-1.0) ** n), n_max, "parity")


def thermal_weights(beta: float, omega_c: float, n_max: int) -> np.ndarray:
    """Gibbs weights ``exp(-beta omega_c k) / Z`` normalised over k = 0..n_max."""
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    k = np.arange(n_max + 1)
    if np.isinf(beta):
        p = (k == 0).astype(float)
        return p
    logw = -beta * omega_c * k
    w = np.exp(logw - logw.max())
    return w / w.sum()
