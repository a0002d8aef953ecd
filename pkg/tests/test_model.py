import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nzqlq.model import (
    BathSpec, JCParams, LadderSpec, build_deformed, build_jc, build_ladder, build_spin_boson,
    counter_rotating, excitation_number, index, mode_operators, parity_operator, thermal_weights,
)

params_st = st.builds(
    JCParams,
    omega0=st.floats(-3, 3), omega_c=st.floats(0.1, 3), g=st.floats(-2, 2),
    n_max=st.integers(1, 8),
)


@settings(max_examples=40, deadline=None)
@given(params_st)
def test_jc_hermitian_and_conserves_excitations(p):
    H = build_jc(p).matrix
    N = excitation_number(p.n_max).matrix
    assert np.allclose(H, H.T)
    assert np.linalg.norm(H @ N - N @ H) < 1e-12 * max(1, np.linalg.norm(H))


@settings(max_examples=30, deadline=None)
@given(params_st, st.floats(-2, 2))
def test_deformed_commutes_with_parity(p, lam):
    H = build_deformed(p, lam).matrix
    Pi = parity_operator(p.n_max).matrix
    assert np.allclose(H, H.T)
    assert np.allclose(H @ Pi, Pi @ H)


def test_jc_matches_operator_form():
    p = JCParams(omega0=1.3, omega_c=0.9, g=0.4, n_max=5)
    a, sm = mode_operators(p.n_max)
    sz = sm.T @ sm - sm @ sm.T
    H = p.omega0 / 2 * sz + p.omega_c * a.T @ a + p.g * (sm.T @ a + a.T @ sm)
    assert np.allclose(build_jc(p).matrix, H)
    Hcr = p.g * (sm.T @ a.T + sm @ a)
    assert np.allclose(counter_rotating(p).matrix, Hcr)
    Hsb = p.omega0 / 2 * sz + p.omega_c * a.T @ a + p.g * (sm + sm.T) @ (a + a.T)
    assert np.allclose(build_spin_boson(p).matrix, Hsb)


def test_interleaved_index():
    assert [index(s, n) for n in range(2) for s in range(2)] == [0, 1, 2, 3]
    p = JCParams(g=0.7, n_max=2)
    H = build_jc(p).matrix
    assert H[index(1, 0), index(0, 1)] == pytest.approx(0.7)
    assert H[index(1, 1), index(0, 2)] == pytest.approx(0.7 * np.sqrt(2))


def test_ladder_from_jc_roundtrip():
    p = JCParams(omega0=1.2, g=0.3, n_max=4)
    spec = LadderSpec.from_jc(p)
    assert np.allclose(build_ladder(spec).matrix, build_jc(p).matrix)
    assert np.allclose(spec.detunings, p.delta)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 2 * np.pi), min_size=4, max_size=4))
def test_ladder_phases_are_unitary_gauge(phases):
    p = JCParams(g=0.5, n_max=4)
    base = LadderSpec.from_jc(p)
    twisted = LadderSpec(base.E_g, base.E_e, base.v * np.exp(1j * np.array(phases)))
    a = np.sort(build_ladder(base).eigvalsh())
    b = np.sort(build_ladder(twisted).eigvalsh())
    assert np.allclose(a, b, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 50), st.floats(0.1, 3), st.integers(0, 30))
def test_thermal_weights_normalised_and_decreasing(beta, wc, n):
    p = thermal_weights(beta, wc, n)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(np.diff(p) <= 0)


def test_bath_spec():
    assert BathSpec().is_vacuum and BathSpec(np.inf).is_vacuum
    assert np.allclose(BathSpec().weights(1.0, 3), [1, 0, 0, 0])
    with pytest.raises(ValueError):
        BathSpec(0.0)
    with pytest.raises(ValueError):
        BathSpec(-1.0)


@pytest.mark.parametrize("kw", [dict(n_max=0), dict(n_max=2.5), dict(g=np.nan), dict(omega0=np.inf)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        JCParams(**kw)


def test_ladder_validation():
    with pytest.raises(ValueError):
        LadderSpec([0, 1], [0, 1], [1, 2])
    with pytest.raises(ValueError):
        LadderSpec([0, 1], [0, 1, 2], [1])
