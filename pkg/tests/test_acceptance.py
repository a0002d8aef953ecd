"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the lines as
they happen; they are repeated in the terminal summary either way).  The
``slow`` marker selects the n_max = 20..30 reality extension.
"""
import time

import numpy as np
import pytest

from nzqlq import oracles, scan, spectra
from nzqlq.liouville import (commutator_superoperator, delta_n_labels, non_hermitian_share,
                             nz_projector, qlq, qlq_sector, range_basis, sector_decompose,
                             sector_diagnostics)
from nzqlq.model import VACUUM, BathSpec, JCParams, build_jc, build_spin_boson

G_SET = (0.1, 0.3, 0.5, 1.0, 2.0)


def rel(x, target):
    return abs(x - target) / abs(target)


def delta0_on_range_q(params, bath=VACUUM):
    """Delta-N = 0 block of QLQ compressed onto an orthonormal basis of range(Q)."""
    H = build_jc(params)
    A = qlq_sector(H, 0, bath, params.omega_c)
    idx = np.flatnonzero(delta_n_labels(params.n_max) == 0)
    Ps = nz_projector(bath, params.n_max, params.omega_c).matrix[np.ix_(idx, idx)]
    V = range_basis(Ps)
    return V.conj().T @ A @ V


def test_criterion_01_delta0_spectrum_equals_closed_form(criterion):
    c = criterion("1", "Delta-N=0 spectrum equals the closed-form multiset")
    t0 = time.perf_counter()
    worst = 0.0
    for N in range(2, 16):
        for g in G_SET:
            for D in (0.0, 0.2, 0.5):
                p = JCParams(omega0=1 + D, g=g, n_max=N)
                w = np.sort(spectra.eigvals(delta0_on_range_q(p)).real)
                pred = oracles.vacuum_spectrum(N, g, D).multiset()
                dev = np.abs(w - pred).max() / np.abs(pred).max()
                worst = max(worst, dev)
                c.check(f"N={N},g={g},D={D}", dev <= 1e-10, f"{dev:.2e}")
    dt = time.perf_counter() - t0
    c.check("runtime < 120 s", dt < 120, f"{dt:.1f} s")
    print(f"  worst relative deviation {worst:.2e}, {dt:.1f} s")
    c.close()


def _max_imag(N, bath):
    A = qlq(build_jc(JCParams(g=0.3, n_max=N)), bath)
    return float(np.abs(spectra.eigvals(A).imag).max())


def test_criterion_02_global_reality(criterion):
    c = criterion("2", "JC projected generator has a real spectrum (n_max <= 16)")
    for bath in (VACUUM, BathSpec(0.5), BathSpec(1.0), BathSpec(2.0)):
        worst = 0.0
        for N in range(1, 17):
            mi = _max_imag(N, bath)
            worst = max(worst, mi)
            c.check(f"{bath.describe()} N={N}", mi < 1e-12, f"{mi:.1e}")
        print(f"  {bath.describe()}: max|Im| over n_max<=16 = {worst:.1e}")
    c.close()


@pytest.mark.slow
def test_criterion_02_global_reality_large_truncation(criterion):
    c = criterion("2-slow", "vacuum JC projected generator real up to n_max = 30")
    for N in (20, 25, 30):
        mi = _max_imag(N, VACUUM)
        print(f"  N={N}: max|Im| = {mi:.1e}")
        c.check(f"N={N}", mi < 1e-12, f"{mi:.1e}")
    c.close()


def test_criterion_03_sqrt2_suppression(criterion):
    c = criterion("3", "lowest Delta-N=0 mode sits at 2g/sqrt2")
    for N in range(2, 16):
        for g in G_SET:
            w = spectra.eigvals(delta0_on_range_q(JCParams(g=g, n_max=N))).real
            lam1 = w[w > 1e-6 * g].min()
            r = lam1 / (2 * g)
            # 0.7071068 is the 7-digit rounding of 1/sqrt2; the 1e-9 window is applied to the exact value
            c.check(f"N={N},g={g}", abs(r - 1 / np.sqrt(2)) <= 1e-9, f"{r:.10f}")
    c.close()


def test_criterion_04_metric_suite(criterion):
    c = criterion("4", "pseudo-Hermitian metric diagnostics")
    for N, target in ((2, 18.1), (3, 49.2), (5, 207.0)):
        m = spectra.build_metric(qlq(build_jc(JCParams(g=0.3, n_max=N))))
        c.check(f"kappa N={N}", rel(m.kappa, target) <= 0.02, f"{m.kappa:.3f}")
        print(f"  kappa(n_max={N}) = {m.kappa:.3f}")
    worst = 0.0
    for N in range(2, 16):
        m = spectra.build_metric(qlq(build_jc(JCParams(g=0.3, n_max=N))))
        worst = max(worst, m.intertwining_residual)
        c.check(f"intertwining N={N}", m.intertwining_residual <= 1e-11, f"{m.intertwining_residual:.1e}")
        c.check(f"hermitization N={N}", m.hermitization_residual < 1e-10, f"{m.hermitization_residual:.1e}")
    print(f"  max intertwining residual n_max<=15: {worst:.1e}")
    scenarios = [(3, 0.3, 1.0, None), (5, 0.3, 1.0, None), (3, 0.5, 1.0, None),
                 (3, 1.0, 1.0, None), (5, 0.3, 1.2, None), (3, 0.3, 1.0, 1.0)]
    for N, g, w0, beta in scenarios:
        m = spectra.build_metric(qlq(build_jc(JCParams(omega0=w0, g=g, n_max=N)), BathSpec(beta)))
        tag = f"({N},{g},{w0},{'vac' if beta is None else beta})"
        c.check(f"eta positive {tag}", m.min_eigenvalue > 0, f"{m.min_eigenvalue:.3e}")
        c.check(f"hermitization {tag}", m.hermitization_residual < 1e-10, f"{m.hermitization_residual:.1e}")
    c.close()


def test_criterion_05_sector_anatomy(criterion):
    c = criterion("5", "sector anatomy at (n_max=3, g=0.3)")
    A = qlq(build_jc(JCParams(g=0.3, n_max=3)))
    dec = sector_decompose(A, 3)
    rows = {r.delta_n: r for r in sector_diagnostics(dec, nz_projector(VACUUM, 3))}
    c.check("block diagonal", dec.leakage == 0.0, f"{dec.leakage:.1e}")
    dims = {0: 14, 1: 12, 2: 8, 3: 4, 4: 1}
    frob = {0: 2.55, 1: 4.32, 2: 5.84, 3: 6.06, 4: 4.00}
    resid = {0: 2.24, 1: 2.92}
    for dn in range(5):
        for s in (dn, -dn):
            r = rows[s]
            c.check(f"dim {s}", r.dim == dims[dn], str(r.dim))
            c.check(f"frobenius {s}", rel(r.frobenius, frob[dn]) <= 0.01, f"{r.frobenius:.4f}")
            if dn in resid:
                c.check(f"residual {s}", rel(r.herm_residual, resid[dn]) <= 0.01, f"{r.herm_residual:.4f}")
            else:
                c.check(f"residual {s}", r.herm_residual < 1e-12, f"{r.herm_residual:.1e}")
    share = non_hermitian_share(list(rows.values()), [r.delta_n for r in rows.values() if r.projector_norm > 0])
    c.check("non-Hermitian share in P-active sectors >= 98%", share >= 0.98, f"{share:.4f}")
    print(f"  non-Hermitian share carried by Delta-N in {{0,+-1}}: {share:.4%}")
    c.close()


def test_criterion_06_thermal_reduction(criterion):
    c = criterion("6", "thermal secular reduction")
    worst = 0.0
    for beta in (0.25, 0.5, 1.0, 2.0, 4.0):
        for N in range(1, 17):
            t = oracles.thermal_reduction(beta, 1.0, 0.3, N)
            c.check(f"interlacing beta={beta} N={N}", t.interlacing_ok())
            f0 = 1 - (t.p[0] + t.p[-1]) / 2
            c.check(f"f(0) beta={beta} N={N}", abs(t.f0 - f0) <= 1e-14, f"{abs(t.f0 - f0):.1e}")
            w = spectra.eigvals(qlq_sector(build_jc(JCParams(g=0.3, n_max=N)), 0, BathSpec(beta)))
            dev = max(np.abs(w - x).min() for x in t.nonzero)
            worst = max(worst, dev)
            c.check(f"oracle subset beta={beta} N={N}", dev <= 1e-9, f"{dev:.1e}")
    for N in (2, 5, 10, 16):
        t = oracles.thermal_reduction(np.inf, 1.0, 0.3, N)
        pred = np.array([0.5] + list(range(2, N + 1)), dtype=float)
        c.check(f"vacuum limit roots N={N}", np.abs(t.roots - pred).max() <= 1e-10)
    print(f"  worst oracle-to-spectrum distance: {worst:.1e}")
    c.close()


def test_criterion_07_closed_form_metric(criterion):
    c = criterion("7", "closed-form Delta-N=0 metric")
    table = {2: 4.13, 3: 5.5401, 4: 6.86, 5: 8.16, 6: 9.46, 7: 10.76, 8: 12.07, 9: 13.38,
             10: 14.71, 11: 16.04, 12: 17.38}
    for N, k in table.items():
        cf = oracles.closed_form_metric_delta0(N, 1.0)
        c.check(f"kappa N={N}", rel(cf.kappa, k) <= 0.005, f"{cf.kappa:.4f}")
        if N >= 9:
            c.check(f"bound N={N}", cf.kappa < 1.5 * N, f"{cf.kappa:.3f} vs {1.5 * N}")
            sec = spectra.sector_metric(qlq(build_jc(JCParams(g=0.3, n_max=N))), 0, N)
            c.check(f"numerical sector bound N={N}", sec.kappa < 1.5 * N, f"{sec.kappa:.3f}")
    for N in (3, 6, 9, 12):
        ks = [oracles.closed_form_metric_delta0(N, g).kappa for g in (0.1, 0.5, 1.0)]
        c.check(f"g-independence closed form N={N}", (max(ks) - min(ks)) / min(ks) <= 1e-8)
        kn = [spectra.sector_metric(qlq(build_jc(JCParams(g=g, n_max=N))), 0, N).kappa
              for g in (0.1, 0.5, 1.0)]
        c.check(f"g-independence numerical N={N}", (max(kn) - min(kn)) / min(kn) <= 1e-8)
    c.close()


def test_criterion_08_degenerate_perturbation(criterion):
    c = criterion("8", "resonant first-order coupling and its scaling")
    target = np.array([-0.3535534j, 0, 0, 0, 0.3535534j])
    for N in (4, 5, 6):
        d = oracles.degenerate_perturbation_matrix(N, 1.0)
        mu = d.eigenvalues[np.argsort(d.eigenvalues.imag)]
        c.check(f"W/g spectrum N={N}", np.abs(mu - target).max() <= 1e-6, str(np.round(mu, 7)))
    rows = scan.perturbation_scaling_table(4, 1.0)
    expect = [(0.353553, 1e-4), (0.353554, 1e-4), (0.353570, 1e-4), (0.351059, 1e-3)]
    for r, (v, tol) in zip(rows, expect):
        c.check(f"ratio lambda={r['lambda']:g}", abs(r["ratio"] - v) <= tol, f"{r['ratio']:.6f}")
        print(f"  lambda={r['lambda']:g}: max|Im|={r['max_imag']:.6e}, ratio={r['ratio']:.6f}")
    c.close()


def test_criterion_09_bright_subspace(criterion):
    c = criterion("9", "bright-subspace algebra")
    b = oracles.bright_subspace_constants()
    P = b.P_bright
    c.check("idempotent", np.abs(P @ P - P).max() < 1e-14)
    c.check("eigenvalues {1,1,0}", np.allclose(np.sort(np.linalg.eigvalsh(P)), [0, 1, 1], atol=1e-14))
    c.check("C_proj = 1/4", b.C_proj == 0.25, repr(b.C_proj))
    c.check("delta_s(g=1) = 0.854571 +- 1e-6", abs(b.delta_s_g1 - 0.854571) <= 1e-6,
            f"exact radical gives {b.delta_s_g1:.7f}")
    c.close()


def test_criterion_10_sigmax_contrast(criterion):
    c = criterion("10", "sigma_x coupling contrast")
    for N, n_cplx, mi_t in ((3, 0, None), (4, 4, 1.9e-2), (5, 12, 3.9e-2)):
        w = spectra.eigvals(qlq(build_spin_boson(JCParams(g=0.3, n_max=N))))
        rep = spectra.reality_report(w, 1e-8)
        if mi_t is None:
            c.check(f"N={N} real", rep.max_imag < 1e-12, f"max|Im|={rep.max_imag:.2e}")
        else:
            c.check(f"N={N} count", rep.n_complex == n_cplx, str(rep.n_complex))
            c.check(f"N={N} max|Im|", rel(rep.max_imag, mi_t) <= 0.10, f"{rep.max_imag:.2e}")
        print(f"  n_max={N}: {rep.n_complex} complex, max|Im|={rep.max_imag:.2e}")
    cont = scan.sigmax_continuation(4, np.round(np.arange(0.0, 0.4001, 0.01), 4))
    c.check("onset in s=-1 block", cont.block == -1, str(cont.block))
    c.check("g_c = 0.213 +- 0.003", cont.g_c is not None and abs(cont.g_c - 0.213) <= 0.003,
            f"{cont.g_c:.4f}" if cont.g_c else "none")
    c.check("s=+1 real through g=0.4", cont.max_imag[1].max() < 1e-12, f"{cont.max_imag[1].max():.1e}")
    c.close()


def test_criterion_11_scan_anchors(criterion):
    c = criterion("11", "deformation scan anchors")
    t0 = time.perf_counter()
    r = scan.lambda_scan(JCParams(g=1.0, n_max=8), scan.ScanGrid(step=0.002))
    c.check("(8,1.0) no bubbles", r.n_bub == 0, str(r.n_bub))
    c.check("(8,1.0) complex at first nonzero point", bool(r.complex_mask[1]) and r.lambda_first == 0.002,
            str(r.lambda_first))
    r = scan.lambda_scan(JCParams(g=1.0, n_max=4), scan.ScanGrid(step=0.002))
    c.check("(4,1.0) n_bub = 5 +- 1", abs(r.n_bub - 5) <= 1, str(r.n_bub))
    r = scan.lambda_scan(JCParams(g=0.30, n_max=10), scan.ScanGrid(step=0.001))
    c.check("(10,0.30) endpoint real", r.lambda_onset_terminal is None and not r.endpoint_complex)
    edges = [x for t in r.transitions() for x in t]
    near = min(abs(x - 0.920) for x in edges) if edges else np.inf
    c.check("(10,0.30) boundary within 0.920 +- 0.01", near <= 0.01, f"closest {near:.4f}")
    print(f"  (10,0.30) transitions: {r.transitions()}")
    dt = time.perf_counter() - t0
    c.check("runtime <= 600 s", dt <= 600, f"{dt:.0f} s")
    c.close()


def test_criterion_12_bare_resonance_bound(criterion):
    c = criterion("12", "bare-resonance coupling bound")
    for N, v in ((7, 0.410), (30, 0.186)):
        gc = float(oracles.bare_resonance_bound(N))
        c.check(f"g_c({N})", abs(gc - v) <= 5e-4, f"{gc:.5f}")
    c.close()


def test_criterion_13_lindblad(criterion):
    c = criterion("13", "cavity-damping response of the lowest mode")
    for N in (5, 10, 15):
        for g in (0.3, 1.0):
            r = scan.kappa_sweep(JCParams(g=g, n_max=N), np.linspace(0, 0.2 * g, 21))
            c.check(f"slope N={N} g={g}", r.slope is not None and abs(r.slope + 0.75) <= 1e-3,
                    f"{r.slope}")
            ok = r.tracked
            im = np.abs(r.lambda1.imag[ok]).max()
            c.check(f"lambda_1 real N={N} g={g}", im < 1e-10, f"{im:.1e}")
    for g in (0.1, 0.27, 0.5, 1.0):
        A = qlq_sector(build_jc(JCParams(g=g, n_max=7)), 0, kappa=0.2 * g)
        w = spectra.eigvals(A)
        n = int(np.count_nonzero(np.abs(w.imag) > 1e-12))
        c.check(f"census N=7 g={g}", n == 0, str(n))
    c.close()


def test_criterion_14_band_catalog(criterion):
    c = criterion("14", "band catalog resonances")
    cases = [("F", 0, 0.41421, 5e-6), ("G", 0, 0.732, 5e-4), ("H", 0, 1.000, 5e-4),
             ("G", 4, 0.410, 5e-4), ("F", 5, 0.197, 5e-4)]
    for fam, n, v, tol in cases:
        gr = oracles.band_resonance(oracles.FAMILIES[fam], n)
        c.check(f"g_res {fam} n={n}", abs(gr - v) <= tol, f"{gr:.5f}")
    lc = oracles.band_lambda_c(1, 0, 0.30, oracles.SIGMA_EFF_F0)
    c.check("lambda_c(F, 0.30)", abs(lc - 0.9196) <= 1e-3, f"{lc:.5f}")
    c.close()


def test_criterion_15_resolvent(criterion):
    c = criterion("15", "resolvent norm near the lowest mode")
    A = qlq(build_jc(JCParams(g=0.30, n_max=15)))
    for y, v in ((0.1, 28.0), (0.01, 290.0)):
        r = spectra.resolvent_norm(A, np.sqrt(2) * 0.30 + 1j * y)
        c.check(f"y={y}", rel(r, v) <= 0.15, f"{r:.2f}")
        print(f"  y={y}: 1/sigma_min = {r:.2f}")
    c.close()


def test_criterion_16_reduced_weights(criterion):
    c = criterion("16", "only the lowest pair carries reduced memory weight")
    for N in (3, 5, 10):
        for g, D in ((0.3, 0.0), (0.7, 0.3)):
            p = JCParams(omega0=1 + D, g=g, n_max=N)
            L = commutator_superoperator(build_jc(p))
            rw = spectra.reduced_weights(L, nz_projector(VACUUM, N), delta_n=0, n_max=N)
            lam1 = np.sqrt(D * D + 2 * g * g)
            m = np.abs(np.abs(rw.values) - lam1) < 1e-8
            c.check(f"two carrier groups N={N} g={g}", m.sum() == 2, str(m.sum()))
            other = rw.relative[~m].max()
            c.check(f"others vanish N={N} g={g} D={D}", other < 1e-12, f"{other:.1e}")
            cal = rw.calibrated[m] / (2 * g ** 4)
            c.check(f"calibrated weight N={N} g={g}", np.allclose(cal, 1.0, rtol=1e-10), str(cal))
            print(f"  N={N} g={g} D={D}: sum w^2 = {rw.sum_squares():.6g} "
                  f"= 2 g^4 * 2(n_max+1) x {rw.sum_squares() / (4 * g ** 4 * (N + 1)):.12f}")
    c.close()
