"""Command line front end; every subcommand emits one JSON document (or CSV)."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .liouville import (commutator_superoperator, nz_projector, projected_generator, qlq,
                        sector_decompose, sector_diagnostics)
from .model import BathSpec, JCParams, build_deformed, build_jc, build_spin_boson
from . import oracles, scan, spectra

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class ValidationError(ValueError):
    pass


# ------------------------------------------------------------------ schemas

_num = {"type": ["number", "null"]}
_cplx = {"type": "object", "required": ["re", "im"], "properties": {"re": _num, "im": _num}}
_meta = {"type": "object"}


def _obj(required, **props):
    return {"type": "object", "required": list(required), "properties": props}


SCHEMAS = {
    "spectrum": _obj(
        ["n_max", "g", "delta", "bath", "max_imag", "n_complex", "eigenvalues", "zero_mode_count"],
        n_max={"type": "integer"}, g=_num, delta=_num, bath={"type": "string"},
        max_imag=_num, n_complex={"type": "integer"},
        eigenvalues={"type": "array", "items": _cplx}, zero_mode_count={"type": "integer"}),
    "metric": _obj(
        ["kappa", "intertwining_residual", "min_eta_eigenvalue", "hermitization_residual", "per_sector"],
        kappa=_num, intertwining_residual=_num, min_eta_eigenvalue=_num,
        hermitization_residual=_num,
        per_sector={"type": "array", "items": _obj(
            ["delta_n", "dim", "frobenius", "herm_residual", "kappa"],
            delta_n={"type": "integer"}, dim={"type": "integer"}, frobenius=_num,
            herm_residual=_num, kappa=_num)}),
    "sectors": _obj(
        ["n_max", "g", "leakage", "rows", "non_hermitian_share"],
        n_max={"type": "integer"}, g=_num, leakage=_num, non_hermitian_share=_num,
        rows={"type": "array", "items": _obj(
            ["delta_n", "dim", "frobenius", "herm_residual", "projector_norm"])}),
    "scan": _obj(
        ["n_max", "g", "delta", "lambda_grid", "tol_imag", "lambda_first", "lambda_onset_terminal",
         "n_bub", "bubbles", "classification", "max_imag_overall", "trace"],
        n_max={"type": "integer"}, g=_num, delta=_num,
        lambda_grid=_obj(["start", "stop", "step"]), tol_imag=_num,
        lambda_first=_num, lambda_onset_terminal=_num, n_bub={"type": "integer"},
        bubbles={"type": "array", "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
        classification={"enum": ["P", "R", "B"]}, max_imag_overall=_num,
        trace={"type": "array", "items": _obj(["lambda", "max_imag", "n_complex"])}),
    "phase-map": _obj(
        ["rows"], rows={"type": "array", "items": _obj(
            ["g", "n_max", "classification", "lambda_first", "lambda_onset_terminal", "n_bub", "g_c"],
            classification={"enum": ["P", "R", "B"]})}),
    "thermal": _obj(
        ["n_max", "g", "beta", "q", "roots", "interlacing", "f0", "predicted", "max_deviation"]),
    "lindblad": _obj(
        ["n_max", "g", "delta", "slope", "slope_oracle", "trace"],
        slope=_num, slope_oracle=_num,
        trace={"type": "array", "items": _obj(["kappa", "lambda1", "overlap", "n_complex", "n_modes"])}),
    "bands": _obj(
        ["g", "entries"], entries={"type": "array", "items": _obj(
            ["family", "n", "label", "delta_E", "g_res", "lambda_c"])}),
    "oracle-check": _obj(
        ["checks", "all_pass"], all_pass={"type": "boolean"},
        checks={"type": "array", "items": _obj(
            ["name", "status", "max_deviation", "tolerance"],
            status={"enum": ["pass", "fail", "not_applicable"]})}),
}
for _s in SCHEMAS.values():
    _s["properties"]["meta"] = _meta


# ------------------------------------------------------------------ helpers

def _f(x):
    """JSON-safe float: NaN and inf become null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _c(z):
    z = complex(z)
    return {"re": _f(z.real), "im": _f(z.imag)}


def _sorted(w):
    w = np.asarray(w, dtype=complex)
    return w[np.lexsort((w.imag, w.real))]


def _params(a) -> JCParams:
    try:
        return JCParams(omega0=a.omega0, omega_c=a.omega_c, g=a.g, n_max=a.n_max)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _bath(a) -> BathSpec:
    if a.bath == "vacuum":
        return BathSpec()
    if a.beta is None:
        raise ValidationError("--bath thermal needs --beta")
    try:
        return BathSpec(a.beta)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _grid(text, parameter, tol):
    try:
        return scan.ScanGrid.parse(text, parameter, tol)
    except ValueError as exc:
        raise ValidationError(f"bad {parameter} grid {text!r}: {exc}") from exc


def _floats(text, name):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad {name} list {text!r}") from exc


def _hamiltonian(a, p):
    if a.model == "spin-boson":
        return build_spin_boson(p)
    return build_deformed(p, a.lam) if a.lam else build_jc(p)


# ------------------------------------------------------------------ commands

def cmd_spectrum(a):
    p, bath = _params(a), _bath(a)
    A = qlq(_hamiltonian(a, p), bath, p.omega_c, kappa=a.kappa)
    w = _sorted(spectra.eigvals(A))
    rep = spectra.reality_report(w, a.tol_imag)
    payload = {"n_max": p.n_max, "g": p.g, "delta": p.delta, "bath": bath.describe(),
               "model": a.model, "lambda": a.lam, "kappa": a.kappa,
               "max_imag": rep.max_imag, "n_complex": rep.n_complex,
               "eigenvalues": [_c(z) for z in w],
               "zero_mode_count": spectra.zero_mode_count(A)}
    rows = [("re", "im")] + [(z.real, z.imag) for z in w]
    return payload, rows


def cmd_metric(a):
    p, bath = _params(a), _bath(a)
    A = qlq(_hamiltonian(a, p), bath, p.omega_c)
    m = spectra.build_metric(A)
    dec = sector_decompose(A, p.n_max)
    diag = {r.delta_n: r for r in sector_diagnostics(dec, nz_projector(bath, p.n_max, p.omega_c))}
    per = []
    for dn in sorted(dec.blocks):
        try:
            k = spectra.build_metric(dec.block(dn)).kappa
        except spectra.AmbiguousZeroModes:
            k = None
        r = diag[dn]
        per.append({"delta_n": dn, "dim": r.dim, "frobenius": r.frobenius,
                    "herm_residual": r.herm_residual, "kappa": _f(k)})
    payload = {"n_max": p.n_max, "g": p.g, "delta": p.delta, "bath": bath.describe(),
               "kappa": m.kappa, "intertwining_residual": m.intertwining_residual,
               "min_eta_eigenvalue": m.min_eigenvalue,
               "hermitization_residual": m.hermitization_residual, "per_sector": per}
    rows = [tuple(per[0])] + [tuple(r.values()) for r in per]
    return payload, rows


def cmd_sectors(a):
    p, bath = _params(a), _bath(a)
    A = qlq(_hamiltonian(a, p), bath, p.omega_c)
    dec = sector_decompose(A, p.n_max)
    rows = sector_diagnostics(dec, nz_projector(bath, p.n_max, p.omega_c))
    out = [{"delta_n": r.delta_n, "dim": r.dim, "frobenius": r.frobenius,
            "herm_residual": r.herm_residual, "projector_norm": r.projector_norm,
            "non_hermitian_weight": r.non_hermitian_weight} for r in rows]
    active = [r.delta_n for r in rows if r.projector_norm > 0]
    from .liouville import non_hermitian_share
    payload = {"n_max": p.n_max, "g": p.g, "bath": bath.describe(), "leakage": dec.leakage,
               "non_hermitian_share": non_hermitian_share(rows, active), "rows": out}
    return payload, [tuple(out[0])] + [tuple(r.values()) for r in out]


def _scan_payload(p, res: scan.ScanResult, grid: scan.ScanGrid):
    return {"n_max": p.n_max, "g": p.g, "delta": p.delta, "lambda_grid": grid.describe(),
            "tol_imag": grid.tol_imag, "lambda_first": res.lambda_first,
            "lambda_onset_terminal": res.lambda_onset_terminal, "n_bub": res.n_bub,
            "bubbles": [list(b) for b in res.bubbles], "classification": res.classification,
            "max_imag_overall": _f(res.max_imag_overall),
            "transitions": [list(t) for t in res.transitions()], "gaps": res.gaps,
            "trace": [{"lambda": float(x), "max_imag": _f(m), "n_complex": int(n)}
                      for x, m, n in zip(res.points, res.max_imag, res.n_complex)]}


def cmd_scan(a):
    p = _params(a)
    grid = _grid(a.lambda_grid, "lambda", a.tol_imag)
    res = scan.lambda_scan(p, grid, _bath(a), threads=a.threads)
    payload = _scan_payload(p, res, grid)
    rows = [("lambda", "max_imag", "n_complex")] + [tuple(t.values()) for t in payload["trace"]]
    return payload, rows


def cmd_phase_map(a):
    gs = _floats(a.g_list, "--g-list")
    ns = [int(x) for x in _floats(a.n_max_list, "--n-max-list")]
    grid = _grid(a.lambda_grid, "lambda", a.tol_imag)
    try:
        rows = scan.phase_map(gs, ns, grid, a.omega0, a.omega_c, threads=a.threads)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    out = [{"g": r.g, "n_max": r.n_max, "classification": r.classification,
            "lambda_first": r.result.lambda_first,
            "lambda_onset_terminal": r.result.lambda_onset_terminal,
            "n_bub": r.result.n_bub, "g_c": r.g_c} for r in rows]
    return {"lambda_grid": grid.describe(), "tol_imag": grid.tol_imag, "rows": out}, \
        [tuple(out[0])] + [tuple(r.values()) for r in out]


def cmd_thermal(a):
    p = _params(a)
    if a.beta is None:
        raise ValidationError("thermal needs --beta")
    try:
        t = oracles.thermal_reduction(a.beta, p.omega_c, p.g, p.n_max, p.delta)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    w = spectra.eigvals(qlq(build_jc(p), BathSpec(a.beta), p.omega_c))
    dev = max(float(np.abs(w - x).min()) for x in t.nonzero)
    payload = {"n_max": p.n_max, "g": p.g, "delta": p.delta, "beta": a.beta,
               "q": t.q.tolist(), "roots": t.roots.tolist(), "interlacing": t.interlacing_ok(),
               "f0": t.f0, "f0_expected": 1 - (t.p[0] + t.p[-1]) / 2,
               "predicted": t.positive.tolist(), "max_deviation": dev,
               "max_imag": float(np.abs(w.imag).max())}
    rows = [("k", "q", "root", "eigenvalue")] + [
        (k + 1, t.q[k], t.roots[k], t.positive[k]) for k in range(p.n_max)]
    return payload, rows


def cmd_lindblad(a):
    p = _params(a)
    kg = _grid(a.kappa_grid, "kappa", a.tol_imag).points
    r = scan.kappa_sweep(p, kg)
    trace = [{"kappa": float(k), "lambda1": _c(l), "overlap": float(o),
              "n_complex": int(c), "n_modes": int(m)}
             for k, l, o, c, m in zip(r.kappa, r.lambda1, r.overlap, r.n_complex, r.n_modes)]
    payload = {"n_max": p.n_max, "g": p.g, "delta": p.delta, "slope": r.slope,
               "slope_overlap": r.slope_overlap,
               "slope_oracle": oracles.lindblad_slope(p.delta, p.g), "trace": trace}
    rows = [("kappa", "lambda1_re", "lambda1_im", "overlap", "n_complex", "n_modes")] + [
        (t["kappa"], t["lambda1"]["re"], t["lambda1"]["im"], t["overlap"], t["n_complex"], t["n_modes"])
        for t in trace]
    return payload, rows


def cmd_bands(a):
    sig = {}
    if a.sigma_eff is not None:
        sig[(a.band_family, a.band_n)] = a.sigma_eff
    try:
        ents = oracles.band_catalog(a.g, range(0, a.band_n_max + 1), sig)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    out = [{"family": e.family, "n": e.n, "label": e.label, "delta_E": e.delta_E,
            "g_res": e.g_res, "lambda_c": e.lambda_c} for e in ents]
    return {"g": a.g, "entries": out}, [tuple(out[0])] + [tuple(r.values()) for r in out]


def _check(name, dev, tol, applicable=True):
    if not applicable:
        return {"name": name, "status": "not_applicable", "max_deviation": None, "tolerance": tol}
    return {"name": name, "status": "pass" if dev <= tol else "fail",
            "max_deviation": _f(dev), "tolerance": tol}


def cmd_oracle_check(a):
    p, bath = _params(a), _bath(a)
    jc = a.model == "jc" and not a.lam
    H = _hamiltonian(a, p)
    A = qlq(H, bath, p.omega_c)
    N = p.n_max
    dec = sector_decompose(A, N)
    w0 = np.sort(spectra.eigvals(dec.block(0)).real)
    scale = max(1.0, float(np.abs(w0).max()))
    checks = []

    vac = oracles.vacuum_spectrum(N, p.g, p.delta)
    ok = jc and bath.is_vacuum
    if ok:
        # the canonical block also holds the two directions killed by Q
        pred = np.sort(np.concatenate([vac.multiset(), np.zeros(dec.block(0).shape[0] - 4 * N)]))
        dev = float(np.abs(w0 - pred).max())
    checks.append(_check("vacuum_delta0_spectrum", dev if ok else None, 1e-10 * scale, ok))
    checks.append(_check("sqrt2_suppression",
                         abs(vac.positive[0] / (2 * p.g) - 1 / np.sqrt(2)) if ok and p.delta == 0 else None,
                         1e-12, ok and p.delta == 0 and p.g > 0))

    okt = jc and not bath.is_vacuum
    if okt:
        t = oracles.thermal_reduction(bath.beta, p.omega_c, p.g, N, p.delta)
        wf = spectra.eigvals(A)
        dev_t = max(float(np.abs(wf - x).min()) for x in t.nonzero)
        checks.append(_check("thermal_interlacing", 0.0 if t.interlacing_ok() else 1.0, 0.0))
        checks.append(_check("thermal_oracle_subset", dev_t, 1e-9))
    else:
        checks.append(_check("thermal_interlacing", None, 0.0, False))
        checks.append(_check("thermal_oracle_subset", None, 1e-9, False))

    if jc:
        s = oracles.m1_secular_zeros(p, bath.beta)
        w1 = spectra.eigvals(dec.block(1))
        dev1 = max((float(np.abs(w1 - z).min()) for z in s.zeros), default=0.0)
        checks.append(_check("m1_secular_subset", dev1, 1e-9))
    else:
        checks.append(_check("m1_secular_subset", None, 1e-9, False))

    wf = spectra.eigvals(A)
    checks.append(_check("global_reality", float(np.abs(wf.imag).max()), 1e-12, jc))
    try:
        m = spectra.build_metric(A)
        checks.append(_check("metric_intertwining", m.intertwining_residual, 1e-10, jc))
        checks.append(_check("metric_positive", 0.0 if m.min_eigenvalue > 0 else 1.0, 0.0, jc))
    except (spectra.AmbiguousZeroModes, ValueError):
        checks.append(_check("metric_intertwining", None, 1e-10, False))
        checks.append(_check("metric_positive", None, 0.0, False))

    okc = jc and bath.is_vacuum and p.delta == 0
    if okc:
        cf = oracles.closed_form_metric_delta0(N, p.g)
        checks.append(_check("closed_form_eigenvectors", cf.max_residual, 1e-10))
    else:
        checks.append(_check("closed_form_eigenvectors", None, 1e-10, False))
    all_pass = all(c["status"] != "fail" for c in checks)
    payload = {"n_max": N, "g": p.g, "delta": p.delta, "bath": bath.describe(), "model": a.model,
               "checks": checks, "all_pass": all_pass}
    rows = [("name", "status", "max_deviation", "tolerance")] + [tuple(c.values()) for c in checks]
    return payload, rows


COMMANDS = {
    "spectrum": cmd_spectrum, "metric": cmd_metric, "sectors": cmd_sectors, "scan": cmd_scan,
    "phase-map": cmd_phase_map, "thermal": cmd_thermal, "lindblad": cmd_lindblad,
    "bands": cmd_bands, "oracle-check": cmd_oracle_check,
}


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    c = common.add_argument
    c("--n-max", type=int, default=3)
    c("--g", type=float, default=0.3)
    c("--omega0", type=float, default=1.0)
    c("--omega-c", type=float, default=1.0)
    c("--bath", choices=["vacuum", "thermal"], default="vacuum")
    c("--beta", type=float, default=None)
    c("--model", choices=["jc", "spin-boson"], default="jc")
    c("--lambda", dest="lam", type=float, default=0.0, help="counter-rotating deformation")
    c("--lambda-grid", default="0:1:0.002", help="start:stop:step or comma list")
    c("--kappa", type=float, default=0.0, help="cavity damping rate")
    c("--kappa-grid", default="0:0.06:0.002")
    c("--tol-imag", type=float, default=scan.DEFAULT_TOL_IMAG)
    c("--threads", type=int, default=os.cpu_count() or 1)
    c("--out", default=None, help="output path (stdout if omitted)")
    c("--format", choices=["json", "csv"], default="json")
    c("--params-json", default=None, help="JSON document of flag values (flags still override)")

    ap = argparse.ArgumentParser(prog="nzqlq", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "phase-map":
            sp.add_argument("--g-list", default="0.2,0.26,0.3")
            sp.add_argument("--n-max-list", default="7")
        if name == "bands":
            sp.add_argument("--sigma-eff", type=float, default=None)
            sp.add_argument("--band-family", choices=["F", "G", "H"], default="F")
            sp.add_argument("--band-n", type=int, default=0, help="internal index (label - 1)")
            sp.add_argument("--band-n-max", type=int, default=7)
    return ap


def _validate(a):
    if a.n_max < 1:
        raise ValidationError(f"--n-max must be >= 1, got {a.n_max}")
    for k in ("g", "omega0", "omega_c", "lam", "kappa", "tol_imag"):
        if not math.isfinite(getattr(a, k)):
            raise ValidationError(f"--{k.replace('_', '-')} must be finite")
    if a.g < 0:
        raise ValidationError("--g must be >= 0")
    if a.tol_imag <= 0:
        raise ValidationError("--tol-imag must be > 0")
    if a.threads < 1:
        raise ValidationError("--threads must be >= 1")
    if a.beta is not None and not a.beta > 0:
        raise ValidationError("--beta must be > 0")
    if a.n_max > 40:
        raise ValidationError("--n-max above 40 is outside dense desk scale")


def parse(argv):
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.params_json:
        try:
            with open(a.params_json, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read --params-json: {exc}") from exc
        defaults = {k.replace("-", "_"): v for k, v in doc.items() if k != "command"}
        if "lambda" in defaults:
            defaults["lam"] = defaults.pop("lambda")
        sp = ap._subparsers._group_actions[0].choices[a.command]
        known = {act.dest for act in sp._actions}
        unknown = set(defaults) - known
        if unknown:
            raise ValidationError(f"unknown keys in --params-json: {sorted(unknown)}")
        sp.set_defaults(**defaults)
        a = ap.parse_args(argv)
    _validate(a)
    return a


def _csv_text(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    for i, r in enumerate(rows):
        if i == 0:
            wr.writerow(r)
        else:
            wr.writerow(["%.17g" % v if isinstance(v, (float, np.floating)) else
                         ("" if v is None else v) for v in r])
    return buf.getvalue()


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".nzqlq-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = parse(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:   # argparse usage errors
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    t0 = time.perf_counter()
    try:
        payload, rows = COMMANDS[a.command](a)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (np.linalg.LinAlgError, spectra.AmbiguousZeroModes, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    payload["command"] = a.command
    payload["meta"] = {"version": __version__, "elapsed_s": time.perf_counter() - t0,
                       "host": platform.node(), "python": platform.python_version(),
                       "numpy": np.__version__, "argv": argv}
    if a.format == "json":
        text = json.dumps(payload, indent=1, allow_nan=False) + "\n"
    else:
        text = _csv_text(rows)
    if a.out:
        write_atomic(a.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
