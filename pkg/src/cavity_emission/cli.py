"""Command line for single-photon emission from a high-Q cavity.

Subcommands write plot-ready CSV for a scenario, list cavity resonances or run
the self-check suite.

    python -m cavity_emission run --config fig2 --out out/fig2
    python -m cavity_emission modes --stack lossless_slab --band 85 105
    python -m cavity_emission selfcheck
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import shutil
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import c2_analytic, c2_volterra
from .emission import (CONTINUING, SHORT_TERM, default_grid, efficiency, efficiency_numeric,
                       f_spectrum, pulse, quantum_state)
from .modes import (AtomConfig, RegimeError, ResonantMode, find_resonances, frequency_shift,
                    mode_constants, reduced_mode, zeta_of)
from .multilayer import load_stack, verify_green_identities
from . import qnt

CONFIG_DIR = Path(__file__).resolve().parent / "configs"
OUTPUT_KINDS = ("trajectory", "efficiency", "spectrum", "pulse", "wigner", "qnt")
REDUCED_KEYS = ("gamma_rad_ratio", "detuning_ratio", "rabi_ratio", "omega_ratio")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ScenarioConfig:
    name: str
    reduced: dict | None
    stack: dict | None
    regime: str
    tau: float | None
    outputs: dict
    base_dir: Path = field(default=CONFIG_DIR)
    raw: dict = field(default_factory=dict)


def resolve_path(name, base_dir: Path | None = None) -> Path:
    """A path as given, relative to ``base_dir``, or a bundled file name
    (with or without the .json suffix)."""
    p = Path(name)
    cands = [p]
    if base_dir is not None and not p.is_absolute():
        cands.append(base_dir / p)
    cands += [CONFIG_DIR / p.name, CONFIG_DIR / (p.name + ".json")]
    for c in cands:
        if c.is_file():
            return c
    raise FileNotFoundError(f"file not found: {name}")


def _num(d, key, where, positive=False, integer=False):
    if key not in d:
        raise ConfigError(f"missing key '{where}.{key}'")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key '{where}.{key}' must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"key '{where}.{key}' must be an integer")
    if positive and not v > 0:
        raise ConfigError(f"key '{where}.{key}' must be > 0")
    return int(v) if integer else float(v)


def _range3(d, key, where):
    v = d.get(key)
    if not (isinstance(v, list) and len(v) == 3):
        raise ConfigError(f"key '{where}.{key}' must be [start, stop, count]")
    lo, hi, n = v
    if not (isinstance(n, int) and n > 0):
        raise ConfigError(f"key '{where}.{key}' count must be a positive integer")
    if not hi > lo:
        raise ConfigError(f"key '{where}.{key}' needs stop > start")
    return float(lo), float(hi), n


def _validate_outputs(out, regime, tau):
    if not isinstance(out, dict) or not out:
        raise ConfigError("key 'outputs' must be a non-empty object")
    for k in out:
        if k not in OUTPUT_KINDS:
            raise ConfigError(f"unknown output 'outputs.{k}' (allowed: {', '.join(OUTPUT_KINDS)})")
    if "trajectory" in out:
        _num(out["trajectory"], "t_end", "outputs.trajectory", positive=True)
        _num(out["trajectory"], "n", "outputs.trajectory", positive=True, integer=True)
    for k in ("efficiency", "qnt"):
        if k in out:
            te = _num(out[k], "t_end", f"outputs.{k}", positive=True)
            _num(out[k], "n", f"outputs.{k}", positive=True, integer=True)
            if tau is not None and te < tau:
                raise ConfigError(f"key 'outputs.{k}.t_end' must be >= tau")
    if "spectrum" in out:
        s = out["spectrum"]
        t = _num(s, "t", "outputs.spectrum", positive=True)
        _num(s, "n", "outputs.spectrum", positive=True, integer=True)
        if "half_width" in s:
            _num(s, "half_width", "outputs.spectrum", positive=True)
        if tau is not None and t < tau:
            raise ConfigError("key 'outputs.spectrum.t' must be >= tau")
    if "pulse" in out:
        p = out["pulse"]
        _range3(p, "z", "outputs.pulse")
        ts = p.get("t")
        if not (isinstance(ts, list) and ts and all(isinstance(x, (int, float)) and x >= 0 for x in ts)):
            raise ConfigError("key 'outputs.pulse.t' must be a non-empty list of times >= 0")
        if tau is not None and min(ts) < tau:
            raise ConfigError("key 'outputs.pulse.t' times must be >= tau")
    if "wigner" in out:
        w = out["wigner"]
        t = _num(w, "t", "outputs.wigner", positive=True)
        _range3(w, "x", "outputs.wigner")
        if tau is not None and t < tau:
            raise ConfigError("key 'outputs.wigner.t' must be >= tau")


def parse_config(d: dict, base_dir: Path = CONFIG_DIR) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    has_r, has_s = "reduced" in d, "stack" in d
    if has_r == has_s:
        raise ConfigError("config needs exactly one parameter source: 'reduced' or 'stack'")
    regime = d.get("regime", CONTINUING)
    if regime not in (CONTINUING, SHORT_TERM):
        raise ConfigError(f"key 'regime' must be '{CONTINUING}' or '{SHORT_TERM}'")
    tau = d.get("tau")
    if regime == CONTINUING and tau is not None:
        raise ConfigError("key 'tau' is only allowed with regime 'short-term'")
    if regime == SHORT_TERM:
        if tau is None:
            raise ConfigError("regime 'short-term' requires key 'tau'")
        tau = _num(d, "tau", "config", positive=True)
    red = st = None
    if has_r:
        red = d["reduced"]
        if not isinstance(red, dict):
            raise ConfigError("key 'reduced' must be an object")
        for k in REDUCED_KEYS:
            _num(red, k, "reduced")
        if "length_ratio" in red:
            _num(red, "length_ratio", "reduced", positive=True)
    else:
        st = d["stack"]
        if not isinstance(st, dict):
            raise ConfigError("key 'stack' must be an object")
        if not isinstance(st.get("file"), str):
            raise ConfigError("missing key 'stack.file'")
        band = st.get("band")
        if not (isinstance(band, list) and len(band) == 2):
            raise ConfigError("key 'stack.band' must be [lo, hi]")
        _num(st, "omega_near", "stack", positive=True)
        atom = st.get("atom")
        if not isinstance(atom, dict):
            raise ConfigError("missing key 'stack.atom'")
        _num(atom, "z_A", "stack.atom", positive=True)
        _num(atom, "coupling", "stack.atom", positive=True)
        _num(atom, "detuning", "stack.atom")
    outputs = d.get("outputs")
    _validate_outputs(outputs, regime, tau)
    return ScenarioConfig(str(d.get("name", "scenario")), red, st, regime, tau, outputs, base_dir, d)


def load_config(path) -> ScenarioConfig:
    p = resolve_path(path)
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    cfg = parse_config(d, p.parent)
    build_mode(cfg)          # regime constraints are checked eagerly
    return cfg


def build_mode(cfg: ScenarioConfig):
    """(mode, atom, extra manifest data) for a scenario."""
    if cfg.reduced is not None:
        r = cfg.reduced
        try:
            mode, atom = reduced_mode(r["gamma_rad_ratio"], r["detuning_ratio"], r["rabi_ratio"],
                                      r["omega_ratio"], r.get("length_ratio", 0.7))
        except RegimeError as exc:
            raise RegimeError(f"{exc} (reduced parameters violate gamma_k < Gamma_k)") from None
        return mode, atom, {"source": "reduced"}
    s = cfg.stack
    stack = load_stack(resolve_path(s["file"], cfg.base_dir))
    modes = find_resonances(stack, s["band"])
    if not modes:
        raise ConfigError(f"no resonance found in band {s['band']}")
    sel = int(np.argmin([abs(m.omega_k - s["omega_near"]) for m in modes]))
    a = s["atom"]
    wt0 = modes[sel].omega_k - a["detuning"]
    atom = AtomConfig(omega0=wt0, z_A=a["z_A"], coupling=a["coupling"])
    full = [mode_constants(stack, m, atom) for m in modes]
    shift = frequency_shift(full, atom, sel) if len(full) > 1 else 0.0
    atom = AtomConfig(omega0=wt0 + shift, z_A=a["z_A"], coupling=a["coupling"], delta_omega=shift)
    mode = full[sel]
    if mode.Gamma * stack.length > 0.5 * math.pi:
        raise RegimeError(f"line width {mode.Gamma:.4g} is not small against the line spacing: high-Q assumption fails")
    try:
        mode.check_regime()
    except RegimeError as exc:
        raise RegimeError(f"{exc} (reduce 'stack.atom.coupling')") from None
    return mode, atom, {"source": "stack", "stack": stack.to_dict(), "mode_index": sel,
                        "n_modes_in_band": len(modes), "frequency_shift": shift}


# ---------------------------------------------------------------------------
# running

def _fmt(x) -> str:
    return f"{x:.9g}"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def _time_grid(sp, t0=0.0):
    return np.linspace(t0, sp["t_end"], int(sp["n"]))


def _mode_summary(mode: ResonantMode) -> dict:
    return {"omega_k": mode.omega_k, "Gamma_k": mode.Gamma, "rho_k": mode.rho, "gamma_k": mode.gamma,
            "eta_inf": mode.eta_inf, "gamma_rad": mode.gamma_rad, "R_k": mode.R,
            "kappa": [mode.kappa.real, mode.kappa.imag], "T": [mode.T.real, mode.T.imag],
            "zeta": [mode.zeta.real, mode.zeta.imag], "detuning": mode.detuning, "length": mode.length}


def _run_outputs(cfg: ScenarioConfig, mode, atom, out: Path) -> list:
    o, tau, regime = cfg.outputs, cfg.tau, cfg.regime
    st = regime == SHORT_TERM
    files = []
    if "trajectory" in o:
        t = _time_grid(o["trajectory"])
        c = c2_analytic(mode, atom, t)
        _write_csv(out / "trajectory.csv", ["t", "abs2_c2", "re_c2", "im_c2"],
                   zip(t, np.abs(c) ** 2, c.real, c.imag))
        files.append("trajectory.csv")
    if "efficiency" in o:
        t = _time_grid(o["efficiency"], tau if st else 0.0)
        eta = efficiency(mode, atom, t, regime, tau)
        c2 = np.abs(c2_analytic(mode, atom, t)) ** 2
        if st:
            _write_csv(out / "efficiency.csv", ["t", "tau", "eta", "abs2_c2"],
                       zip(t, np.full_like(t, tau), eta, c2))
        else:
            _write_csv(out / "efficiency.csv", ["t", "eta", "abs2_c2"], zip(t, eta, c2))
        files.append("efficiency.csv")
    if "spectrum" in o:
        s = o["spectrum"]
        dw = default_grid(mode, s.get("half_width"), int(s["n"]))
        F = f_spectrum(mode, atom, dw, s["t"], regime, tau)
        _write_csv(out / "spectrum.csv", ["omega_offset", "re_F", "im_F", "abs2_F"],
                   zip(dw, F.real, F.imag, np.abs(F) ** 2))
        files.append("spectrum.csv")
    if "pulse" in o:
        p = o["pulse"]
        lo, hi, n = _range3(p, "z", "outputs.pulse")
        z = np.linspace(lo, hi, n)
        g = pulse(mode, atom, z, np.asarray(p["t"], dtype=float), regime, tau)
        rows = ((g.t[i], g.z[j], abs(g.phi[i, j]), g.phi[i, j].real, g.phi[i, j].imag, g.region[i, j])
                for i in range(g.t.size) for j in range(g.z.size))
        _write_csv(out / "pulse.csv", ["t", "z", "abs_phi", "re_phi", "im_phi", "region"], rows)
        files.append("pulse.csv")
    if "wigner" in o:
        w = o["wigner"]
        lo, hi, n = _range3(w, "x", "outputs.wigner")
        x = np.linspace(lo, hi, n)
        eta = efficiency(mode, atom, w["t"], regime, tau)
        rep = (qnt.split_mode_etas_st(mode, atom, w["t"], tau) if st
               else qnt.split_mode_etas(mode, atom, w["t"]))
        state = quantum_state(eta)
        X, P = np.meshgrid(x, x, indexing="ij")
        B = X + 1j * P
        cols = [X.ravel(), P.ravel(), state.wigner(B).ravel(), state.char(B).ravel(),
                qnt.qnt_characteristic(B, rep.eta_gt).ravel(), qnt.qnt_characteristic(B, rep.eta_lt).ravel()]
        _write_csv(out / "wigner.csv", ["x", "p", "wigner", "char", "char_qnt_gt", "char_qnt_lt"], zip(*cols))
        files.append("wigner.csv")
    if "qnt" in o:
        q = o["qnt"]
        if st:
            t = np.linspace(tau, q["t_end"], int(q["n"]))
            reps = [qnt.split_mode_etas_st(mode, atom, ti, tau) for ti in t]
            _write_csv(out / "qnt.csv", ["t", "tau", "eta", "eta_gt", "eta_lt", "eta_rel", "eta_lt_closed"],
                       ((r.t, tau, r.eta, r.eta_gt, r.eta_lt, r.eta_rel, r.eta_lt_closed) for r in reps))
        else:
            t = np.linspace(0, q["t_end"], int(q["n"]) + 1)[1:]
            reps = [qnt.split_mode_etas(mode, atom, ti) for ti in t]
            _write_csv(out / "qnt.csv", ["t", "eta", "eta_gt", "eta_lt", "eta_rel"],
                       ((r.t, r.eta, r.eta_gt, r.eta_lt, qnt.eta_rel(mode, r.t)) for r in reps))
        files.append("qnt.csv")
    return files


def run_scenario(cfg: ScenarioConfig, out_dir) -> dict:
    """Write the requested CSV files and manifest.json into ``out_dir``.
    Files are produced in a scratch directory and moved only on success."""
    t0 = time.perf_counter()
    out = Path(out_dir)
    mode, atom, extra = build_mode(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out.parent))
    try:
        files = _run_outputs(cfg, mode, atom, tmp)
        manifest = {"name": cfg.name, "tool": "cavity_emission", "version": __version__,
                    "config": cfg.raw, "regime": cfg.regime, "tau": cfg.tau,
                    "mode": _mode_summary(mode),
                    "atom": {"omega0": atom.omega0, "omega_tilde0": atom.omega_tilde0, "z_A": atom.z_A,
                             "coupling": atom.coupling},
                    **extra, "files": files}
        manifest["wall_time_s"] = round(time.perf_counter() - t0, 3)
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        out.mkdir(parents=True, exist_ok=True)
        for f in files + ["manifest.json"]:
            shutil.move(str(tmp / f), str(out / f))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return manifest


# ---------------------------------------------------------------------------
# self-check

@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


def _fig2():
    return reduced_mode(0.9, 0.1, 10.0, 2e8)


def _perturbed(mode: ResonantMode, rel: float) -> ResonantMode:
    if rel == 0:
        return mode
    G = mode.Gamma * (1 + rel)
    m = replace(mode, Gamma=G)
    return replace(m, zeta=zeta_of(m.alpha, m.Omega, m.mu))


def selfcheck(perturb_gamma: float = 0.0, report=print) -> list:
    """Run the invariant checks; ``perturb_gamma`` is a fault-injection hook that
    shifts Gamma_k (relative) in the closed-form side of the dynamics check."""
    res = []

    def add(name, residual, tol):
        r = CheckResult(name, float(residual), tol)
        res.append(r)
        if report:
            report(f"{'PASS' if r.passed else 'FAIL'}  {name:<28s} residual={r.residual:.3e}  tol={tol:.1e}")

    lor = load_stack(CONFIG_DIR / "lorentz_slab.json")
    reps = [verify_green_identities(lor, (1, 0.3), (1, 0.7), w) for w in (92.0, 93.6, 95.1)]
    add("green_sum_rule", max(r.sum_rule_residual for r in reps), 1e-8)
    add("green_outgoing", max(r.outgoing_residual for r in reps), 1e-8)

    mode, atom = _fig2()
    traj = c2_volterra(mode, atom, 10.0, 2e-4)
    ref = c2_analytic(_perturbed(mode, perturb_gamma), atom, traj.t)
    add("volterra_vs_analytic", np.max(np.abs(traj.c2 - ref)), 1e-6)

    dw = default_grid(mode, 200 * mode.rho, 2**17)
    add("efficiency_quadrature", max(abs(efficiency_numeric(mode, atom, t, dw=dw) / efficiency(mode, atom, t) - 1)
                                     for t in (1.0, 5.0, 50.0)), 1e-3)
    inv = 0.0
    for tau in (0.3, 2.2):
        e = efficiency(mode, atom, np.array([tau, 2 * tau, 10 * tau]), SHORT_TERM, tau)
        inv = max(inv, float(np.ptp(e)))
    add("short_term_invariance", inv, 1e-10)

    add("wigner_normalization", max(abs(quantum_state(e).wigner_norm() - 1) for e in (0.0, 0.5, 0.9, 1.0)), 1e-8)

    wide = np.linspace(-4000, 4000, 2**18)
    rm = qnt.relevant_mode(mode, 1.0, wide)
    add("relevant_mode_norm", abs(rm.eta_rel_numeric / rm.eta_rel - 1), 1e-6)
    add("orthogonality", max(qnt.commutator_mode(mode, t, wide).overlap_normalized for t in (1.0, 5.0)), 1e-3)
    add("eta_gt_limit", abs(qnt.split_mode_etas(mode, atom, 50.0).eta_gt - efficiency(mode, atom, 50.0)), 1e-3)
    add("kappa_identity_reduced", abs(abs(mode.kappa) ** 2 / (mode.R**2 * mode.gamma_rad / (2 * math.pi)) - 1), 1e-10)

    ll = load_stack(CONFIG_DIR / "lossless_slab.json")
    sm = min(find_resonances(ll, (85.0, 105.0)), key=lambda m: abs(m.omega_k - 94.25))
    a = AtomConfig(omega0=sm.omega_k, z_A=0.5, coupling=1e-5)
    sm = mode_constants(ll, sm, a)
    if report:
        report(f"INFO  lossless stack: omega_k={sm.omega_k:.6f}  Gamma_k={sm.Gamma:.6e}  "
               f"gamma_rad/Gamma_k={sm.gamma_rad / sm.Gamma:.6f}")
    add("lossless_gamma_rad_ratio", abs(sm.gamma_rad / sm.Gamma - 1), 1e-2)
    add("kappa_identity_stack", abs(abs(sm.kappa) ** 2 / (sm.R**2 * sm.gamma_rad / (2 * math.pi)) - 1), 1e-2)
    return res


# ---------------------------------------------------------------------------
# entry point

def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    man = run_scenario(cfg, args.out)
    print(f"wrote {', '.join(man['files'])}, manifest.json to {args.out} ({man['wall_time_s']} s)")
    return 0


def _cmd_modes(args) -> int:
    stack = load_stack(resolve_path(args.stack))
    modes = find_resonances(stack, args.band)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["index", "omega_k", "Gamma_k", "Q", "gamma_rad", "gamma_rad_over_Gamma"])
    l = stack.length
    for i, m in enumerate(modes):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)   # zero coupling is intended here
            m = mode_constants(stack, m, AtomConfig(omega0=m.omega_k, z_A=0.5 * l, coupling=0.0))
        w.writerow([i] + [_fmt(v) for v in (m.omega_k, m.Gamma, m.omega_k / m.Gamma, m.gamma_rad,
                                             m.gamma_rad / m.Gamma)])
    return 0


def _cmd_selfcheck(args) -> int:
    res = selfcheck(args.perturb_gamma)
    bad = [r.name for r in res if not r.passed]
    print(f"{len(res) - len(bad)}/{len(res)} checks passed" + (f"; failed: {', '.join(bad)}" if bad else ""))
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavity-emission", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a scenario config and write CSV + manifest.json")
    r.add_argument("--config", required=True, help="config path or bundled name (fig2, fig3, ...)")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=_cmd_run)
    m = sub.add_parser("modes", help="list cavity resonances of a layer stack in a band")
    m.add_argument("--stack", required=True, help="stack JSON path or bundled name")
    m.add_argument("--band", required=True, nargs=2, type=float, metavar=("LO", "HI"))
    m.set_defaults(func=_cmd_modes)
    s = sub.add_parser("selfcheck", help="run the invariant checks")
    s.add_argument("--perturb-gamma", type=float, default=0.0, help=argparse.SUPPRESS)
    s.set_defaults(func=_cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RegimeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:   # noqa: BLE001  diagnostics for any module failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
