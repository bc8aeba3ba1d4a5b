"""Command-line front end: ``unruhsim <subcommand> --config run.toml``.

Exit codes: 0 success, 2 configuration error, 3 numerical convergence
failure, 4 I/O error. ``UNRUHSIM_OUTPUT_DIR`` overrides the configured
output directory; ``--out`` overrides both.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from unruhsim import __version__
from unruhsim.analysis import (
    domination_angle,
    pair_probability,
    polar_theta_grid,
    single_photon_probability,
    spectral_map,
    spectral_slope,
    unruh_temperature,
)
from unruhsim.config import ConfigError, RunConfig, load_config
from unruhsim.kinematics import ConfigurationError, Trajectory, cutoff_wavenumber, solve_trajectory
from unruhsim.pulse import PulseProfile
from unruhsim.quadrature import ConvergenceError
from unruhsim.radiation import GaussianWindow, PhotonMode, unruh_amplitude
from unruhsim.units import CONSTANTS, from_natural, to_natural
from unruhsim.vacuum import BackgroundField, corrected_polarization, forward_leakage, permittivity

__all__ = ["main", "SUBCOMMANDS", "OUTPUT_DIR_ENV"]

OUTPUT_DIR_ENV = "UNRUHSIM_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4


class ConvergenceFailure(RuntimeError):
    """Some cells or sweep points did not converge; outputs were still written."""

    def __init__(self, items: list[str]):
        super().__init__(f"{len(items)} item(s) failed to converge")
        self.items = items


@dataclass
class Run:
    cfg: RunConfig
    subcommand: str
    out_dir: Path
    threads: int
    tol: dict
    files: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    # writers -------------------------------------------------------------

    def _write(self, name: str, text: str):
        path = self.out_dir / name
        data = text.encode()
        path.write_bytes(data)
        self.files.append({"name": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})

    def write_csv(self, name: str, columns: list[tuple[str, str]], rows, notes=()):
        buf = io.StringIO()
        buf.write(f"# unruhsim {__version__} {self.subcommand}\n")
        buf.write(f"# config_sha256 = {self.cfg.digest()}\n")
        for note in notes:
            buf.write(f"# {note}\n")
        buf.write("# units: " + ", ".join(f"{c} [{u}]" for c, u in columns) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([c for c, _ in columns])
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        self._write(name, buf.getvalue())

    def write_pgm(self, name: str, grid: np.ndarray, comment: str):
        if "pgm" in self.cfg.output.formats:
            self._write(name, _pgm(grid, comment))

    def write_manifest(self, status: str):
        c = CONSTANTS
        manifest = {
            "tool": "unruhsim",
            "version": __version__,
            "subcommand": self.subcommand,
            "status": status,
            "config_sha256": self.cfg.digest(),
            "alpha_qed": c.alpha_qed,
            "m_eV": c.m,
            "q": c.q,
            "g_eV^-1": c.g,
            "E_S_eV^2": c.E_S,
            "E_S_V_per_m": c.E_S * c.field_V_per_m,
            "abs_tol": self.tol["abs_tol"],
            "rel_tol": self.tol["rel_tol"],
            **{k: _jsonable(v) for k, v in self.results.items()},
            "files": self.files,
        }
        text = json.dumps(manifest, indent=2, sort_keys=False) + "\n"
        (self.out_dir / "manifest.json").write_text(text)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def _pgm(grid: np.ndarray, comment: str) -> str:
    """Plain PGM (P2), log10-normalized to 0..255; non-positive or NaN cells are 0."""
    g = np.asarray(grid, dtype=float)
    ok = np.isfinite(g) & (g > 0)
    img = np.zeros(g.shape, dtype=int)
    if np.any(ok):
        lg = np.log10(g[ok])
        lo, hi = float(lg.min()), float(lg.max())
        span = hi - lo if hi > lo else 1.0
        img[ok] = np.clip(np.rint(1.0 + 254.0 * (lg - lo) / span), 1, 255).astype(int)
    rows = img[::-1]  # largest theta at the top
    lines = ["P2", f"# {comment}", f"{g.shape[1]} {g.shape[0]}", "255"]
    lines += [" ".join(str(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


# pipelines ------------------------------------------------------------------


def _require(cfg: RunConfig, *sections):
    missing = [s for s in sections if getattr(cfg, s) is None]
    if missing:
        raise ConfigError([f"subcommand needs section(s): {', '.join('[' + s + ']' for s in missing)}"])


def _profile(cfg: RunConfig, **override) -> PulseProfile:
    kw = cfg.pulse.natural()
    kw.update(override)
    return PulseProfile(**kw)


def _trajectory(cfg: RunConfig, profile: PulseProfile, k_max=None) -> Trajectory:
    return solve_trajectory(profile, cfg.electron.u0, k_max=k_max)


def _summary(run: Run, traj: Trajectory, profile: PulseProfile):
    cut = cutoff_wavenumber(traj, profile)
    run.results.update(
        gamma_max=traj.gamma_max,
        E0_over_E_S=profile.E0 / CONSTANTS.E_S,
        k_cut_eV=cut.k_cut,
        k_cut_alt_eV=cut.k_cut_alt,
    )
    return cut


def cmd_trajectory(run: Run):
    cfg = run.cfg
    _require(cfg, "pulse")
    profile = _profile(cfg)
    traj = _trajectory(cfg, profile)
    _summary(run, traj, profile)
    s = traj.samples
    rows = zip(from_natural(s[:, 0], "s"), from_natural(s[:, 1], "m"), s[:, 2], s[:, 3])
    run.write_csv("trajectory.csv", [("t", "s"), ("z", "m"), ("beta", "1"), ("gamma", "1")], rows)


def _static_fixture(run: Run):
    fx = run.cfg.fixture
    sigma = to_natural(fx.window_sigma, fx.window_unit)
    win = GaussianWindow(sigma)
    lo, hi = win.support()
    zero = lambda t: np.zeros(np.shape(t))  # noqa: E731
    traj = Trajectory.from_velocity(zero, zero, (lo, hi))
    ks = np.linspace(to_natural(fx.k_min, fx.k_unit), to_natural(fx.k_max, fx.k_unit), fx.n_k)
    theta = math.radians(fx.theta_deg)
    g = CONSTANTS.g
    rows, worst = [], 0.0
    for k1 in ks:
        m1 = PhotonMode.linear(k1, theta, 0.0, 1)
        for k2 in ks:
            m2 = PhotonMode.linear(k2, theta, 0.0, 1)
            num = unruh_amplitude(traj, m1, m2, window=win, **run.tol).value
            exact = g / (2j * math.sqrt(k1 * k2)) * sigma * math.sqrt(2 * math.pi) * math.exp(-0.5 * (sigma * (k1 + k2)) ** 2)
            rel = abs(num - exact) / abs(exact)
            worst = max(worst, rel)
            rows.append((from_natural(k1, fx.k_unit), from_natural(k2, fx.k_unit), num.real, num.imag, exact.real, exact.imag, rel))
    u = fx.k_unit
    cols = [("k", u), ("k_prime", u), ("numeric_re", "eV^-3"), ("numeric_im", "eV^-3"), ("analytic_re", "eV^-3"), ("analytic_im", "eV^-3"), ("rel_error", "1")]
    run.write_csv("static_fixture.csv", cols, rows, notes=[f"window sigma = {sigma!r} eV^-1"])
    run.results["fixture_max_rel_error"] = worst


def cmd_map(run: Run):
    cfg = run.cfg
    if cfg.fixture is not None:
        _static_fixture(run)
        if cfg.map is None:
            return
    _require(cfg, "pulse", "map")
    mp = cfg.map
    k_lo, k_hi = to_natural(mp.k_min, mp.k_unit), to_natural(mp.k_max, mp.k_unit)
    k = np.geomspace(k_lo, k_hi, mp.n_k) if mp.k_spacing == "log" else np.linspace(k_lo, k_hi, mp.n_k)
    if mp.theta_spacing == "polar":
        # full [0, 180] deg range clustered toward the poles; min/max are ignored
        theta = polar_theta_grid(mp.n_theta)
    else:
        theta = np.radians(np.linspace(mp.theta_min_deg, mp.theta_max_deg, mp.n_theta))
    profile = _profile(cfg)
    traj = _trajectory(cfg, profile, k_max=2.0 * k_hi)
    _summary(run, traj, profile)
    sm = spectral_map(traj, k, theta, mp.pairing, mp.polarization, phi=math.radians(mp.phi_deg), threads=run.threads, **run.tol)
    k_out = from_natural(k, mp.k_unit)
    th_deg = np.degrees(theta)
    ratio = sm.ratio
    for name, grid, err, unit in (
        ("quantum", sm.quantum, sm.quantum_error, "eV^-3"),
        ("classical", sm.classical, sm.classical_error, "eV^-3"),
        ("ratio", ratio, None, "1"),
    ):
        rows = []
        for i, t in enumerate(th_deg):
            for j, kk in enumerate(k_out):
                row = [t, kk, grid[i, j]]
                if err is not None:
                    row.append(err[i, j])
                row.append(bool(sm.resolved[i, j]))
                rows.append(row)
        cols = [("theta", "deg"), ("k", mp.k_unit), (name, unit)]
        if err is not None:
            cols.append((f"{name}_error", unit))
        cols.append(("resolved", "bool"))
        notes = [f"pairing = {mp.pairing}", f"polarization = {mp.polarization}", "k' = k"]
        run.write_csv(f"{name}.csv", cols, rows, notes)
        shown = np.where(sm.resolved, grid, np.nan) if name == "ratio" else grid
        run.write_pgm(f"{name}.pgm", shown, f"{name} log10-scaled, rows theta descending, columns k ascending")
    good = sm.resolved & np.isfinite(ratio)
    run.results.update(
        cells=int(ratio.size),
        resolved_cells=int(good.sum()),
        quantum_dominant_cells=int(np.sum(good & (ratio > 1))),
        max_quantum_error=float(np.nanmax(sm.quantum_error)),
        max_classical_error=float(np.nanmax(sm.classical_error)),
    )
    failed = [f"theta={th_deg[i]:.6g} deg (all k)" for i in range(theta.size) if sm.failed[i].any()]
    if failed:
        raise ConvergenceFailure(failed)


def _directions(direction: str):
    return ("forward", "backward") if direction == "both" else (direction,)


def cmd_cone(run: Run):
    cfg = run.cfg
    _require(cfg, "pulse", "cone")
    cn = cfg.cone
    ks = [to_natural(v, cn.k_unit) for v in cn.k_ref]
    profile = _profile(cfg)
    traj = _trajectory(cfg, profile, k_max=2.0 * max(ks))
    _summary(run, traj, profile)
    jobs = [(k, d) for k in ks for d in _directions(cn.direction)]
    results, failed = _parallel(run, lambda job: domination_angle(traj, job[0], job[1], **run.tol), jobs)
    rows = []
    for (k, d), res in zip(jobs, results):
        if res is None:
            failed.append(f"k_ref={from_natural(k, cn.k_unit):.6g} {cn.k_unit} {d}")
            continue
        th = res.theta_max
        rows.append((from_natural(k, cn.k_unit), d, math.degrees(th) if th else float("nan"), bool(res.crossed), res.residual))
    run.write_csv("cone.csv", [("k_ref", cn.k_unit), ("direction", ""), ("theta_max", "deg"), ("crossed", "bool"), ("residual", "1")], rows)
    if failed:
        raise ConvergenceFailure(failed)


def _probability_point(run: Run, traj: Trajectory, profile: PulseProfile, single: bool):
    pr = run.cfg.probability
    cut = cutoff_wavenumber(traj, profile)
    k_max = pr.k_max_over_cut * cut.k_cut
    if pr.theta_max_deg is not None:
        theta_max = math.radians(pr.theta_max_deg)
    else:
        cone = domination_angle(traj, cut.k_cut, "forward", **run.tol)
        if not cone.crossed:
            raise ConvergenceError("no quantum-domination cone at k_cut; set theta_max_deg", math.nan, math.nan)
        theta_max = cone.theta_max
    pair = pair_probability(traj, theta_max, k_max, cones=pr.cones, rel_tol=pr.rel_tol, **run.tol)
    out = {"theta_max_deg": math.degrees(theta_max), "k_max_eV": k_max, "pair": pair.value, "pair_error": pair.error}
    out.update({f"pair_{k}": v for k, v in pair.channels.items()})
    if single:
        one = single_photon_probability(traj, theta_max, k_max, cones=pr.cones, **run.tol)
        out.update(single=one.value, single_error=one.error)
    return out


def cmd_probability(run: Run):
    cfg = run.cfg
    _require(cfg, "pulse", "probability")
    profile = _profile(cfg)
    traj = _trajectory(cfg, profile)
    _summary(run, traj, profile)
    res = _probability_point(run, traj, profile, cfg.probability.single_photon)
    cols = [(k, "eV" if k.endswith("_eV") else ("deg" if k.endswith("_deg") else "1")) for k in res]
    run.write_csv("probability.csv", cols, [list(res.values())], notes=[f"cones = {cfg.probability.cones}"])
    run.results.update(res)


def _parallel(run: Run, fn, jobs):
    def guarded(job):
        try:
            return fn(job)
        except ConvergenceError:
            return None

    if run.threads > 1:
        with ThreadPoolExecutor(max_workers=run.threads) as pool:
            results = list(pool.map(guarded, jobs))
    else:
        results = [guarded(j) for j in jobs]
    return results, []


def cmd_sweep(run: Run):
    cfg = run.cfg
    _require(cfg, "pulse", "sweep")
    sw = cfg.sweep
    if sw.observable in ("probability", "single_photon") and cfg.probability is None:
        raise ConfigError(["sweep observable needs a [probability] section"])
    unit = cfg.pulse.E0_unit if sw.parameter == "E0" else cfg.pulse.width_unit
    key = "E0" if sw.parameter == "E0" else "delta_t_pulse"

    def point(value):
        profile = _profile(cfg, **{key: to_natural(value, unit)})
        traj = _trajectory(cfg, profile)
        cut = cutoff_wavenumber(traj, profile)
        out = {"gamma_max": traj.gamma_max, "k_cut_eV": cut.k_cut, "k_cut_alt_eV": cut.k_cut_alt}
        out["T_unruh_boosted_eV"] = traj.gamma_max * unruh_temperature(CONSTANTS.q_over_m * profile.E0)
        if sw.observable == "cone":
            cone = domination_angle(traj, cut.k_cut, "forward", **run.tol)
            out["theta_max_deg"] = math.degrees(cone.theta_max) if cone.crossed else float("nan")
            out["value"] = out["theta_max_deg"] * traj.gamma_max
        elif sw.observable == "cutoff":
            out["value"] = cut.k_cut / (2.0 * math.pi * out["T_unruh_boosted_eV"])
        else:
            res = _probability_point(run, traj, profile, sw.observable == "single_photon")
            out.update(res)
            out["value"] = res["single"] if sw.observable == "single_photon" else res["pair"]
        return out

    results, failed = _parallel(run, point, list(sw.values))
    names = ["gamma_max", "k_cut_eV", "k_cut_alt_eV", "T_unruh_boosted_eV", "value"]
    rows = []
    for v, res in zip(sw.values, results):
        if res is None:
            failed.append(f"{sw.parameter}={v:g} {unit}")
            continue
        rows.append([v] + [res[n] for n in names])
    run.write_csv(
        "sweep.csv",
        [(sw.parameter, unit), ("gamma_max", "1"), ("k_cut", "eV"), ("k_cut_alt", "eV"), ("T_unruh_boosted", "eV"), (sw.observable, "1")],
        rows,
        notes=[f"observable = {sw.observable}" + (" (theta_max * gamma_max, deg)" if sw.observable == "cone" else "")],
    )
    good = [(r[0], r[-1]) for r in rows if np.isfinite(r[-1]) and r[-1] > 0]
    if len(good) >= 2:
        x, y = np.log([g[0] for g in good]), np.log([g[1] for g in good])
        run.results["fitted_exponent"] = float(np.polyfit(x, y, 1)[0])
    if failed:
        raise ConvergenceFailure(failed)


def cmd_slopes(run: Run):
    cfg = run.cfg
    _require(cfg, "pulse", "slopes")
    sl = cfg.slopes
    profile = _profile(cfg)
    traj = _trajectory(cfg, profile)
    cut = _summary(run, traj, profile)
    kc = cut.k_cut
    theta = sl.theta_gamma / traj.gamma_max
    fit = spectral_slope(traj, theta, sl.lo_over_cut * kc, sl.hi_over_cut * kc, n=sl.n, tail_k=[f * kc for f in sl.tail_over_cut], **run.tol)
    rows = [(k, q, l) for k, q, l in zip(fit.k, fit.quantum, fit.larmor)]
    run.write_csv("slopes.csv", [("k", "eV"), ("quantum", "eV^-3"), ("larmor", "eV^-3/2")], rows, notes=[f"theta = {theta!r} rad"])
    run.results.update(
        theta_rad=theta,
        quantum_slope=fit.quantum_slope,
        larmor_slope=fit.larmor_slope,
        tail_k_over_cut=list(sl.tail_over_cut),
        tail_suppression=list(fit.tail_suppression),
    )


def cmd_vacuum(run: Run):
    cfg = run.cfg
    _require(cfg, "vacuum")
    vc = cfg.vacuum
    E = np.array([to_natural(v, vc.field_unit) for v in vc.E0_vec])
    B = np.array([to_natural(v, vc.field_unit) for v in vc.B0_vec])
    bg = BackgroundField(E, B)
    k = to_natural(vc.k, vc.k_unit)
    closed = permittivity(bg).eps
    fd = permittivity(bg, "finite_difference").eps
    rows = [(i, j, closed[i, j], fd[i, j]) for i in range(3) for j in range(3)]
    run.write_csv("permittivity.csv", [("i", ""), ("j", ""), ("eps_closed", "1"), ("eps_finite_difference", "1")], rows)
    basis = corrected_polarization(vc.khat, bg)
    l1, l2 = basis.longitudinal(vc.khat)
    run.results.update(
        permittivity_fd_max_deviation=float(np.max(np.abs(closed - fd))),
        corrected_e1=list(basis.e1),
        corrected_e2=list(basis.e2),
        degenerate=basis.degenerate,
        leakage_e1=k * l1,
        leakage_e2=k * l2,
    )
    kh = np.asarray(vc.khat, float) / np.linalg.norm(vc.khat)
    if abs(abs(kh @ E) - np.linalg.norm(E)) < 1e-12 * np.linalg.norm(E) and abs(E @ B) < 1e-12 * (np.linalg.norm(E) * np.linalg.norm(B) + 1e-300):
        run.results["leakage_closed_formula"] = forward_leakage(k, float(np.linalg.norm(E)), float(np.linalg.norm(B)))


SUBCOMMANDS = {
    "trajectory": cmd_trajectory,
    "map": cmd_map,
    "cone": cmd_cone,
    "probability": cmd_probability,
    "sweep": cmd_sweep,
    "slopes": cmd_slopes,
    "vacuum": cmd_vacuum,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unruhsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"unruhsim {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="TOML run configuration")
        s.add_argument("--out", help="output directory (overrides config and environment)")
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--tolerance-scale", type=float, default=1.0, help="multiplies abs_tol and rel_tol")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1 or not args.tolerance_scale > 0:
        print("error: --threads must be >= 1 and --tolerance-scale > 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    out_dir = Path(args.out or os.environ.get(OUTPUT_DIR_ENV) or cfg.output.directory)
    tol = {
        "abs_tol": cfg.tolerance.abs_tol * args.tolerance_scale,
        "rel_tol": cfg.tolerance.rel_tol * args.tolerance_scale,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    run = Run(cfg, args.subcommand, out_dir, args.threads, tol)
    status, code = "ok", EXIT_OK
    try:
        SUBCOMMANDS[args.subcommand](run)
    except (ConfigError, ConfigurationError) as exc:
        for d in getattr(exc, "diagnostics", [str(exc)]):
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceFailure as exc:
        for item in exc.items:
            print(f"convergence failure: {item}", file=sys.stderr)
        run.results["failed"] = exc.items
        status, code = "convergence_failure", EXIT_CONVERGENCE
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        status, code = "convergence_failure", EXIT_CONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        run.write_manifest(status)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(run.files)} file(s) and manifest.json to {out_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
