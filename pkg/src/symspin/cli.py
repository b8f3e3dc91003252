"""Command-line front end: ``symspin <command> [options]``.

Commands: verify-algebra, heat, cp1, distance. Options may also come from a
JSON config file (same keys as the long flags, with dashes or underscores);
explicit flags take precedence. Exit codes: 0 pass, 1 failed check, 2 usage
or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA = 1
COMMANDS = ("verify-algebra", "heat", "cp1", "distance")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str | None = None
    n: int | None = None
    l: int | None = None
    cutoff: int | None = None
    t_grid: tuple | None = None
    mesh: int | None = None
    points: tuple | None = None
    out: str | None = None
    seed: int = 0
    tol: float | None = None
    convention: str = "verified"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("n", "cutoff", "mesh"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be positive")
        if self.l is not None and self.l < 0:
            raise ConfigError("l must be non-negative")
        if self.t_grid is not None:
            a, b, steps = self.t_grid
            if not (0 < a <= b <= 0.1) or steps < 1:
                raise ConfigError("t-grid must satisfy 0 < a <= b <= 0.1 with at least one step")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")


def parse_t_grid(text) -> tuple:
    """'a:b:steps' (log-spaced) -> (a, b, steps)."""
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError("t-grid must look like a:b:steps")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad t-grid {text!r}") from exc


def parse_points(text) -> tuple:
    """'x1,y1;x2,y2' -> ((x1, y1), (x2, y2))."""
    if isinstance(text, (list, tuple)):
        pts = [tuple(map(float, p)) for p in text]
    else:
        try:
            pts = [tuple(float(v) for v in p.split(",")) for p in str(text).split(";")]
        except ValueError as exc:
            raise ConfigError(f"bad points {text!r}") from exc
    if len(pts) != 2 or any(len(p) != 2 for p in pts):
        raise ConfigError("points must be two chart points 'x1,y1;x2,y2'")
    return tuple(pts)


def t_values(grid: tuple) -> np.ndarray:
    a, b, steps = grid
    return np.geomspace(a, b, steps) if steps > 1 else np.array([a])


def frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# ---------------------------------------------------------------------------
# Commands


def cmd_verify_algebra(cfg: RunConfig) -> tuple:
    from .suites import algebra_suite

    n, l, L = cfg.n or 3, 3 if cfg.l is None else cfg.l, cfg.cutoff or 8
    tol = cfg.tol or 1e-10
    if L < l + 2:
        raise ConfigError(f"cutoff L={L} too small for l={l}: need L >= l + 2")
    checks = algebra_suite(tuple(range(1, n + 1)), l, L, 100, cfg.seed, tol)
    ok = all(c.passed for c in checks)
    report = {"command": "verify-algebra", "n_max": n, "l_max": l, "L": L, "seed": cfg.seed, "tol": tol,
              "checks": [c.as_dict() for c in checks], "pass": ok}
    return report, 0 if ok else 1


def cmd_heat(cfg: RunConfig) -> tuple:
    from .geometry import model_from_name
    from .heat import CP1_INTEGRALS_OVER_PI, a_kahler2d_exact, heat_record

    name = cfg.model or "cp1"
    l = 0 if cfg.l is None else cfg.l
    tol = cfg.tol or 1e-8
    try:
        model = model_from_name(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rec = heat_record(name, model, l, True, cfg.convention)
    if model.kind == "round_sphere" and model.params.get("radius") == 0.5:
        rec["exact"] = dict(zip(("a0", "a2", "a4"), map(frac, a_kahler2d_exact(l, *CP1_INTEGRALS_OVER_PI))))
    ok = all(v <= tol * max(1.0, abs(rec["generic"][k])) for k, v in rec["discrepancy"].items())
    rec.update({"command": "heat", "convention": cfg.convention, "tol": tol, "pass": ok})
    return rec, 0 if ok else 1


def cmd_cp1(cfg: RunConfig) -> tuple:
    from .spectrum import cp1_asymptotics, default_t_grid, fit_asymptotics, heat_trace

    l = 0 if cfg.l is None else cfg.l
    tol = cfg.tol or 1e-6
    exact = cp1_asymptotics(l, 1).as_tuple()
    poly = cp1_asymptotics(None, 1).as_tuple()
    ts = default_t_grid(l) if cfg.t_grid is None else t_values(cfg.t_grid)
    try:
        fit = fit_asymptotics(l, ts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rel = [abs(f - float(e)) / abs(float(e)) for f, e in zip(fit.coeffs, exact)]
    ok = max(rel) <= tol
    series = [[float(t), heat_trace(l, float(t)).value] for t in ts]
    rec = {"command": "cp1", "l": l, "m": l + 1,
           "exact": dict(zip(("c_-1", "c_0", "c_1"), map(frac, exact))),
           "polynomials_in_m": dict(zip(("c_-1", "c_0", "c_1"), map(str, poly))),
           "fitted": dict(zip(("c_-1", "c_0", "c_1"), fit.coeffs)),
           "rel_err": dict(zip(("c_-1", "c_0", "c_1"), rel)),
           "condition": fit.condition, "series": series, "tol": tol, "pass": ok}
    return rec, 0 if ok else 1


def _distance_models(name: str) -> tuple:
    from .geometry import PRESETS

    preset = PRESETS.get(name)
    if preset is None or preset["kind"] not in ("flat_torus", "round_sphere"):
        raise ConfigError(f"distance needs a torus or sphere preset, got {name!r}")
    return preset


def cmd_distance(cfg: RunConfig) -> tuple:
    from .distance import VARIANTS, sphere_mesh, spectral_distance, torus_mesh

    name = cfg.model or "torus"
    preset = _distance_models(name)
    N = cfg.mesh or 64
    tol = cfg.tol or 0.02
    sphere = preset["kind"] == "round_sphere"
    ladder = [k for k in (N // 4, N // 2, N) if k >= 4]
    entries = []
    for k in ladder:
        mesh = sphere_mesh(k, preset.get("radius", 0.5)) if sphere else torus_mesh(k, preset.get("periods", (1, 1)))
        if cfg.points is not None:
            x, y = (mesh.nearest_vertex(p) for p in cfg.points)
        elif sphere:
            # antipodal vertices of the pole-offset grid: (theta_i, 0) and (pi - theta_i, pi)
            x, y = mesh.index(k // 2 - 1, 0), mesh.index(k // 2, k)
        else:
            x, y = mesh.nearest_vertex((0.0, 0.0)), mesh.nearest_vertex((0.5, 0.0))
        dg = float(mesh.geodesic_between(mesh.vertices[x], mesh.vertices[y]))
        ds, rel = {}, {}
        for solver in ("projected-ascent", "lipschitz-graph"):
            ds[solver] = {v: spectral_distance(mesh, x, y, solver, v).value for v in VARIANTS}
            rel[solver] = {v: (abs(d - dg) / dg if dg > 0 else abs(d)) for v, d in ds[solver].items()}
        pa = ds["projected-ascent"]
        agree = abs(pa["tilde"] - pa["D"]) / max(abs(pa["tilde"]), 1e-300) if pa["tilde"] else abs(pa["D"])
        entries.append({"N": k, "h": mesh.h, "x": mesh.vertices[x].tolist(), "y": mesh.vertices[y].tolist(),
                        "d_geodesic": dg, "d_spectral": ds, "rel_err": rel, "variant_rel_diff": agree})
    fin = entries[-1]
    ok = fin["rel_err"]["projected-ascent"]["tilde"] <= tol and fin["variant_rel_diff"] <= 1e-3
    rec = {"command": "distance", "model": name, "h": fin["h"], "x": fin["x"], "y": fin["y"],
           "d_spectral": fin["d_spectral"], "d_geodesic": fin["d_geodesic"], "rel_err": fin["rel_err"],
           "ladder": entries, "tol": tol, "pass": ok}
    return rec, 0 if ok else 1


HANDLERS = {"verify-algebra": cmd_verify_algebra, "heat": cmd_heat, "cp1": cmd_cp1, "distance": cmd_distance}


# ---------------------------------------------------------------------------
# Argument handling


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symspin", description="Symplectic spinor verification pipelines.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with option defaults")
        s.add_argument("--model")
        s.add_argument("--n", type=int)
        s.add_argument("--l", type=int)
        s.add_argument("--cutoff", type=int, help="fiber cutoff L")
        s.add_argument("--t-grid", dest="t_grid", help="a:b:steps, log-spaced")
        s.add_argument("--mesh", type=int, help="mesh resolution N")
        s.add_argument("--points", help="'x1,y1;x2,y2' in chart coordinates")
        s.add_argument("--out", help="output path for the JSON report")
        s.add_argument("--seed", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--convention", choices=("verified", "printed"))
    return p


def load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    keys = ("model", "n", "l", "cutoff", "t_grid", "mesh", "points", "out", "seed", "tol", "convention")
    merged = load_config(args.config) if args.config else {}
    unknown = set(merged) - set(keys) - {"command"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged.pop("command", None)
    for k in keys:
        v = getattr(args, k)
        if v is not None:
            merged[k] = v
    if merged.get("t_grid") is not None:
        merged["t_grid"] = parse_t_grid(merged["t_grid"])
    if merged.get("points") is not None:
        merged["points"] = parse_points(merged["points"])
    try:
        for k in ("n", "l", "cutoff", "mesh", "seed"):
            if merged.get(k) is not None:
                merged[k] = int(merged[k])
        if merged.get("tol") is not None:
            merged["tol"] = float(merged["tol"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if merged.get("seed") is None:
        merged.pop("seed", None)
    if merged.get("convention") is None:
        merged.pop("convention", None)
    elif merged["convention"] not in ("verified", "printed"):
        raise ConfigError("convention must be 'verified' or 'printed'")
    return RunConfig(args.command, **merged)


def _write_outputs(cfg: RunConfig, report: dict, stdout) -> None:
    text = json.dumps(report, indent=2)
    if cfg.out:
        out = Path(cfg.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
        if cfg.command == "cp1":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["t", "K"])
            w.writerows([[repr(t), repr(k)] for t, k in report["series"]])
            out.with_suffix(".csv").write_text(buf.getvalue())
    else:
        stdout.write(text + "\n")


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = resolve_config(args)
        report, code = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    report = {"schema": SCHEMA, **report, "config": _config_dict(cfg)}
    _write_outputs(cfg, report, stdout)
    return code


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


if __name__ == "__main__":
    raise SystemExit(main())
