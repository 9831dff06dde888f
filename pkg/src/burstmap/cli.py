"""Command-line interface.

Configuration is a TOML file with the sections ``[model]``,
``[tolerances]``, ``[protocol]`` and ``[output]``; unknown keys are
rejected.  Every artifact carries the schema tag ``adaptmap/1`` and a
SHA-256 digest of the resolved configuration.  Exit status is 0 on success,
1 on a domain error and 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import adaptmap, chaos, flow, model, orbits, singular, sweep
from .errors import BurstmapError, ConfigError
from .model import ModelParams

SCHEMA = "adaptmap/1"

_MODEL_KEYS = {"family": str, "a": float, "b": float, "I": float, "d": float,
               "eps": float, "v_reset": float}
_TOL_DEFAULTS = {"map_tol": 1e-10, "orbit_tol": 1e-7, "root_tol": 1e-10}
_PROTOCOL_DEFAULTS = {"transient": 1000, "sample": 100, "p_max": 64, "warm_start": True,
                      "map_tol": 1e-8, "v_min": 0.8, "v_max": 1.8, "step": 1e-3}
_OUTPUT_DEFAULTS = {"format": "", "path": "-"}

STANDARD_TOML = """\
[model]
family = "quartic"
a = 0.2
b = 0.7
I = 2.0
d = 1.0
eps = 0.4
v_reset = 1.3
"""


@dataclass(frozen=True)
class Tolerances:
    map_tol: float
    orbit_tol: float
    root_tol: float


@dataclass(frozen=True)
class OutputSpec:
    format: str
    path: str


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    tolerances: Tolerances
    protocol: dict
    output: OutputSpec

    def as_dict(self) -> dict:
        p = self.params
        return {
            "model": {"family": p.family.value, "a": p.a, "b": p.b, "I": p.I, "d": p.d,
                      "eps": p.eps, "v_reset": p.v_reset},
            "tolerances": vars(self.tolerances).copy(),
            "protocol": dict(self.protocol),
            "output": vars(self.output).copy(),
        }

    def digest(self) -> str:
        """Hash of everything that affects results (output settings excluded)."""
        body = self.as_dict()
        del body["output"]
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def _typed(section: str, key: str, value, kind):
    where = f"{section}.{key}"
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{where}: must be finite")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true or false, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


def _section(doc: dict, name: str, schema: dict, defaults: dict, required=()) -> dict:
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"[{name}]: unknown key {unknown[0]!r}")
    out = dict(defaults)
    for key in required:
        if key not in raw:
            raise ConfigError(f"{name}.{key}: missing required field {key!r}")
    for key, value in raw.items():
        out[key] = _typed(name, key, value, schema[key])
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    unknown = sorted(set(doc) - {"model", "tolerances", "protocol", "output"})
    if unknown:
        raise ConfigError(f"unknown section [{unknown[0]}]")
    m = _section(doc, "model", _MODEL_KEYS, {}, required=tuple(_MODEL_KEYS))
    t = _section(doc, "tolerances", dict.fromkeys(_TOL_DEFAULTS, float), _TOL_DEFAULTS)
    pschema = {k: type(v) for k, v in _PROTOCOL_DEFAULTS.items()}
    pschema["w0"] = float
    pr = _section(doc, "protocol", pschema, _PROTOCOL_DEFAULTS)
    o = _section(doc, "output", dict.fromkeys(_OUTPUT_DEFAULTS, str), _OUTPUT_DEFAULTS)

    for key in ("map_tol", "orbit_tol", "root_tol"):
        if not t[key] > 0:
            raise ConfigError(f"tolerances.{key}: must be > 0")
    for key in ("transient", "sample", "p_max"):
        if pr[key] < 1:
            raise ConfigError(f"protocol.{key}: must be >= 1")
    if not (pr["step"] > 0 and pr["map_tol"] > 0):
        raise ConfigError("protocol.step and protocol.map_tol must be > 0")
    if not pr["v_max"] >= pr["v_min"]:
        raise ConfigError("protocol.v_max: must be >= protocol.v_min")
    if o["format"] not in ("", "csv", "json"):
        raise ConfigError(f"output.format: expected csv or json, got {o['format']!r}")
    try:
        params = ModelParams(model.Family(m["family"]) if m["family"] in ("quartic", "exponential")
                             else _bad_family(m["family"]),
                             m["a"], m["b"], m["I"], m["d"], m["eps"], m["v_reset"])
    except ValueError as exc:
        field = str(exc).split()[0]
        raise ConfigError(f"model.{field}: {exc}") from None
    return RunConfig(params, Tolerances(**t), pr, OutputSpec(**o))


def _bad_family(name):
    raise ConfigError(f"model.family: expected quartic or exponential, got {name!r}")


# -- serialization -----------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits; enough for an exact round trip."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_json(obj, indent: int = 0, step: int = 2) -> str:
    pad = " " * (indent + step)
    end = " " * indent
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + step) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_doc(cfg: RunConfig, command: str, result) -> str:
    return to_json({"schema": SCHEMA, "config_digest": cfg.digest(), "command": command,
                    "result": result}) + "\n"


def csv_doc(cfg: RunConfig, header: list[str], rows) -> str:
    lines = [f"# schema: {SCHEMA} config_digest: {cfg.digest()}", ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, (int, np.integer)) else str(int(v))
                              for v in row))
    return "\n".join(lines) + "\n"


def _write(text: str, path: str) -> None:
    if path in ("", "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text)


# -- commands ----------------------------------------------------------------

def _cmd_check(cfg, args):
    rep = model.check_assumptions(cfg.params)
    lm = model.landmarks(cfg.params)
    res = rep.as_dict()
    res["landmarks"] = {"v_fold": lm.v_fold, "w_fold": lm.w_fold, "p0": lm.p0,
                        "w_star": lm.w_star, "w_star2": lm.w_star2}
    return json_doc(cfg, "check", res), 0 if rep.all_pass else 1


def _cmd_map(cfg, args):
    p = cfg.params
    lm = model.landmarks(p)
    lo = lm.w_star2 - 5 * p.d if args.w_min is None else args.w_min
    hi = lm.w_star + 10 * p.d if args.w_max is None else args.w_max
    ws = np.linspace(lo, hi, args.n)
    ph, dph = adaptmap.phi_values(p, ws, cfg.tolerances.map_tol)
    if args.trajectory_w0 is not None:
        traj = flow.trajectory(p, args.trajectory_w0)
        _write(csv_doc(cfg, ["t", "v", "w"], traj), args.trajectory_out or "-")
    if _format(cfg, args, "csv") == "json":
        return json_doc(cfg, "map", {"w": ws, "phi": ph, "dphi": dph}), 0
    return csv_doc(cfg, ["w", "phi", "dphi"], zip(ws, ph, dph)), 0


def _cmd_phi0(cfg, args):
    sm = singular.SingularMap.from_params(cfg.params)
    res = {"period": singular.phi0_period(sm), "orbit": singular.phi0_orbit(sm), "p0": sm.p0,
           "w_star": sm.w_star, "d": sm.d, "well_formed": sm.well_formed}
    return json_doc(cfg, "phi0", res), 0


def _cmd_orbit(cfg, args):
    p = cfg.params
    pr = cfg.protocol
    w0 = adaptmap.w_star(p) if args.w0 is None else args.w0
    att = orbits.detect_attractor(p, w0, pr["transient"], max(200, 2 * pr["p_max"]),
                                  cfg.tolerances.orbit_tol, pr["p_max"], cfg.tolerances.map_tol)
    return json_doc(cfg, "orbit", att.as_dict()), 0


def _protocol(cfg, args) -> sweep.SweepProtocol:
    pr = cfg.protocol
    return sweep.SweepProtocol(
        transient=pr["transient"], sample=pr["sample"], detect_sample=max(200, 2 * pr["p_max"]),
        p_max=pr["p_max"], orbit_tol=cfg.tolerances.orbit_tol, map_tol=pr["map_tol"],
        warm_start=pr["warm_start"] and not args.cold, w0=pr.get("w0"), workers=args.workers)


def _cmd_sweep(cfg, args):
    pr = cfg.protocol
    lo, hi = args.range if args.range else (pr["v_min"], pr["v_max"])
    step = args.step if args.step else pr["step"]
    rows = sweep.sweep_vr(cfg.params, (lo, hi), step, _protocol(cfg, args))
    table = sweep.extract_windows(rows)
    doc = json_doc(cfg, "sweep", {
        "table": table.as_dict(),
        "rows": [{"v_reset": r.param_value, "label": r.label,
                  "itinerary": r.attractor.itinerary if r.attractor else "",
                  "error": r.error} for r in rows]})
    out = args.windows_out
    if out is None and cfg.output.path not in ("", "-"):
        out = str(Path(cfg.output.path).with_suffix(".windows.json"))
    if out:
        _write(doc, out)
    data = [(r.param_value, i, w) for r in rows for i, w in enumerate(r.samples)]
    return csv_doc(cfg, ["param", "iterate_index", "w"], data), 0


def _cmd_hausdorff(cfg, args):
    tab = sweep.sweep_eps(cfg.params, args.eps, cfg.params.v_reset, args.n_grid,
                          cfg.tolerances.map_tol)
    rows = [(r.eps, r.v_reset, r.hausdorff, r.c1) for r in tab.rows]
    if _format(cfg, args, "csv") == "json":
        return json_doc(cfg, "hausdorff", {
            "rows": [dict(zip(("eps", "v_reset", "d_H", "c1"), r)) for r in rows],
            "loglog_slope_d_H": tab.hausdorff_slope, "loglog_slope_c1": tab.c1_slope}), 0
    return csv_doc(cfg, ["eps", "v_reset", "d_H", "c1"], rows), 0


def _cmd_chaos(cfg, args):
    rep = chaos.chaos_conditions(cfg.params, cfg.tolerances.map_tol)
    return json_doc(cfg, "chaos-check", rep.as_dict()), 0


def _cmd_tune(cfg, args):
    res = chaos.tune_misiurewicz(cfg.params, args.k, tuple(args.bracket), tol=cfg.tolerances.map_tol)
    out = res.as_dict()
    if args.lyapunov:
        p = cfg.params.replace(v_reset=res.v_reset)
        ly = orbits.lyapunov(p, adaptmap.w_star(p), args.lyapunov)
        out["lyapunov"] = {"value": ly.value, "band": ly.band, "n": ly.n}
    return json_doc(cfg, "tune-misiurewicz", out), 0


def _cmd_acip(cfg, args):
    est = chaos.acip_histogram(cfg.params, args.w0, args.n, args.bins, seed=args.seed,
                               tol=cfg.protocol["map_tol"])
    return csv_doc(cfg, ["bin_center", "mass"], zip(est.centers, est.mass)), 0


def _cmd_certify(cfg, args):
    res = orbits.certify_k(cfg.params, tol=cfg.tolerances.map_tol)
    out = res.as_dict()
    if res.ok and args.basin:
        gap = orbits.basin_gap(cfg.params, res, cfg.tolerances.map_tol)
        out["basin_gap"] = {"length": gap.length, "intervals": [list(i) for i in gap.intervals]}
        out["basin_misses"] = orbits.basin_escapes(cfg.params, res, gap, seed=args.seed)
    return json_doc(cfg, "certify-k", out), 0 if res.ok else 1


def _format(cfg, args, default):
    return cfg.output.format or default


COMMANDS = {
    "check": _cmd_check, "map": _cmd_map, "phi0": _cmd_phi0, "orbit": _cmd_orbit,
    "sweep": _cmd_sweep, "hausdorff": _cmd_hausdorff, "chaos-check": _cmd_chaos,
    "tune-misiurewicz": _cmd_tune, "acip": _cmd_acip, "certify-k": _cmd_certify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration (default: standard quartic model)")
    common.add_argument("--vr", type=float, help="override model.v_reset")
    common.add_argument("--eps", dest="eps_override", type=float, help="override model.eps")
    common.add_argument("-o", "--output", help="override output.path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="override output.format")
    common.add_argument("--seed", type=int, default=0, help="seed for Monte Carlo checks")
    common.add_argument("--workers", type=int, default=1, help="worker processes (cold sweeps)")

    ap = argparse.ArgumentParser(prog="burstmap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")
    sub.add_parser("check", parents=[common], help="check the model assumptions")
    p = sub.add_parser("map", parents=[common], help="tabulate Phi and Phi' on a grid")
    p.add_argument("--w-min", type=float)
    p.add_argument("--w-max", type=float)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--trajectory-w0", type=float, help="also dump the flight from this w0")
    p.add_argument("--trajectory-out", help="file for the trajectory dump (default stdout)")
    sub.add_parser("phi0", parents=[common], help="period and orbit of the singular map")
    p = sub.add_parser("orbit", parents=[common], help="classify the attractor reached from w0")
    p.add_argument("--w0", type=float, help="start (default w*)")
    p = sub.add_parser("sweep", parents=[common], help="bifurcation sweep over v_reset")
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--step", type=float)
    p.add_argument("--cold", action="store_true", help="start every row from w*")
    p.add_argument("--windows-out", help="file for the JSON window table")
    p = sub.add_parser("hausdorff", parents=[common], help="distance to the singular map vs eps")
    p.add_argument("--eps-list", dest="eps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    p.add_argument("--n-grid", type=int, default=2000)
    sub.add_parser("chaos-check", parents=[common], help="shape conditions for chaos")
    p = sub.add_parser("tune-misiurewicz", parents=[common], help="tune v_reset so Phi^(k+1)(w*) = w_f")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bracket", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--lyapunov", type=int, default=0, metavar="N",
                   help="also estimate the Lyapunov exponent over N iterates")
    p = sub.add_parser("acip", parents=[common], help="invariant density histogram")
    p.add_argument("--w0", type=float, help="start (default: drawn from the core with --seed)")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=200)
    p = sub.add_parser("certify-k", parents=[common], help="certify a stable L^(k-1)R orbit")
    p.add_argument("--basin", action="store_true", help="also measure the exceptional set")
    return ap


def load_config(args) -> RunConfig:
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    else:
        text = STANDARD_TOML
    cfg = parse_config(text)
    changes = {}
    if args.vr is not None:
        changes["v_reset"] = args.vr
    if args.eps_override is not None:
        changes["eps"] = args.eps_override
    try:
        params = cfg.params.replace(**changes) if changes else cfg.params
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = OutputSpec(args.format or cfg.output.format,
                     cfg.output.path if args.output is None else args.output)
    return replace(cfg, params=params, output=out)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        text, status = COMMANDS[args.command](cfg, args)
        _write(text, cfg.output.path)
        return status
    except ConfigError as exc:
        print(f"burstmap: configuration error: {exc}", file=sys.stderr)
        return 2
    except (BurstmapError, ValueError) as exc:
        print(f"burstmap: {exc}", file=sys.stderr)
        return 1


run_command = main

if __name__ == "__main__":
    sys.exit(main())
