"""Command line front end: ``ptlab {check,spectrum,converge}``.

Exit status: 0 when every requested check passes, 1 when at least one
fails, 2 on configuration or evaluation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .eigen import EigenError, conjugate_pair_matching, eigendecompose
from .expr import RESERVED, ExprError, format_expr
from .grid import GridError, make_grid
from .model import ModelError, PotentialSpec, build_system
from .opalg import OperatorError
from .verify import (
    EXACT_TOL,
    FAIL,
    IDENTITIES,
    ParityReport,
    ResidualReport,
    anti_pseudo_residual,
    convergence_study,
    corollary1_identity_check,
    eta_hermiticity_residual,
    parity_conditions_check,
    pseudo_residual,
    pt_symmetry_residual,
)

__all__ = [
    "ConfigError",
    "Config",
    "Tolerances",
    "load_config",
    "parse_config",
    "run_check",
    "run_spectrum",
    "run_converge",
    "emit_report",
    "spectrum_csv",
    "exit_code",
    "main",
]

SCHEMA = "ptlab.report/1"
EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    exact: float = EXACT_TOL
    parity: float = EXACT_TOL
    pairing: float = 1e-8
    eigen_residual: float = 1e-10


@dataclass(frozen=True)
class Config:
    potential_V: str
    potential_A: str
    half_width: float
    grid_points: int
    mass: float = 0.5
    params: dict = field(default_factory=dict)
    tolerances: Tolerances = Tolerances()
    converge_identity: str | None = None
    converge_grid_points: tuple[int, ...] | None = None

    def spec(self) -> PotentialSpec:
        return PotentialSpec(V=self.potential_V, A=self.potential_A, mass=self.mass, params=self.params)


_ALIASES = {"V": "potential_V", "A": "potential_A", "m": "mass", "L": "half_width", "N": "grid_points"}
_FIELDS = {"potential_V", "potential_A", "mass", "half_width", "grid_points", "params", "tolerances", "converge"}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite")
    return float(value)


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    return value


def _complex(value, name: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"{name}: complex values are [re, im] pairs, got {value!r}")
        return complex(_number(value[0], name), _number(value[1], name))
    return complex(_number(value, name), 0.0)


def parse_config(doc) -> Config:
    """Validate a decoded JSON document. Errors name the offending field."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    raw = {}
    for key, value in doc.items():
        canon = _ALIASES.get(key, key)
        if canon not in _FIELDS:
            raise ConfigError(f"{key}: unknown config field")
        if canon in raw:
            raise ConfigError(f"{key}: given twice (also as {canon})")
        raw[canon] = value
    for req in ("potential_V", "half_width", "grid_points"):
        if req not in raw:
            raise ConfigError(f"{req}: required field missing")
    exprs = {}
    for name in ("potential_V", "potential_A"):
        value = raw.get(name, "0")
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected an expression string")
        exprs[name] = value
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object mapping names to [re, im]")
    bound = {}
    for pname, pval in params.items():
        if not _NAME.match(pname) or pname in RESERVED:
            raise ConfigError(f"params.{pname}: invalid or reserved parameter name")
        bound[pname] = _complex(pval, f"params.{pname}")
    tol_doc = raw.get("tolerances", {})
    if not isinstance(tol_doc, dict):
        raise ConfigError("tolerances: expected an object")
    tol_kwargs = {}
    for tname, tval in tol_doc.items():
        if tname not in Tolerances.__dataclass_fields__:
            raise ConfigError(f"tolerances.{tname}: unknown tolerance")
        t = _number(tval, f"tolerances.{tname}")
        if t < 0:
            raise ConfigError(f"tolerances.{tname}: must be non-negative")
        tol_kwargs[tname] = t
    conv = raw.get("converge", {})
    if not isinstance(conv, dict) or set(conv) - {"identity", "grid_points"}:
        raise ConfigError("converge: expected an object with 'identity' and/or 'grid_points'")
    identity = conv.get("identity")
    if identity is not None and identity not in IDENTITIES:
        raise ConfigError(f"converge.identity: unknown identity {identity!r}")
    n_list = conv.get("grid_points")
    if n_list is not None:
        if not isinstance(n_list, list):
            raise ConfigError("converge.grid_points: expected a list of integers")
        n_list = tuple(_integer(n, "converge.grid_points") for n in n_list)
    cfg = Config(
        potential_V=exprs["potential_V"],
        potential_A=exprs["potential_A"],
        half_width=_number(raw["half_width"], "half_width"),
        grid_points=_integer(raw["grid_points"], "grid_points"),
        mass=_number(raw.get("mass", 0.5), "mass"),
        params=bound,
        tolerances=Tolerances(**tol_kwargs),
        converge_identity=identity,
        converge_grid_points=n_list,
    )
    try:
        cfg.spec()
    except ExprError as exc:
        raise ConfigError(f"expression: {exc}") from exc
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        make_grid(cfg.half_width, cfg.grid_points)
    except GridError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    return cfg


def load_config(path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


# ------------------------------------------------------------------ reports


class _Sci(float):
    """Float rendered in scientific notation with 17 significant digits."""


def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _echo(cfg: Config) -> dict:
    spec = cfg.spec()
    return {
        "potential_V": cfg.potential_V,
        "potential_A": cfg.potential_A,
        "parsed_V": format_expr(spec.V),
        "parsed_A": format_expr(spec.A),
        "mass": cfg.mass,
        "half_width": cfg.half_width,
        "grid_points": cfg.grid_points,
        "params": {k: _pair(cfg.params[k]) for k in sorted(cfg.params)},
        "tolerances": {
            "exact": cfg.tolerances.exact,
            "parity": cfg.tolerances.parity,
            "pairing": cfg.tolerances.pairing,
            "eigen_residual": cfg.tolerances.eigen_residual,
        },
    }


def _residual_entry(r: ResidualReport) -> dict:
    return {
        "name": r.name,
        "status": r.classification,
        "absolute_residual": _Sci(r.absolute),
        "relative_residual": _Sci(r.relative),
        "probe_residual": _Sci(r.probe),
        "applicable": r.applicable,
        "note": r.note,
    }


def _parity_entry(p: ParityReport) -> dict:
    verdicts = p.verdicts
    return {
        "name": "parity_conditions",
        "status": "PASS" if p.passed else FAIL,
        "tolerance": p.tolerance,
        "conditions": [
            {"condition": k, "max_violation": _Sci(v[0]), "scale": _Sci(v[1]), "pass": verdicts[k]}
            for k, v in p.violations.items()
        ],
    }


def _verdict(checks: list) -> str:
    if not checks:
        return "no-op"
    return "fail" if any(c["status"] == FAIL for c in checks) else "pass"


def _report(command: str, cfg: Config | None, checks: list, **extra) -> dict:
    out = {"schema": SCHEMA, "command": command, "config": _echo(cfg) if cfg else None, "checks": checks}
    out.update(extra)
    out["verdict"] = _verdict(checks)
    return out


def run_check(cfg: Config) -> dict:
    """Build the system once and run every identity check."""
    tol = cfg.tolerances
    spec = cfg.spec()
    grid = make_grid(cfg.half_width, cfg.grid_points)
    system = build_system(spec, grid)
    parity = parity_conditions_check(spec, grid, tol.parity)
    checks = [_parity_entry(parity)]
    for fn in (pt_symmetry_residual, anti_pseudo_residual, corollary1_identity_check, eta_hermiticity_residual):
        checks.append(_residual_entry(fn(system, tol.exact)))
    if parity.passed:
        checks.append(_residual_entry(pseudo_residual(system, tol.exact)))
    else:
        checks.append(
            {
                "name": "pseudo",
                "status": "SKIPPED",
                "note": "parity conditions fail (" + ", ".join(parity.failed) + "); H is not PT-symmetric",
            }
        )
    return _report("check", cfg, checks)


def run_spectrum(cfg: Config) -> dict:
    """Eigendecomposition plus conjugate-pair analysis.

    Pairing is a pass/fail check only when the potentials satisfy the
    parity conditions; otherwise it is reported as information.
    """
    tol = cfg.tolerances
    spec = cfg.spec()
    grid = make_grid(cfg.half_width, cfg.grid_points)
    system = build_system(spec, grid)
    parity = parity_conditions_check(spec, grid, tol.parity)
    checks = []
    try:
        spectrum = eigendecompose(system.H, tol.eigen_residual)
    except EigenError as exc:
        checks.append({"name": "eigen_residuals", "status": FAIL, "note": str(exc), "failed_indices": list(exc.indices)})
        return _report("spectrum", cfg, checks, spectrum=None, pairing=None)
    pairing = conjugate_pair_matching(spectrum, tol.pairing)
    partner = pairing.partner(len(spectrum))
    checks.append(
        {
            "name": "eigen_residuals",
            "status": "PASS",
            "max_residual": _Sci(float(spectrum.residuals.max(initial=0.0))),
            "bound": _Sci(tol.eigen_residual * max(1.0, spectrum.norm)),
        }
    )
    if parity.passed:
        status = "PASS" if not pairing.unmatched else FAIL
        note = ""
    else:
        status = "INFO"
        note = "parity conditions fail; conjugate pairing is not required"
    checks.append({"name": "conjugate_pairing", "status": status, "unmatched": len(pairing.unmatched), "note": note})
    spec_block = {
        "count": len(spectrum),
        "matrix_norm": _Sci(spectrum.norm),
        "basis_condition": _Sci(spectrum.basis_condition),
        "method": spectrum.method,
        "eigenvalues": [
            {"index": k, "value": _pair(p.value), "residual": _Sci(p.residual), "partner": int(partner[k])}
            for k, p in enumerate(spectrum.pairs)
        ],
    }
    pairing_block = {
        "tolerance": _Sci(pairing.tolerance),
        "pairs": [list(p) for p in pairing.pairs],
        "real": list(pairing.real),
        "unmatched": list(pairing.unmatched),
    }
    return _report("spectrum", cfg, checks, spectrum=spec_block, pairing=pairing_block)


def run_converge(cfg: Config, identity: str | None = None, n_list=None) -> dict:
    identity = identity or cfg.converge_identity or "anti-pseudo"
    n_list = n_list or cfg.converge_grid_points
    if n_list is None:
        raise ConfigError("converge: grid sizes required (--grid-points or converge.grid_points)")
    for n in n_list:
        if n % 2 == 0:
            raise ConfigError(f"converge.grid_points: even grid size {n} rejected")
    try:
        rep = convergence_study(cfg.spec(), cfg.half_width, n_list, identity, tol=cfg.tolerances.exact)
    except GridError as exc:
        raise ConfigError(f"converge.grid_points: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, (ModelError, OperatorError)):
            raise
        raise ConfigError(f"converge: {exc}") from exc
    block = {
        "identity": rep.identity,
        "samples": [
            {"grid_points": s.n_points, "h": s.h, "relative_residual": _Sci(s.relative), "probe_residual": _Sci(s.probe)}
            for s in rep.samples
        ],
        "slope": None if rep.slope is None else _Sci(rep.slope),
        "window": list(rep.window),
        "exact": rep.exact,
    }
    checks = [{"name": f"convergence:{rep.identity}", "status": "PASS" if rep.passed else FAIL}]
    return _report("converge", cfg, checks, convergence=block)


# ----------------------------------------------------------------- emitters


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return "null"
        if isinstance(v, _Sci):
            return format(float(v), ".16e")
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [f"{pad}{_dump(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return _scalar(obj)


def spectrum_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im", "residual", "pairing_partner_index"])
    for e in (report.get("spectrum") or {}).get("eigenvalues", []):
        w.writerow([e["index"], repr(e["value"][0]), repr(e["value"][1]), format(e["residual"], ".16e"), e["partner"]])
    return buf.getvalue()


def _text(report: dict) -> str:
    lines = [f"ptlab {report['command']}"]
    cfg = report.get("config")
    if cfg:
        lines.append(
            f"  V(x) = {cfg['parsed_V']}   A(x) = {cfg['parsed_A']}   m = {cfg['mass']}"
            f"   L = {cfg['half_width']}   N = {cfg['grid_points']}"
        )
    for c in report["checks"]:
        detail = ""
        if "relative_residual" in c:
            detail = f"  rel={float(c['relative_residual']):.3e} probe={float(c['probe_residual']):.3e}"
        if c.get("note"):
            detail += f"  ({c['note']})"
        lines.append(f"  {c['status']:<15} {c['name']}{detail}")
    conv = report.get("convergence")
    if conv:
        for s in conv["samples"]:
            lines.append(f"    N={s['grid_points']:<6} h={s['h']:.6g}  probe={float(s['probe_residual']):.6e}")
        slope = "exact" if conv["slope"] is None else f"{float(conv['slope']):.4f}"
        lines.append(f"    slope: {slope}  window: {conv['window']}")
    spec = report.get("spectrum")
    if spec:
        pairing = report["pairing"]
        lines.append(
            f"  eigenvalues: {spec['count']}  real: {len(pairing['real'])}  pairs: {len(pairing['pairs'])}"
            f"  unmatched: {len(pairing['unmatched'])}"
        )
        for e in spec["eigenvalues"][:10]:
            lines.append(f"    {e['index']:>4}  {e['value'][0]: .10f} {e['value'][1]:+.3e}i")
    lines.append(f"verdict: {report['verdict']}")
    return "\n".join(lines) + "\n"


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Serialise a report. JSON is canonical: fixed key order, UTF-8, LF."""
    if fmt == "json":
        return (_dump(report) + "\n").encode("utf-8")
    if fmt == "text":
        return _text(report).encode("utf-8")
    if fmt == "csv":
        if report.get("command") != "spectrum":
            raise ConfigError("csv output is only available for the spectrum command")
        return spectrum_csv(report).encode("utf-8")
    raise ConfigError(f"unknown format {fmt!r}")


def exit_code(report: dict) -> int:
    return EXIT_FAIL if report["verdict"] == "fail" else EXIT_PASS


# --------------------------------------------------------------------- main


def _grid_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptlab", description="Verify symmetry identities of discretized 1D Hamiltonians.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "run every operator identity check"),
        ("spectrum", "eigendecompose H and analyse conjugate pairing"),
        ("converge", "grid-refinement study of one identity"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
        if name == "spectrum":
            sp.add_argument("--csv", dest="csv_out", help="also write the eigenvalue CSV here")
        if name == "converge":
            sp.add_argument("--identity", choices=sorted(IDENTITIES))
            sp.add_argument("--grid-points", type=_grid_list, help="comma-separated odd grid sizes")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "check":
            report = run_check(cfg)
        elif args.command == "spectrum":
            report = run_spectrum(cfg)
        else:
            report = run_converge(cfg, args.identity, args.grid_points)
        payload = emit_report(report, args.format)
        if args.command == "spectrum" and args.csv_out:
            Path(args.csv_out).write_bytes(emit_report(report, "csv"))
    except (ConfigError, ExprError, GridError, ModelError, OperatorError, EigenError) as exc:
        print(f"ptlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
