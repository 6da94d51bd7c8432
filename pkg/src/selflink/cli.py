"""Command-line interface: ``selflink compute|verify|converge|crossings``.

Exit codes: 0 success, 1 input error, 2 computation-quality failure
(residual >= 0.5, non-generic projection), 3 a verify suite missed its tolerance.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .diagram import combinatorial_linking, project
from .errors import NonGenericDirection, ReportFailed, SelfLinkError
from .framing import Framing, pushoff
from .geometry import CurveSpec
from .invariant import (
    SCHEMA_VERSION,
    IsotopyFamily,
    auto_epsilon,
    blackboard_check,
    frenet_check,
    self_link,
    twist_shift_check,
    verify_calugareanu,
    verify_invariance,
)
from .quadrature import QuadratureConfig, convergence_study, observed_orders

SUITES = ("calugareanu", "invariance", "frenet", "blackboard", "twist-shift")
TARGETS = ("writhe", "linking", "twist")
DEFAULT_DIRECTIONS = ((0.05, 0.02, 1.0), (-0.1, 0.15, 1.0), (0.3, -0.2, 1.0), (0.2, 0.35, 1.0))
REPO_FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"

EXIT_OK, EXIT_INPUT, EXIT_QUALITY, EXIT_TOLERANCE = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# -- serialization ----------------------------------------------------------------------


def _fmt(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with every float written to 17 significant digits."""
    return _fmt(obj)


# -- config -----------------------------------------------------------------------------


@dataclass
class RunConfig:
    curve: CurveSpec
    framing_spec: dict
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    epsilon: float | str = "auto"
    output: str | None = None
    format: str = "json"
    oracle: bool = True
    name: str = ""
    partner: CurveSpec | None = None
    family: dict | None = None
    directions: list | None = None
    twists: list | None = None

    @property
    def framing(self) -> Framing:
        return Framing.from_json(self.framing_spec, self.curve)


_TOP_KEYS = {
    "schema_version", "name", "curve", "framing", "quadrature", "epsilon", "output",
    "format", "oracle", "partner", "family", "directions", "twists",
}
_QUAD_KEYS = {"n", "diagonal_policy", "richardson", "parallel"}
_FAMILY_KEYS = {"mode", "amplitude", "axis", "phase", "u_samples"}


def resolve_path(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    roots = [os.environ.get("SELFLINK_FIXTURES"), str(REPO_FIXTURES)]
    for root in filter(None, roots):
        cand = Path(root) / path
        if cand.exists():
            return cand
    raise ConfigError(f"{path}: no such file (also searched SELFLINK_FIXTURES and the bundled fixtures)")


def load_config(path: str) -> RunConfig:
    p = resolve_path(path)
    text = p.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    return parse_config(data, str(p))


def parse_config(data: Any, where: str = "<config>") -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"{where}: unsupported schema_version {data.get('schema_version')!r}")
    if "curve" not in data or "framing" not in data:
        raise ConfigError(f"{where}: 'curve' and 'framing' are required")
    try:
        curve = CurveSpec.from_json(data["curve"])
        partner = CurveSpec.from_json(data["partner"]) if "partner" in data else None
        quad = data.get("quadrature", {})
        if not isinstance(quad, dict) or set(quad) - _QUAD_KEYS:
            raise ConfigError(f"{where}: quadrature must be an object with keys {sorted(_QUAD_KEYS)}")
        qcfg = QuadratureConfig(**quad)
        framing_spec = data["framing"]
        if not isinstance(framing_spec, dict):
            raise ConfigError(f"{where}: framing must be an object")
        Framing.from_json(framing_spec, curve)
    except ConfigError:
        raise
    except (SelfLinkError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    eps = data.get("epsilon", "auto")
    if eps != "auto" and not (isinstance(eps, (int, float)) and not isinstance(eps, bool) and eps > 0):
        raise ConfigError(f"{where}: epsilon must be 'auto' or a positive number")
    fmt = data.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"{where}: format must be json or csv")
    family = data.get("family")
    if family is not None and (not isinstance(family, dict) or set(family) - _FAMILY_KEYS):
        raise ConfigError(f"{where}: family must be an object with keys {sorted(_FAMILY_KEYS)}")
    oracle = data.get("oracle", True)
    if not isinstance(oracle, bool):
        raise ConfigError(f"{where}: oracle must be a boolean")
    return RunConfig(
        curve=curve,
        framing_spec=framing_spec,
        quadrature=qcfg,
        epsilon=eps,
        output=data.get("output"),
        format=fmt,
        oracle=oracle,
        name=str(data.get("name", Path(where).stem)),
        partner=partner,
        family=family,
        directions=data.get("directions"),
        twists=data.get("twists"),
    )


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    q = cfg.quadrature
    n = getattr(args, "n", None) or q.n
    threads = getattr(args, "threads", None)
    if threads is None:
        threads = os.cpu_count() or 1
    try:
        cfg.quadrature = QuadratureConfig(n, q.diagonal_policy, q.richardson, threads > 1, threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if getattr(args, "epsilon", None) is not None:
        try:
            cfg.epsilon = args.epsilon if args.epsilon == "auto" else float(args.epsilon)
        except ValueError:
            raise ConfigError(f"bad --epsilon {args.epsilon!r}") from None
    if getattr(args, "output", None):
        cfg.output = args.output
    if getattr(args, "format", None):
        cfg.format = args.format
    if getattr(args, "no_oracle", False):
        cfg.oracle = False
    return cfg


def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        Path(output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _report_csv(report: dict) -> str:
    flat = {k: v for k, v in report.items() if k != "quadrature"}
    flat.update({f"quadrature_{k}": v for k, v in report["quadrature"].items()})
    header = ",".join(flat)
    row = ",".join("" if v is None else _fmt(v).strip('"') for v in flat.values())
    return header + "\n" + row


# -- subcommands ---------------------------------------------------------------------------


def cmd_compute(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    code = EXIT_OK
    try:
        report = self_link(cfg.curve, cfg.framing, cfg.quadrature, oracle=cfg.oracle, epsilon=cfg.epsilon)
    except ReportFailed as exc:
        report = exc.report
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_QUALITY
    out = report.to_json()
    text = dumps(out) if cfg.format == "json" else _report_csv(out)
    _emit(text, cfg.output)
    return code


def _epsilon(cfg: RunConfig) -> float:
    if cfg.epsilon == "auto":
        return auto_epsilon(cfg.curve, cfg.framing)[0]
    return float(cfg.epsilon)


def _run_suite(suite: str, cfg: RunConfig, n: int | None) -> dict:
    q = cfg.quadrature
    if suite == "calugareanu":
        return verify_calugareanu(cfg.curve, cfg.framing, _epsilon(cfg), q)
    if suite == "invariance":
        fam = dict(cfg.family or {})
        u_samples = fam.pop("u_samples", (0.0, 0.25, 0.5, 0.75, 1.0))
        family = IsotopyFamily(cfg.curve, **{k: tuple(v) if k == "axis" else v for k, v in fam.items()})
        return verify_invariance(family, cfg.framing_spec, q, u_samples, raise_on_fail=False)
    if suite == "frenet":
        return frenet_check(cfg.curve, n or 2048)
    if suite == "blackboard":
        return blackboard_check(cfg.curve, cfg.directions or DEFAULT_DIRECTIONS, q)
    return twist_shift_check(cfg.curve, cfg.framing, cfg.twists or (-2, -1, 1, 2), q)


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; valid suites: {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_INPUT
    configs = [_apply_overrides(load_config(p), args) for p in args.config]
    verdicts = []
    code = EXIT_OK
    for cfg in configs:
        try:
            verdict = _run_suite(args.suite, cfg, args.n)
        except ReportFailed as exc:
            verdict = {"check": args.suite, "pass": False, "error": str(exc)}
            code = max(code, EXIT_QUALITY)
        verdict = {"fixture": cfg.name, **verdict}
        verdicts.append(verdict)
        status = "PASS" if verdict["pass"] else "FAIL"
        print(f"{status} {args.suite} {cfg.name}", file=sys.stderr)
        if not verdict["pass"] and code == EXIT_OK:
            code = EXIT_TOLERANCE
    if args.json:
        sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "suite": args.suite, "verdicts": verdicts}) + "\n")
    return code


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --n-list {text!r}") from None
    if not values:
        raise ConfigError("--n-list must not be empty")
    return values


def cmd_converge(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    n_list = _parse_n_list(args.n_list)
    if args.target == "writhe":
        subject = cfg.curve
    elif args.target == "linking":
        partner = cfg.partner or pushoff(cfg.curve, cfg.framing, _epsilon(cfg))
        subject = (cfg.curve, partner)
    else:
        subject = cfg.framing
    try:
        values = convergence_study(args.target, subject, n_list, cfg.quadrature)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    orders = observed_orders(values)
    lines = ["n,value,diff_prev,observed_order"]
    prev = None
    for (n, v), order in zip(values, orders):
        diff = "" if prev is None else _fmt(abs(v - prev))
        lines.append(f"{n},{_fmt(v)},{diff},{'' if order is None else _fmt(order)}")
        prev = v
    _emit("\n".join(lines), None)
    return EXIT_OK


def _parse_direction(text: str) -> np.ndarray:
    try:
        d = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ConfigError(f"bad direction {text!r}") from None
    if d.shape != (3,) or not np.all(np.isfinite(d)) or np.linalg.norm(d) < 1e-12:
        raise ConfigError(f"direction {text!r} is not a nonzero 3-vector")
    return d / np.linalg.norm(d)


def cmd_crossings(args) -> int:
    d = _parse_direction(args.direction)
    cfg = load_config(args.config)
    try:
        diagram = project([cfg.curve], d, args.n)
        out = {"schema_version": SCHEMA_VERSION, **diagram.to_json()}
        if cfg.partner is not None:
            out["linking"] = combinatorial_linking(cfg.curve, cfg.partner, d, args.n)
    except NonGenericDirection as exc:
        print(f"error: {exc}; attempted directions:", file=sys.stderr)
        for a in exc.attempted:
            print("  " + ",".join(format(x, ".17g") for x in a), file=sys.stderr)
        return EXIT_QUALITY
    _emit(dumps(out), None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selflink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, default=None, help="quadrature grid size per circle factor")
        p.add_argument("--threads", type=int, default=None, help="worker threads (1 = bit-reproducible reference path)")

    p = sub.add_parser("compute", help="self-linking report for one framed curve")
    p.add_argument("config")
    common(p)
    p.add_argument("--epsilon", default=None, help="pushoff distance or 'auto'")
    p.add_argument("--no-oracle", action="store_true", help="skip the pushoff crossing-count oracle")
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="run a verification suite over fixtures")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("config", nargs="+")
    common(p)
    p.add_argument("--json", action="store_true", help="JSON verdicts on stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converge", help="CSV convergence table")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("config")
    p.add_argument("--n-list", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("crossings", help="signed crossings of a planar projection")
    p.add_argument("config")
    p.add_argument("--direction", default="0,0,1")
    p.add_argument("--n", type=int, default=1024)
    p.set_defaults(func=cmd_crossings)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SelfLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUALITY


if __name__ == "__main__":
    sys.exit(main())
