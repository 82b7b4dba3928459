"""Sectioned ``key = value`` run configuration.

Numeric values may be arithmetic expressions over ``pi``, ``e``, ``inf`` and
``sqrt``; lists are comma separated.  See ``docs/formats.md`` for the schema.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import dataclass, field

from .errors import ConfigError
from .params import CoupledParams, ModelParams
from .phase_diagram import MaterialParams
from .solver import SolverConfig
from .spectral import DomainSpec

SUBCOMMANDS = ("classify", "reduce", "simulate", "sweep", "diagram")

SCHEMA: dict[str, set[str]] = {
    "run": {"subcommand", "seed"},
    "domain": {"kind", "lengths", "r0", "dim", "grid"},
    "params": {"lambda", "gamma2", "gamma3", "mu", "alpha1", "alpha2", "gamma1"},
    "classify": {"mode", "m", "a", "L"},
    "solver": {
        "dt",
        "stabilization",
        "dealias",
        "steady_tol",
        "max_time",
        "init_amplitude",
        "init_mode",
        "init_noise",
        "check_every",
        "record_interval",
    },
    "sweep": {"lambdas", "lambda_start", "lambda_stop", "count", "spacing", "continuation"},
    "reduce": {"family", "q", "c", "y0", "t_end", "dt"},
    "material": {"a", "R", "u0", "l", "k", "C", "L"},
    "diagram": {"u0_min", "u0_max", "u0_count", "T_max", "T_count"},
    "output": {"prefix", "snapshot"},
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "classify": ("domain", "params"),
    "reduce": ("params",),
    "simulate": ("domain", "params"),
    "sweep": ("domain", "params", "sweep"),
    "diagram": ("material",),
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_FUNCS = {"sqrt": math.sqrt}


def eval_number(text: str) -> float:
    """Evaluate a restricted arithmetic expression."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ZeroDivisionError, OverflowError, TypeError) as exc:
        raise ValueError(f"cannot evaluate {text!r}: {exc}") from None


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    domain: DomainSpec | None = None
    params: ModelParams | CoupledParams | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    sections: dict[str, dict[str, str]] = field(default_factory=dict)
    lines: dict[tuple[str, str], int] = field(default_factory=dict)
    material: MaterialParams | None = None
    lambda_given: bool = False

    def section(self, name: str) -> dict[str, str]:
        return self.sections.get(name, {})

    def number(self, sec: str, key: str, default=None, finite: bool = True):
        raw = self.section(sec).get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"[{sec}] {key} is required")
            return default
        return _number(raw, sec, key, self.lines.get((sec, key)), finite)

    def integer(self, sec: str, key: str, default=None) -> int:
        v = self.number(sec, key, default)
        if v != int(v):
            raise ConfigError(f"[{sec}] {key} must be an integer", self.lines.get((sec, key)))
        return int(v)

    def numbers(self, sec: str, key: str) -> list[float] | None:
        raw = self.section(sec).get(key)
        if raw is None:
            return None
        line = self.lines.get((sec, key))
        return [_number(p, sec, key, line) for p in raw.split(",") if p.strip()]

    def flag(self, sec: str, key: str, default: bool) -> bool:
        raw = self.section(sec).get(key)
        if raw is None:
            return default
        low = raw.strip().lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"[{sec}] {key} must be a boolean, got {raw!r}", self.lines.get((sec, key)))

    def text(self, sec: str, key: str, default: str | None = None) -> str | None:
        raw = self.section(sec).get(key)
        return default if raw is None else raw.strip()


def _number(raw: str, sec: str, key: str, line: int | None, finite: bool = True) -> float:
    try:
        v = eval_number(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: {exc}", line) from None
    if finite and not math.isfinite(v):
        raise ConfigError(f"[{sec}] {key} must be finite, got {raw!r}", line)
    return v


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def _scan_lines(text: str) -> dict[tuple[str, str], int]:
    lines, sec = {}, None
    for no, line in enumerate(text.splitlines(), start=1):
        if line.strip().startswith(("#", ";")) or not line.strip():
            continue
        m = _SECTION_RE.match(line)
        if m:
            sec = m.group(1).strip()
            lines[(sec, "")] = no
            continue
        m = _KEY_RE.match(line)
        if m and sec is not None and not line[0].isspace():
            lines.setdefault((sec, m.group(1).strip()), no)
    return lines


def parse_config(text: str, subcommand: str | None = None) -> RunConfig:
    """Parse and validate a configuration; ``subcommand`` overrides ``[run] subcommand``."""
    cp = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line) from None
    lines = _scan_lines(text)
    sections: dict[str, dict[str, str]] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", lines.get((sec, "")))
        for key, value in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", lines.get((sec, key)))
        sections[sec] = dict(cp.items(sec))

    run = sections.get("run", {})
    file_sub = run.get("subcommand", "").strip() or None
    sub = subcommand or file_sub
    if sub is None:
        raise ConfigError("no subcommand given on the command line or in [run]")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r}", lines.get(("run", "subcommand")))
    if subcommand and file_sub and subcommand != file_sub:
        raise ConfigError(f"config is for {file_sub!r}, not {subcommand!r}", lines.get(("run", "subcommand")))

    cfg = RunConfig(sub, sections=sections, lines=lines)
    cfg.seed = cfg.integer("run", "seed", 0)
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative", lines.get(("run", "seed")))
    for block in REQUIRED[sub]:
        if block not in sections and not (sub == "reduce" and block == "params" and "reduce" in sections):
            raise ConfigError(f"subcommand {sub!r} needs a [{block}] section")
    if "domain" in sections:
        cfg.domain = _domain(cfg)
    if "params" in sections:
        cfg.params = _params(cfg)
    cfg.solver = _solver(cfg)
    if "material" in sections:
        cfg.material = _material(cfg)
    return cfg


def _wrap(cfg: RunConfig, sec: str, fn):
    try:
        return fn()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {exc}", cfg.lines.get((sec, ""))) from None


def _domain(cfg: RunConfig) -> DomainSpec:
    kind = cfg.text("domain", "kind", "rectangular")
    n = cfg.integer("domain", "grid", 64)

    def build():
        if kind == "rectangular":
            lengths = cfg.numbers("domain", "lengths")
            if not lengths:
                raise ConfigError("[domain] lengths is required for rectangular domains")
            return DomainSpec.rectangular(tuple(lengths), n)
        if kind == "loop":
            return DomainSpec.loop(cfg.number("domain", "r0"), n)
        if kind == "torus":
            return DomainSpec.torus(cfg.integer("domain", "dim"), n)
        raise ConfigError(f"unknown domain kind {kind!r}", cfg.lines.get(("domain", "kind")))

    return _wrap(cfg, "domain", build)


def _params(cfg: RunConfig):
    sec = cfg.section("params")
    lam = cfg.number("params", "lambda", math.nan, finite=False) if "lambda" in sec else math.nan
    g2 = cfg.number("params", "gamma2")
    g3 = cfg.number("params", "gamma3")
    if not g3 > 0:
        raise ConfigError(f"gamma3 > 0 required (cubic coefficient), got {g3!r}", cfg.lines.get(("params", "gamma3")))
    coupled_keys = {"mu", "alpha1", "alpha2", "gamma1"}
    present = coupled_keys & set(sec)
    if present and present != coupled_keys:
        missing = ", ".join(sorted(coupled_keys - present))
        raise ConfigError(f"coupled parameters incomplete, missing {missing}", cfg.lines.get(("params", "")))

    def build():
        # lambda may be absent for classify; NaN is replaced by the critical value downstream
        base = ModelParams(0.0 if math.isnan(lam) else lam, g2, g3)
        if present:
            return CoupledParams(
                base,
                cfg.number("params", "mu"),
                cfg.number("params", "alpha1"),
                cfg.number("params", "alpha2"),
                cfg.number("params", "gamma1"),
            )
        return base

    cfg.lambda_given = not math.isnan(lam)
    return _wrap(cfg, "params", build)


def _solver(cfg: RunConfig) -> SolverConfig:
    s = "solver"
    stab = cfg.section(s).get("stabilization")
    stab_v = None if stab is None or stab.strip().lower() == "auto" else cfg.number(s, "stabilization")
    return _wrap(
        cfg,
        s,
        lambda: SolverConfig(
            dt=cfg.number(s, "dt", 1e-3),
            stabilization=stab_v,
            dealias=cfg.flag(s, "dealias", False),
            steady_tol=cfg.number(s, "steady_tol", 1e-9),
            max_time=cfg.number(s, "max_time", 1e4),
            init_amplitude=cfg.number(s, "init_amplitude", 1e-4),
            init_mode=cfg.text(s, "init_mode"),
            init_noise=cfg.number(s, "init_noise", 0.0),
            seed=cfg.seed,
            check_every=cfg.integer(s, "check_every", 10),
        ),
    )


def _material(cfg: RunConfig) -> MaterialParams:
    s = "material"
    return _wrap(
        cfg,
        s,
        lambda: MaterialParams(
            a=cfg.number(s, "a"),
            R=cfg.number(s, "R"),
            u0=cfg.number(s, "u0", 0.5),
            l=cfg.number(s, "l", 1.0),
            k=cfg.number(s, "k", 1.0),
            C=cfg.number(s, "C", math.pi**2),
        ),
    )


def load_config(path: str, subcommand: str | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not UTF-8 text") from None
    return parse_config(text, subcommand)
