"""Command-line front end: config resolution, sweep execution, CSV output.

Exit codes: 0 success, 2 usage, 3 out-of-range value, 4 I/O failure,
5 statistical comparison failure (oracle-compare).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import RangeError, UsageError
from .experiment import (
    ChshResult,
    SweepSeries,
    active_sweep,
    chsh,
    correlation_sweep,
    malus_transmission,
    passive_sweep,
    point_rng,
    run_point,
)
from .model import (
    DEFAULT_COLLAPSE_SIGMA,
    DEFAULT_MISALIGNMENT_SIGMA,
    DEFAULT_SHAKY_WIDTH,
    ModelParams,
    SourceSpec,
)
from .oracle import joint_probabilities

COMMANDS = (
    "correlate",
    "chsh",
    "passive-test",
    "active-test",
    "malus-check",
    "oracle-compare",
)

DEFAULT_ANGLE_SET = (0.0, np.pi / 4.0, np.pi / 8.0, 3.0 * np.pi / 8.0)
DEFAULT_SEED = 1
DEFAULT_N_PER_POINT = 10_000
DEFAULT_GRID_POINTS = 60

# oracle-compare always runs this many randomized configurations.
ORACLE_COMPARE_CONFIGS = 50
ORACLE_COMPARE_MIN_FRACTION = 0.94

_CONFIG_KEYS = (
    "command",
    "seed",
    "n_per_point",
    "grid_points",
    "theta",
    "shaky_width",
    "misalignment_sigma",
    "collapse_sigma",
    "fair_loss_prob",
    "angle_set",
    "out",
)

_INT_KEYS = ("seed", "n_per_point", "grid_points")
_FLOAT_KEYS = ("theta", "shaky_width", "misalignment_sigma", "collapse_sigma", "fair_loss_prob")


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ModelParams
    grid_points: int
    n_per_point: int
    seed: int
    theta: float
    angle_set: tuple
    output_path: str | None
    workers: int = 1

    def manifest_text(self):
        f = _format_number
        angle_set = ",".join(f(a) for a in self.angle_set)
        lines = [
            f"# bellsim {__version__} run manifest",
            f"command={self.command}",
            f"seed={self.seed}",
            f"n_per_point={self.n_per_point}",
            f"grid_points={self.grid_points}",
            f"theta={f(self.theta)}",
            f"shaky_width={f(self.params.shaky_width)}",
            f"misalignment_sigma={f(self.params.misalignment_sigma)}",
            f"collapse_sigma={f(self.params.collapse_sigma)}",
            f"fair_loss_prob={f(self.params.fair_loss_prob)}",
            f"angle_set={angle_set}",
        ]
        if self.output_path is not None:
            lines.append(f"out={self.output_path}")
        return "\n".join(lines) + "\n"


def _format_number(x):
    return format(float(x), ".12g")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Simulate two-channel EPR-Bell polarization experiments "
        "with setting-dependent detection.",
    )
    parser.add_argument("--command", choices=COMMANDS)
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n-per-point", type=int, dest="n_per_point")
    parser.add_argument("--grid-points", type=int, dest="grid_points")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--shaky-width", type=float, dest="shaky_width")
    parser.add_argument("--misalignment-sigma", type=float, dest="misalignment_sigma")
    parser.add_argument("--collapse-sigma", type=float, dest="collapse_sigma")
    parser.add_argument("--fair-loss-prob", type=float, dest="fair_loss_prob")
    parser.add_argument("--out")
    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="sweep worker threads; never affects results, only scheduling",
    )
    return parser


def _read_config_file(path):
    text = Path(path).read_text(encoding="utf-8")
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _convert(key, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "angle_set":
            parts = [float(p) for p in value.split(",")]
            if len(parts) != 4:
                raise UsageError(f"angle_set needs 4 comma-separated angles, got {len(parts)}")
            return tuple(parts)
    except (ValueError, TypeError):
        raise UsageError(f"bad value for {key}: {value!r}") from None
    return value


def parse_config(argv=None):
    """Resolve flags, optional config file and defaults into a RunConfig.

    Precedence: flags override file values, file values override defaults.
    """
    args = _build_parser().parse_args(argv)

    merged = {
        "command": None,
        "seed": DEFAULT_SEED,
        "n_per_point": DEFAULT_N_PER_POINT,
        "grid_points": DEFAULT_GRID_POINTS,
        "theta": 0.0,
        "shaky_width": DEFAULT_SHAKY_WIDTH,
        "misalignment_sigma": DEFAULT_MISALIGNMENT_SIGMA,
        "collapse_sigma": DEFAULT_COLLAPSE_SIGMA,
        "fair_loss_prob": 0.0,
        "angle_set": DEFAULT_ANGLE_SET,
        "out": None,
    }
    if args.config:
        for key, value in _read_config_file(args.config).items():
            merged[key] = _convert(key, value)
    for key in _CONFIG_KEYS:
        if key == "angle_set":
            continue  # flag-less, config-file only
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag

    command = merged["command"]
    if command is None:
        raise UsageError("no command given (use --command or a config file)")
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")

    try:
        params = ModelParams(
            shaky_width=merged["shaky_width"],
            fair_loss_prob=merged["fair_loss_prob"],
            misalignment_sigma=merged["misalignment_sigma"],
            collapse_sigma=merged["collapse_sigma"],
        )
    except ValueError as exc:
        raise RangeError(str(exc)) from None
    if merged["n_per_point"] < 1:
        raise RangeError(f"n_per_point must be >= 1, got {merged['n_per_point']}")
    if merged["grid_points"] < 2:
        raise RangeError(f"grid_points must be >= 2, got {merged['grid_points']}")
    if merged["seed"] < 0:
        raise RangeError(f"seed must be >= 0, got {merged['seed']}")
    if args.workers < 1:
        raise RangeError(f"workers must be >= 1, got {args.workers}")

    return RunConfig(
        command=command,
        params=params,
        grid_points=merged["grid_points"],
        n_per_point=merged["n_per_point"],
        seed=merged["seed"],
        theta=float(merged["theta"]),
        angle_set=tuple(merged["angle_set"]),
        output_path=merged["out"],
        workers=args.workers,
    )


_CHSH_PAIR_LABELS = ("ab", "abp", "apb", "apbp")


def render_csv(result):
    """CSV text for a SweepSeries or ChshResult."""
    f = _format_number
    if isinstance(result, SweepSeries):
        lines = ["setting,value,stderr"]
        lines += [
            f"{f(s)},{f(v)},{f(e)}"
            for s, v, e in zip(result.settings, result.values, result.stderrs)
        ]
    elif isinstance(result, ChshResult):
        lines = ["pair,e_value,stderr"]
        lines += [
            f"{label},{f(e)},{f(err)}"
            for label, e, err in zip(_CHSH_PAIR_LABELS, result.e_values, result.e_stderrs)
        ]
        lines.append(f"S,{f(result.s_value)}")
    else:
        raise TypeError(f"cannot emit {type(result).__name__}")
    return "\n".join(lines) + "\n"


def emit_series(result, path, config=None):
    """Write the CSV and its sibling ``<name>.manifest``."""
    path = Path(path)
    path.write_text(render_csv(result), encoding="utf-8")
    if config is not None:
        manifest = path.with_suffix(".manifest")
        manifest.write_text(config.manifest_text(), encoding="utf-8")
    return path


def _sweep_grid(config):
    return np.linspace(0.0, np.pi, config.grid_points)


def _oracle_compare(config, stream=None):
    """Monte Carlo versus quadrature over randomized configurations.

    A cell passes when its observed frequency sits within 3 binomial
    standard deviations of the exact probability; the command passes when
    at least 94% of all cells do.
    """
    stream = sys.stdout if stream is None else stream
    n = config.n_per_point
    names = ("pp", "pm", "mp", "mm", "rejected")
    within = 0
    total = 0
    worst = (None, None, -1.0)
    for i in range(ORACLE_COMPARE_CONFIGS):
        draw = point_rng(config.seed, 2 * i)
        mc_rng = point_rng(config.seed, 2 * i + 1)
        params = ModelParams(
            shaky_width=draw.uniform(0.02, 0.6),
            fair_loss_prob=draw.uniform(0.0, 0.3),
            misalignment_sigma=draw.uniform(0.02, 0.4),
            collapse_sigma=config.params.collapse_sigma,
        )
        phi_a = draw.uniform(0.0, 2.0 * np.pi)
        phi_b = draw.uniform(0.0, 2.0 * np.pi)
        source = SourceSpec.entangled_uniform(params.misalignment_sigma)
        dist = joint_probabilities(source, phi_a, phi_b, params)
        counts = run_point(
            source, params.analyzer(phi_a), params.analyzer(phi_b), params, n, mc_rng
        )
        observed = {
            "pp": counts.n_pp,
            "pm": counts.n_pm,
            "mp": counts.n_mp,
            "mm": counts.n_mm,
            "rejected": counts.n_rejected,
        }
        for name in names:
            p = dist.cell(name)
            sd = np.sqrt(p * (1.0 - p) / n)
            if sd == 0.0:
                z = 0.0 if observed[name] == round(p * n) else np.inf
            else:
                z = abs(observed[name] / n - p) / sd
            total += 1
            if z <= 3.0:
                within += 1
            if z > worst[2]:
                worst = (i, name, z)
    fraction = within / total
    ok = fraction >= ORACLE_COMPARE_MIN_FRACTION
    print(
        f"oracle-compare: {within}/{total} cells within 3 sigma "
        f"({fraction:.1%}, policy >= {ORACLE_COMPARE_MIN_FRACTION:.0%})",
        file=stream,
    )
    print(
        f"worst cell: config {worst[0]}, cell {worst[1]}, z = {worst[2]:.2f}",
        file=stream,
    )
    return 0 if ok else 5


def run(config, stream=None):
    """Execute one resolved RunConfig; returns the process exit code."""
    stream = sys.stdout if stream is None else stream
    params = config.params
    if config.command == "oracle-compare":
        return _oracle_compare(config, stream=stream)

    if config.output_path is None:
        raise UsageError(f"--out is required for command {config.command!r}")

    if config.command == "correlate":
        result = correlation_sweep(
            params.pair_source(), params, config.n_per_point,
            _sweep_grid(config), config.seed, config.workers,
        )
    elif config.command == "chsh":
        result = chsh(
            params.pair_source(), params, config.angle_set,
            config.n_per_point, config.seed, config.workers,
        )
    elif config.command == "passive-test":
        result = passive_sweep(
            params.pair_source(), params, config.n_per_point,
            _sweep_grid(config), config.seed, config.workers,
        )
    elif config.command == "active-test":
        result = active_sweep(
            config.theta, params, config.n_per_point,
            _sweep_grid(config), config.seed, config.workers,
        )
    else:  # malus-check
        result = malus_transmission(
            config.theta, _sweep_grid(config), params.collapse_sigma,
            params, config.n_per_point, config.seed, config.workers,
        )
    emit_series(result, config.output_path, config)
    print(f"wrote {config.output_path}", file=stream)
    return 0


def main(argv=None):
    try:
        config = parse_config(argv)
        return run(config)
    except UsageError as exc:
        print(f"bellsim: {exc}", file=sys.stderr)
        return 2
    except RangeError as exc:
        print(f"bellsim: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"bellsim: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
