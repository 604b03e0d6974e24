"""Command-line front end.

    qcolor roundtrip --in a.ppm --exact --out b.ppm
    qcolor restore   --in a.ppm --script plan.qgp --shots 12000 --seed 42 --out r.ppm --report s.json
    qcolor entangle  --in a.ppm [--in b.ppm] --script plan.qgp --out e.ppm [--chord 7,11,2 --weights 0,0,0]
    qcolor dislocate --in a.ppm --shots 1200,12000 --seed 7 --report d.json
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .entangle import (
    KIND_ROLES,
    ChordSignal,
    EntangleSpec,
    PlanGate,
    dislocation_experiment,
    kind_for_roles,
    recipe_for,
    symmetric_restore,
)
from .errors import ImageFormatError, ImageParseError, PlanError, QColorError
from .imagecodec import EXACT, process_image
from .imageio import load_image, save_image
from .qstate import GATE_ARITY, PRNG_NAME, ROTATIONS

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_IMAGE = 4
EXIT_PLAN = 5
EXIT_PIPELINE = 6

COMMANDS = ("roundtrip", "restore", "entangle", "dislocate")

_KNOWN_ROLES = {r for roles in KIND_ROLES.values() for r in roles}
_PI_ANGLE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?|\.\d+)?\*?pi(?:/(\d+(?:\.\d*)?))?$", re.IGNORECASE)


# -- gate plans ----------------------------------------------------------------


def _parse_angle(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        pass
    m = _PI_ANGLE.match(token)
    if m is None:
        raise ValueError(f"bad angle {token!r}")
    sign, mult, div = m.groups()
    value = math.pi * (float(mult) if mult else 1.0) / (float(div) if div else 1.0)
    return -value if sign == "-" else value


def parse_gate_plan(text: str) -> EntangleSpec:
    """Parse the line-based gate plan format.

    One gate per line, ``GATE role [role ...] [angle]``; ``#`` starts a
    comment; ``STRENGTH x`` sets the default rotation angle. Angles are
    radians, written as a number or a multiple/fraction of ``pi``
    (``pi/2``, ``-3pi/4``). The plan kind is inferred from the roles used.
    """
    gates: list[PlanGate] = []
    strength = math.pi / 2
    seen_family: tuple[str, int] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if not tokens:
            continue
        name, col = tokens[0]
        name = name.upper()
        if name == "STRENGTH":
            if len(tokens) != 2:
                raise PlanError("STRENGTH takes exactly one angle", lineno, col)
            try:
                strength = _parse_angle(tokens[1][0])
            except ValueError as exc:
                raise PlanError(str(exc), lineno, tokens[1][1]) from None
            if not 0.0 <= strength <= math.pi:
                raise PlanError(f"strength {strength} outside [0, pi]", lineno, tokens[1][1])
            continue
        if name not in GATE_ARITY:
            raise PlanError(f"unknown gate {tokens[0][0]!r}", lineno, col)
        arity = GATE_ARITY[name]
        args = tokens[1:]
        if len(args) < arity:
            raise PlanError(f"{name} needs {arity} role(s), got {len(args)}", lineno, col)
        roles = []
        for tok, tcol in args[:arity]:
            role = tok.replace("′", "'").upper()
            if role not in _KNOWN_ROLES:
                raise PlanError(f"unknown role {tok!r}", lineno, tcol)
            roles.append(role)
        extra = args[arity:]
        angle = None
        if extra:
            if name not in ROTATIONS:
                raise PlanError(f"{name} takes no angle", lineno, extra[0][1])
            if len(extra) > 1:
                raise PlanError("too many arguments", lineno, extra[1][1])
            try:
                angle = _parse_angle(extra[0][0])
            except ValueError as exc:
                raise PlanError(str(exc), lineno, extra[0][1]) from None
        try:
            gate = PlanGate(name, tuple(roles), angle)
            family = kind_for_roles(gate.roles)
        except PlanError as exc:
            raise PlanError(str(exc), lineno, col) from None
        if family != "channel_remap":
            if seen_family is not None and seen_family[0] != family:
                raise PlanError(
                    f"{family} roles cannot be mixed with {seen_family[0]} roles (line {seen_family[1]})", lineno, col
                )
            seen_family = (family, lineno)
        gates.append(gate)
    kind = seen_family[0] if seen_family else "channel_remap"
    return EntangleSpec(kind, tuple(gates), strength)


# -- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    output: str | None = None
    shots: int | str | list = EXACT
    seed: int = 0
    script: str | None = None
    report: str | None = None
    position: str | None = None
    chord: list[int] | None = None
    weights: list[float] | None = None
    mode: str = "coordinate"
    workers: int = 1
    halfway: str | None = None
    timing: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.inputs:
            raise ValueError("--in is required")
        if self.command in ("roundtrip", "restore", "entangle") and not self.output:
            raise ValueError(f"{self.command} requires --out")
        if self.command in ("restore", "entangle") and not self.script:
            raise ValueError(f"{self.command} requires --script")
        if self.command == "dislocate":
            if not self.report:
                raise ValueError("dislocate requires --report")
            if not isinstance(self.shots, list) or not self.shots:
                raise ValueError("dislocate needs --shots with at least one count")
        elif isinstance(self.shots, list):
            raise ValueError("a comma-separated shot list is only accepted by dislocate")
        shot_list = self.shots if isinstance(self.shots, list) else [self.shots]
        for s in shot_list:
            if s != EXACT and (not isinstance(s, int) or s < 1):
                raise ValueError(f"shots must be >= 1, got {s!r}")
        if len(self.inputs) > (2 if self.command in ("entangle", "restore") else 1):
            raise ValueError(f"too many --in values for {self.command}")
        if self.workers < 1:
            raise ValueError("--workers must be >= 1")


def _parse_shots(text: str, allow_list: bool):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty --shots")
    values = []
    for p in parts:
        if p.lower() == EXACT:
            values.append(EXACT)
            continue
        try:
            values.append(int(p))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad shot count {p!r}") from None
    if len(values) > 1 or allow_list:
        return values
    return values[0]


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


EPILOG = f"""\
exit codes:
  {EXIT_OK}  success
  {EXIT_USAGE}  bad command line or inconsistent flags
  {EXIT_IO}  file could not be read or written
  {EXIT_IMAGE}  malformed or unsupported image
  {EXIT_PLAN}  invalid gate plan, chord, or plan/input mismatch
  {EXIT_PIPELINE}  pipeline failure while running circuits
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcolor",
        description="Encode image colors as qubits, run gate circuits, and decode the measured result.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, output=True, script=False, list_shots=False):
        p.add_argument("--in", dest="inputs", action="append", required=True, metavar="PATH", help="input image (PPM P6 or PNG)")
        if output:
            p.add_argument("--out", dest="output", metavar="PATH", required=True, help="output image path")
        if script:
            p.add_argument("--script", metavar="PATH", required=True, help="gate plan file")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--exact", action="store_true", help="use exact probabilities (default)")
        g.add_argument(
            "--shots",
            type=lambda t: _parse_shots(t, list_shots),
            help="comma-separated shot counts" if list_shots else "number of measurement shots",
        )
        p.add_argument("--seed", type=int, default=0, help="64-bit seed for shot sampling (default 0)")
        p.add_argument("--report", metavar="PATH", help="write JSON statistics here")
        p.add_argument("--workers", type=int, default=1, help="threads used for pixel blocks")
        p.add_argument("--timing", action="store_true", help="add wall_time_ms to the report (breaks byte-identical reports)")

    p = sub.add_parser("roundtrip", help="encode and decode every pixel, no operation")
    common(p)
    p.add_argument("--position", choices=("coordinate", "sequence"), help="also encode pixel positions")

    p = sub.add_parser("restore", help="run a plan and then its inverse")
    common(p, script=True)
    p.add_argument("--halfway", metavar="PATH", help="also write the image after the forward half only")
    p.add_argument("--chord", type=_int_list, help="pitch classes for external_data plans, e.g. 7,11,2")
    p.add_argument("--weights", type=_float_list, help="per-pitch weights in [0,1] (default all 0)")

    p = sub.add_parser("entangle", help="run a plan once; give --in twice for cross-image plans")
    common(p, script=True)
    p.add_argument("--chord", type=_int_list, help="pitch classes for external_data plans, e.g. 7,11,2")
    p.add_argument("--weights", type=_float_list, help="per-pitch weights in [0,1] (default all 0)")

    p = sub.add_parser("dislocate", help="position-encoding shot-noise experiment")
    common(p, output=False, list_shots=True)
    p.add_argument("--mode", choices=("coordinate", "sequence"), default="coordinate")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    shots = EXACT if ns.shots is None else ns.shots
    if ns.command == "dislocate" and not isinstance(shots, list):
        shots = [shots]
    return RunConfig(
        command=ns.command,
        inputs=list(ns.inputs),
        output=getattr(ns, "output", None),
        shots=shots,
        seed=ns.seed,
        script=getattr(ns, "script", None),
        report=ns.report,
        position=getattr(ns, "position", None),
        chord=getattr(ns, "chord", None),
        weights=getattr(ns, "weights", None),
        mode=getattr(ns, "mode", "coordinate"),
        workers=ns.workers,
        halfway=getattr(ns, "halfway", None),
        timing=ns.timing,
    )


# -- execution -------------------------------------------------------------------


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Failure(EXIT_IO, f"cannot read {path}: {exc}") from exc


def _load(path: str):
    try:
        return load_image(path)
    except (ImageParseError, ImageFormatError) as exc:
        raise _Failure(EXIT_IMAGE, f"{path}: {exc}") from exc
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot read {path}: {exc}") from exc


def _save(image, path: str):
    try:
        save_image(image, path)
    except ImageFormatError as exc:
        raise _Failure(EXIT_IMAGE, f"{path}: {exc}") from exc
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _write_report(report: dict, path: str):
    text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _plan(config: RunConfig):
    text = _read_text(config.script)
    try:
        return parse_gate_plan(text)
    except PlanError as exc:
        raise _Failure(EXIT_PLAN, f"{config.script}: {exc}") from exc


def _chord(config: RunConfig) -> ChordSignal | None:
    if config.chord is None:
        return None
    weights = config.weights if config.weights is not None else [0.0] * len(config.chord)
    return ChordSignal(tuple(config.chord), tuple(weights))


def _finite(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def _execute(config: RunConfig) -> dict:
    report: dict = {"command": config.command, "config": _config_echo(config), "prng_name": PRNG_NAME}
    image = _load(config.inputs[0])

    if config.command == "dislocate":
        result = dislocation_experiment(image, config.shots, config.seed, mode=config.mode, workers=config.workers)
        report.update(result.to_dict())
        return report

    if config.command == "roundtrip":
        out, stats = process_image(image, None, config.shots, config.seed, position=config.position, workers=config.workers)
        report.update(stats.to_dict())
        _save(out, config.output)
        return report

    spec = _plan(config)
    try:
        image_b = _load(config.inputs[1]) if len(config.inputs) > 1 else None
        if spec.kind == "cross_image" and image_b is None:
            raise PlanError("cross_image plan needs a second --in image")
        if spec.kind != "cross_image" and image_b is not None:
            raise PlanError(f"a second --in image only applies to cross_image plans, not {spec.kind}")
        if image_b is not None and image_b.size != image.size:
            raise PlanError(f"images differ in size: {image.size} vs {image_b.size}")
        if spec.kind == "external_data" and config.chord is None:
            raise PlanError("external_data plan needs --chord")
        recipe = recipe_for(spec, image_b=image_b, chord=_chord(config))
    except PlanError as exc:
        raise _Failure(EXIT_PLAN, str(exc)) from exc
    report["plan_kind"] = spec.kind

    if config.command == "entangle":
        out, stats = process_image(image, recipe, config.shots, config.seed, workers=config.workers)
        report.update(stats.to_dict())
        _save(out, config.output)
        return report

    out, restore = symmetric_restore(image, recipe, config.shots, config.seed, workers=config.workers)
    report.update(restore.stats.to_dict())
    report.update(restore.to_dict())
    if config.halfway:
        half, _ = process_image(image, recipe, config.shots, config.seed, workers=config.workers)
        _save(half, config.halfway)
    _save(out, config.output)
    return report


def _config_echo(config: RunConfig) -> dict:
    echo = asdict(config)
    echo.pop("timing")
    echo.pop("workers")
    return echo


def run(config: RunConfig) -> int:
    """Execute ``config``; returns the process exit status."""
    start = time.perf_counter()
    try:
        config.validate()
    except ValueError as exc:
        print(f"qcolor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = _execute(config)
    except _Failure as exc:
        print(f"qcolor: error: {exc}", file=sys.stderr)
        return exc.code
    except (QColorError, ValueError) as exc:
        print(f"qcolor: error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    if config.report:
        report = {k: _finite(v) for k, v in report.items()}
        if config.timing:
            report["wall_time_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
        try:
            _write_report(report, config.report)
        except _Failure as exc:
            print(f"qcolor: error: {exc}", file=sys.stderr)
            return exc.code
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
