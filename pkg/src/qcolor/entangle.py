"""Channel, HSV, cross-image and external-data entanglement recipes.

Operations are written as gate plans over named roles rather than qubit
numbers:

======== ==============================================================
role     qubit
======== ==============================================================
R G B    the pixel's color register (always qubits 0, 1, 2)
H S V    HSV copy of the same pixel (``hsv_control``)
R' G' B' the matching pixel of a second image (``cross_image``)
D        every data qubit of an external signal (``external_data``)
======== ==============================================================

Controlled gates fire on |1>. Since a full-scale channel encodes to |0>,
bright channels are *inactive* controls and dark ones active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .colorcodec import encode_hsv_circuit, encode_rgb_circuit, rgb_to_hsv, theta_from_fraction
from .errors import PlanError, ShapeError
from .imagecodec import (
    EXACT,
    PositionEncoding,
    Recipe,
    RunStats,
    Shots,
    _assemble,
    _execute,
    error_stats,
    normalize_shots,
    process_image,
    psnr_db,
)
from .imageio import ImageBuffer
from .qstate import GATE_ARITY, ROTATIONS, Circuit, Gate, ry

KINDS = ("channel_remap", "hsv_control", "cross_image", "external_data")

KIND_ROLES = {
    "channel_remap": ("R", "G", "B"),
    "hsv_control": ("R", "G", "B", "H", "S", "V"),
    "cross_image": ("R", "G", "B", "R'", "G'", "B'"),
    "external_data": ("R", "G", "B", "D"),
}

_ROLE_ALIASES = {"R′": "R'", "G′": "G'", "B′": "B'"}


def canonical_role(name: str) -> str:
    name = name.strip()
    return _ROLE_ALIASES.get(name, name).upper()


def kind_for_roles(roles) -> str:
    """Smallest plan kind whose role set covers ``roles``."""
    roles = set(roles)
    families = [k for k in ("hsv_control", "cross_image", "external_data") if roles & (set(KIND_ROLES[k]) - {"R", "G", "B"})]
    if len(families) > 1:
        raise PlanError(f"plan mixes roles of {' and '.join(families)}")
    kind = families[0] if families else "channel_remap"
    unknown = roles - set(KIND_ROLES[kind])
    if unknown:
        raise PlanError(f"unknown role(s) {sorted(unknown)}")
    return kind


@dataclass(frozen=True)
class PlanGate:
    """A gate over roles. ``angle`` None means "use the plan strength"."""

    kind: str
    roles: tuple[str, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "roles", tuple(canonical_role(r) for r in self.roles))
        if kind not in GATE_ARITY:
            raise PlanError(f"unknown gate {self.kind!r}")
        if len(self.roles) != GATE_ARITY[kind]:
            raise PlanError(f"{kind} takes {GATE_ARITY[kind]} role(s), got {len(self.roles)}")
        if len(set(self.roles)) != len(self.roles):
            raise PlanError(f"{kind} roles must be distinct, got {' '.join(self.roles)}")
        if self.angle is not None and kind not in ROTATIONS:
            raise PlanError(f"{kind} takes no angle")

    def to_text(self) -> str:
        parts = [self.kind, *self.roles]
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


@dataclass(frozen=True)
class EntangleSpec:
    kind: str = "channel_remap"
    gate_plan: tuple[PlanGate, ...] = ()
    strength: float = math.pi / 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlanError(f"unknown plan kind {self.kind!r}")
        object.__setattr__(self, "gate_plan", tuple(self.gate_plan))
        if not 0.0 <= self.strength <= math.pi:
            raise PlanError(f"strength {self.strength} outside [0, pi]")
        allowed = set(KIND_ROLES[self.kind])
        for g in self.gate_plan:
            bad = [r for r in g.roles if r not in allowed]
            if bad:
                raise PlanError(f"{g.to_text()!r}: role(s) {bad} not available in a {self.kind} plan")

    def to_text(self) -> str:
        lines = [f"# kind: {self.kind}", f"STRENGTH {self.strength!r}"]
        lines += [g.to_text() for g in self.gate_plan]
        return "\n".join(lines) + "\n"

    def with_kind(self, kind: str) -> EntangleSpec:
        return EntangleSpec(kind, self.gate_plan, self.strength)


@dataclass(frozen=True)
class ChordSignal:
    pitch_classes: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        pcs = tuple(int(p) for p in self.pitch_classes)
        ws = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "pitch_classes", pcs)
        object.__setattr__(self, "weights", ws)
        if not pcs:
            raise PlanError("chord needs at least one pitch class")
        if len(ws) != len(pcs):
            raise PlanError(f"{len(pcs)} pitch classes but {len(ws)} weights")
        if len(set(pcs)) != len(pcs) or any(not 0 <= p <= 11 for p in pcs):
            raise PlanError(f"pitch classes must be distinct integers in 0..11, got {pcs}")
        if any(not 0.0 <= w <= 1.0 for w in ws):
            raise PlanError(f"weights must lie in [0, 1], got {ws}")

    @classmethod
    def major(cls, root: int, weight: float = 0.0) -> ChordSignal:
        """Root, major third, fifth. ``major(7)`` is G major {7, 11, 2}."""
        return cls(tuple((root + k) % 12 for k in (0, 4, 7)), (weight,) * 3)


def _role_index(kind: str) -> dict[str, int]:
    return {role: i for i, role in enumerate(KIND_ROLES[kind]) if role != "D"}


def materialize(spec: EntangleSpec, chord: ChordSignal | None = None) -> Circuit:
    """Turn a role plan into a concrete circuit on the kind's register.

    For ``external_data`` plans each gate touching ``D`` is repeated once per
    pitch class; rotations add an offset of ``strength/pi * 2*pi*pc/12`` to
    the gate angle.
    """
    index = _role_index(spec.kind)
    if spec.kind == "external_data":
        if chord is None:
            raise PlanError("external_data plan needs a chord")
        n = 3 + len(chord.pitch_classes)
    else:
        n = len(index)
    gates: list[Gate] = []
    for pg in spec.gate_plan:
        base = spec.strength if pg.angle is None else pg.angle
        angle = base if pg.kind in ROTATIONS else None
        if "D" not in pg.roles:
            gates.append(Gate(pg.kind, tuple(index[r] for r in pg.roles), angle))
            continue
        for k, pc in enumerate(chord.pitch_classes):
            qubits = tuple(3 + k if r == "D" else index[r] for r in pg.roles)
            a = None if angle is None else angle + spec.strength / math.pi * 2 * math.pi * pc / 12
            gates.append(Gate(pg.kind, qubits, a))
    return Circuit(n, tuple(gates))


def _require(spec: EntangleSpec, kind: str):
    if spec.kind != kind:
        raise PlanError(f"expected a {kind} plan, got {spec.kind}")


def channel_entangle_circuit(spec: EntangleSpec) -> Recipe:
    _require(spec, "channel_remap")
    return Recipe(3, body=materialize(spec))


def hsv_control_circuit(spec: EntangleSpec) -> Recipe:
    """RGB on qubits 0-2 and the pixel's own HSV conversion on qubits 3-5."""
    _require(spec, "hsv_control")
    return Recipe(6, body=materialize(spec), prepare=lambda rec: encode_hsv_circuit(rgb_to_hsv(rec.color), 6, offset=3))


def cross_image_recipe(image_b: ImageBuffer, spec: EntangleSpec) -> Recipe:
    """RGB of the working image on 0-2, the same-position pixel of ``image_b`` on 3-5."""
    _require(spec, "cross_image")
    return Recipe(6, body=materialize(spec), prepare=lambda rec: encode_rgb_circuit(image_b.pixel(rec.x, rec.y), 6, offset=3))


def cross_image_entangle(
    image_a: ImageBuffer,
    image_b: ImageBuffer,
    spec: EntangleSpec,
    shots: Shots = EXACT,
    seed: int = 0,
    *,
    workers: int = 1,
) -> tuple[ImageBuffer, RunStats]:
    if image_a.size != image_b.size:
        raise ShapeError(f"images differ in size: {image_a.size} vs {image_b.size}")
    return process_image(image_a, cross_image_recipe(image_b, spec), shots, seed, workers=workers)


def data_entangle_circuit(chord: ChordSignal, spec: EntangleSpec) -> Recipe:
    """One data qubit per pitch class, prepared as ``RY(arccos(2 w - 1))``."""
    _require(spec, "external_data")
    body = materialize(spec, chord)
    n = body.n_qubits
    prep = Circuit(n, tuple(ry(theta_from_fraction(w), 3 + k) for k, w in enumerate(chord.weights)))
    return Recipe(n, body=body, prepare=prep)


def recipe_for(spec: EntangleSpec, *, image_b: ImageBuffer | None = None, chord: ChordSignal | None = None) -> Recipe:
    """Build the recipe matching ``spec.kind``."""
    if spec.kind == "channel_remap":
        return channel_entangle_circuit(spec)
    if spec.kind == "hsv_control":
        return hsv_control_circuit(spec)
    if spec.kind == "cross_image":
        if image_b is None:
            raise PlanError("cross_image plan needs a second image")
        return cross_image_recipe(image_b, spec)
    if chord is None:
        raise PlanError("external_data plan needs a chord")
    return data_entangle_circuit(chord, spec)


# -- restoration -------------------------------------------------------------


@dataclass
class RestoreReport:
    max_statevector_deviation: float
    psnr_db: float
    restored: bool
    stats: RunStats | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "max_statevector_deviation": self.max_statevector_deviation,
            "psnr_db": None if math.isinf(self.psnr_db) else self.psnr_db,
            "restored": self.restored,
        }


def symmetric_restore(
    image: ImageBuffer,
    recipe: Recipe,
    shots: Shots = EXACT,
    seed: int = 0,
    *,
    workers: int = 1,
) -> tuple[ImageBuffer, RestoreReport]:
    """Run ``recipe`` then its inverse on every pixel and measure how well the image comes back.

    The statevector deviation compares each pixel's final exact state with
    its state right after encoding and preparation.
    """
    shots = normalize_shots(shots)
    decoded = _execute(image, recipe.symmetric(), shots, seed, None, workers, reference=recipe.without_operation())
    out, dislocations, _ = _assemble(image, decoded)
    rms, mae = error_stats(out, image)
    stats = RunStats(rms, mae, dislocations, shots, int(seed))
    report = RestoreReport(
        max_statevector_deviation=decoded.max_deviation,
        psnr_db=psnr_db(out, image),
        restored=shots == EXACT and out == image,
        stats=stats,
    )
    return out, report


# -- shot-noise experiment ----------------------------------------------------


@dataclass
class ShotEntry:
    shots: Shots
    rms: float
    rms_per_channel: list[float]
    mean_abs_error: float
    dislocations: int

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "rms": self.rms,
            "rms_per_channel": list(self.rms_per_channel),
            "mean_abs_error": self.mean_abs_error,
            "dislocations": self.dislocations,
        }


def _ratio(a: float, b: float) -> float | None:
    if b == 0:
        return None if a != 0 else 1.0
    return a / b


@dataclass
class DislocationReport:
    entries: list[ShotEntry]
    seed: int
    mode: str

    @property
    def ratios(self) -> list[dict]:
        """Error ratios between consecutive shot counts (earlier over later)."""
        out = []
        for a, b in zip(self.entries, self.entries[1:]):
            out.append(
                {
                    "from": a.shots,
                    "to": b.shots,
                    "rms_ratio": _ratio(a.rms, b.rms),
                    "dislocation_ratio": _ratio(a.dislocations, b.dislocations),
                }
            )
        return out

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "ratios": self.ratios,
            "seed": self.seed,
            "position_mode": self.mode,
        }


def dislocation_experiment(
    image: ImageBuffer,
    shot_counts,
    seed: int = 0,
    *,
    mode: str = "coordinate",
    workers: int = 1,
) -> DislocationReport:
    """Identity color recipe with position encoding, measured at each shot count."""
    shot_counts = [normalize_shots(s) for s in shot_counts]
    if not shot_counts:
        raise ValueError("shot_counts must not be empty")
    position = PositionEncoding(mode, image.size)
    entries = []
    for shots in shot_counts:
        _, stats = process_image(image, None, shots, seed, position=position, workers=workers)
        entries.append(ShotEntry(shots, stats.rms, stats.rms_per_channel, stats.mean_abs_error, stats.dislocations))
    return DislocationReport(entries, int(seed), mode)


def random_spec(rng: np.random.Generator, n_gates: int, kind: str = "channel_remap", strength: float = math.pi / 2) -> EntangleSpec:
    """A random plan over ``kind``'s roles; handy for restoration checks."""
    roles = KIND_ROLES[kind]
    kinds = sorted(GATE_ARITY)
    plan = []
    while len(plan) < n_gates:
        gk = kinds[rng.integers(len(kinds))]
        arity = GATE_ARITY[gk]
        if arity > len(roles):
            continue
        picked = tuple(roles[i] for i in rng.choice(len(roles), size=arity, replace=False))
        if list(picked).count("D") > 1:
            continue
        angle = float(rng.uniform(-math.pi, math.pi)) if gk in ROTATIONS else None
        plan.append(PlanGate(gk, picked, angle))
    return EntangleSpec(kind, tuple(plan), strength)
