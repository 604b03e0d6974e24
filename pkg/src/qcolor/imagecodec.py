"""Pixel-position qubit codecs and the per-pixel circuit pipeline.

Each pixel gets its own small register: three color qubits (R, G, B), any
ancillas a recipe asks for, and optionally one or two position qubits
appended at the end. The pipeline encodes, runs the recipe, measures
(exactly or with seeded shots) and decodes color and position back into an
output image.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np

from .colorcodec import RgbColor, channels_from_prob0, round_half_up, theta_from_channel
from .errors import PixelCircuitError, QColorError, ShapeError
from .imageio import ImageBuffer
from .qstate import (
    PRNG_NAME,
    ROTATIONS,
    Circuit,
    Gate,
    ProbEstimate,
    _check_shots,
    inverse_circuit,
    make_rng,
    marginal_prob0_dense,
    probabilities_of,
    ry,
    run_batch,
    sample_counts,
)

EXACT = "exact"
Shots = Union[int, str]

# Amplitudes simulated together per batch; bounds memory for wide registers.
_BATCH_AMPLITUDES = 1 << 18
_MAX_BATCH = 512


@dataclass(frozen=True)
class PixelRecord:
    x: int
    y: int
    color: RgbColor


@dataclass(frozen=True)
class PositionEncoding:
    mode: str
    size_tag: tuple[int, int]

    def __post_init__(self):
        if self.mode not in ("coordinate", "sequence"):
            raise ValueError(f"position mode must be 'coordinate' or 'sequence', got {self.mode!r}")
        w, h = self.size_tag
        if w < 1 or h < 1:
            raise ValueError(f"size tag must be positive, got {self.size_tag}")

    @property
    def n_qubits(self) -> int:
        return 2 if self.mode == "coordinate" else 1


@dataclass(frozen=True)
class PixelRunResult:
    record: PixelRecord
    decoded_position: tuple[int, int]
    decoded_color: RgbColor

    @property
    def dislocated(self) -> bool:
        return self.decoded_position != (self.record.x, self.record.y)


# -- position codecs ---------------------------------------------------------


def _span_theta(i: int, extent: int, what: str) -> float:
    """Angle for position ``i`` along an axis of ``extent`` cells; ends map to pi and 0."""
    if extent < 1:
        raise ValueError(f"{what} extent must be >= 1, got {extent}")
    if not 0 <= i < extent:
        raise ValueError(f"{what} {i} outside 0..{extent - 1}")
    # A 1-wide axis pins its qubit to |0>.
    return 0.0 if extent == 1 else theta_from_channel(i, extent - 1)


def encode_position_coordinate(x: int, y: int, size: tuple[int, int]) -> Circuit:
    w, h = size
    return Circuit(2, (ry(_span_theta(x, w, "x"), 0), ry(_span_theta(y, h, "y"), 1)))


def decode_position_coordinate(est: ProbEstimate, size: tuple[int, int]) -> tuple[int, int]:
    if est.n_qubits != 2:
        raise ShapeError(f"coordinate decode needs a 2-qubit estimate, got {est.n_qubits}")
    w, h = size
    px = marginal_prob0_dense(est.probs, 0, 2)
    py = marginal_prob0_dense(est.probs, 1, 2)
    return _span_decode(px, w), _span_decode(py, h)


def encode_position_sequence(index: int, length: int) -> Circuit:
    return Circuit(1, (ry(_span_theta(index, length, "index"), 0),))


def decode_position_sequence(est: ProbEstimate, length: int) -> int:
    if est.n_qubits != 1:
        raise ShapeError(f"sequence decode needs a 1-qubit estimate, got {est.n_qubits}")
    return _span_decode(marginal_prob0_dense(est.probs, 0, 1), length)


def _span_decode(prob0, extent: int):
    out = np.clip(round_half_up(np.asarray(prob0) * (extent - 1)), 0, extent - 1)
    return int(out) if out.ndim == 0 else out


# -- recipes -----------------------------------------------------------------


CircuitSource = Union[Circuit, Callable[[PixelRecord], Circuit], None]


@dataclass(frozen=True)
class Recipe:
    """How to build one pixel's circuit.

    Qubits ``color_qubits`` receive the pixel's RGB encoding. ``prepare``
    then sets up any ancillas (HSV copy, second image, data qubits) and
    ``body`` is the operation proper. Either may be a fixed circuit or a
    function of the pixel. Both must be defined on ``n_qubits`` qubits.
    """

    n_qubits: int = 3
    body: CircuitSource = None
    prepare: CircuitSource = None
    color_qubits: tuple[int, int, int] = (0, 1, 2)
    # Applied after ``body``; used for the inverse half of symmetric runs.
    post: Callable[[Circuit], Circuit] | None = field(default=None, compare=False)

    def _resolve(self, source: CircuitSource, record: PixelRecord) -> Circuit:
        if source is None:
            return Circuit(self.n_qubits)
        circ = source(record) if callable(source) else source
        if not isinstance(circ, Circuit):
            raise TypeError(f"recipe produced {type(circ).__name__}, expected Circuit")
        if circ.n_qubits != self.n_qubits:
            raise ShapeError(f"recipe circuit has {circ.n_qubits} qubits, recipe declares {self.n_qubits}")
        return circ

    def preparation(self, record: PixelRecord) -> Circuit:
        return self._resolve(self.prepare, record)

    def operation(self, record: PixelRecord) -> Circuit:
        body = self._resolve(self.body, record)
        if self.post is not None:
            body = self.post(body)
        return body

    def symmetric(self) -> Recipe:
        """The operation followed by its inverse."""
        previous = self.post

        def forward_then_back(body: Circuit) -> Circuit:
            if previous is not None:
                body = previous(body)
            return body.then(inverse_circuit(body))

        return replace(self, post=forward_then_back)

    def inverted(self) -> Recipe:
        """Only the inverse of the operation."""
        previous = self.post

        def back(body: Circuit) -> Circuit:
            if previous is not None:
                body = previous(body)
            return inverse_circuit(body)

        return replace(self, post=back)

    def without_operation(self) -> Recipe:
        """Encoding and preparation only."""
        return replace(self, body=None, post=None)


IDENTITY = Recipe()


def pixel_circuit(record: PixelRecord, recipe: Recipe, position: PositionEncoding | None = None) -> Circuit:
    """Full circuit for one pixel: color encoding, position encoding, preparation, operation."""
    n_pos = 0 if position is None else position.n_qubits
    n = recipe.n_qubits + n_pos
    gates: list[Gate] = [ry(theta_from_channel(v), q) for q, v in zip(recipe.color_qubits, record.color)]
    if position is not None:
        w, h = position.size_tag
        base = recipe.n_qubits
        if position.mode == "coordinate":
            gates.append(ry(_span_theta(record.x, w, "x"), base))
            gates.append(ry(_span_theta(record.y, h, "y"), base + 1))
        else:
            gates.append(ry(_span_theta(record.y * w + record.x, w * h, "index"), base))
    gates.extend(recipe.preparation(record).gates)
    gates.extend(recipe.operation(record).gates)
    return Circuit(n, tuple(gates))


# -- pipeline ----------------------------------------------------------------


@dataclass
class RunStats:
    rms_per_channel: list[float]
    mean_abs_error: float
    dislocations: int
    shots: Shots
    seed: int
    prng_name: str = PRNG_NAME
    pixel_results: list[PixelRunResult] | None = field(default=None, repr=False)

    @property
    def rms(self) -> float:
        """RMS error over all channels jointly."""
        return math.sqrt(sum(r * r for r in self.rms_per_channel) / 3)

    def to_dict(self) -> dict:
        return {
            "rms_per_channel": list(self.rms_per_channel),
            "mean_abs_error": self.mean_abs_error,
            "dislocations": self.dislocations,
            "shots": self.shots,
            "seed": self.seed,
            "prng_name": self.prng_name,
        }


def error_stats(output: ImageBuffer, reference: ImageBuffer) -> tuple[list[float], float]:
    """Per-channel RMS and overall mean absolute error of ``output`` against ``reference``."""
    if output.size != reference.size:
        raise ShapeError(f"image sizes differ: {output.size} vs {reference.size}")
    diff = output.data.astype(np.float64) - reference.data.astype(np.float64)
    rms = np.sqrt(np.mean(diff**2, axis=(0, 1)))
    return [float(v) for v in rms], float(np.mean(np.abs(diff)))


def psnr_db(output: ImageBuffer, reference: ImageBuffer, peak: float = 255.0) -> float:
    """PSNR over all three channels jointly; ``inf`` for identical images."""
    if output.size != reference.size:
        raise ShapeError(f"image sizes differ: {output.size} vs {reference.size}")
    diff = output.data.astype(np.float64) - reference.data.astype(np.float64)
    mse = float(np.mean(diff**2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def normalize_shots(shots: Shots | None) -> Shots:
    if shots is None or shots == EXACT:
        return EXACT
    return _check_shots(shots)


@dataclass
class _Block:
    indices: list[int]
    signature: tuple
    angles: np.ndarray
    reference_signature: tuple | None = None
    reference_angles: np.ndarray | None = None


def _angles_of(circuits: Sequence[Circuit]) -> np.ndarray:
    return np.array(
        [[g.angle if g.kind in ROTATIONS else 0.0 for g in c.gates] for c in circuits], dtype=np.float64
    ).reshape(len(circuits), -1)


def _plan_blocks(circuits: list[Circuit], references: list[Circuit] | None, n_qubits: int) -> list[_Block]:
    """Group circuits by gate structure, then cut each group into fixed-size blocks.

    Block layout depends only on the circuits, never on worker count, so
    parallel and sequential runs perform identical arithmetic.
    """
    size = max(1, min(_MAX_BATCH, _BATCH_AMPLITUDES >> n_qubits))
    groups: dict[tuple, list[int]] = {}
    for i, c in enumerate(circuits):
        key = c.signature() if references is None else (c.signature(), references[i].signature())
        groups.setdefault(key, []).append(i)
    blocks = []
    for idx in groups.values():
        for start in range(0, len(idx), size):
            chunk = idx[start : start + size]
            block = _Block(chunk, circuits[chunk[0]].signature(), _angles_of([circuits[i] for i in chunk]))
            if references is not None:
                block.reference_signature = references[chunk[0]].signature()
                block.reference_angles = _angles_of([references[i] for i in chunk])
            blocks.append(block)
    return blocks


@dataclass
class _Decoded:
    colors: np.ndarray  # (n_pix, 3)
    positions: np.ndarray  # (n_pix, 2), (x, y)
    max_deviation: float = 0.0


def _execute(
    image: ImageBuffer,
    recipe: Recipe,
    shots: Shots,
    seed: int,
    position: PositionEncoding | None,
    workers: int,
    reference: Recipe | None = None,
) -> _Decoded:
    w, h = image.size
    n_pos = 0 if position is None else position.n_qubits
    n = recipe.n_qubits + n_pos
    records = [PixelRecord(i % w, i // w, c) for i, c in enumerate(image.pixels())]

    def build(r: Recipe) -> list[Circuit]:
        out = []
        for rec in records:
            try:
                out.append(pixel_circuit(rec, r, position))
            except (QColorError, ValueError, IndexError, TypeError) as exc:
                raise PixelCircuitError(rec.x, rec.y, exc) from exc
        return out

    circuits = build(recipe)
    references = build(reference) if reference is not None else None
    blocks = _plan_blocks(circuits, references, n)
    color_qubits = recipe.color_qubits
    base = recipe.n_qubits

    def run(block: _Block):
        amps = run_batch(n, block.signature, block.angles)
        deviation = 0.0
        if block.reference_signature is not None:
            ref = run_batch(n, block.reference_signature, block.reference_angles)
            deviation = float(np.max(np.abs(amps - ref)))
        probs = probabilities_of(amps)
        if shots != EXACT:
            probs = np.stack([sample_counts(p, shots, make_rng(seed, i)) for p, i in zip(probs, block.indices)])
            probs = probs / shots
        colors = np.stack([channels_from_prob0(marginal_prob0_dense(probs, q, n)) for q in color_qubits], axis=1)
        idx = np.asarray(block.indices)
        if position is None:
            pos = np.stack([idx % w, idx // w], axis=1)
        elif position.mode == "coordinate":
            px = _span_decode(marginal_prob0_dense(probs, base, n), w)
            py = _span_decode(marginal_prob0_dense(probs, base + 1, n), h)
            pos = np.stack([np.atleast_1d(px), np.atleast_1d(py)], axis=1)
        else:
            seq = np.atleast_1d(_span_decode(marginal_prob0_dense(probs, base, n), w * h))
            pos = np.stack([seq % w, seq // w], axis=1)
        return idx, colors, pos, deviation

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]

    n_pix = len(records)
    colors = np.zeros((n_pix, 3), dtype=np.int64)
    positions = np.zeros((n_pix, 2), dtype=np.int64)
    deviation = 0.0
    for idx, c, p, d in results:
        colors[idx] = c
        positions[idx] = p
        deviation = max(deviation, d)
    return _Decoded(colors, positions, deviation)


def _assemble(image: ImageBuffer, decoded: _Decoded) -> tuple[ImageBuffer, int, np.ndarray]:
    w = image.width
    out = image.data.copy()
    n_pix = decoded.colors.shape[0]
    home = np.stack([np.arange(n_pix) % w, np.arange(n_pix) // w], axis=1)
    moved = np.any(decoded.positions != home, axis=1)
    # Row-major order; on collision the later pixel wins. numpy leaves duplicate
    # fancy-index writes unspecified, so keep only the last writer per target.
    flat = decoded.positions[:, 1] * w + decoded.positions[:, 0]
    _, first_rev = np.unique(flat[::-1], return_index=True)
    keep = n_pix - 1 - first_rev
    pos = decoded.positions[keep]
    out[pos[:, 1], pos[:, 0]] = decoded.colors[keep].astype(np.uint8)
    return ImageBuffer(out), int(moved.sum()), moved


def process_image(
    image: ImageBuffer,
    recipe: Recipe | None = None,
    shots: Shots = EXACT,
    seed: int = 0,
    *,
    position: PositionEncoding | str | None = None,
    workers: int = 1,
    keep_records: bool = False,
) -> tuple[ImageBuffer, RunStats]:
    """Run every pixel of ``image`` through its circuit and rebuild the image.

    ``shots`` is a positive count or ``EXACT``. Pixel ``i`` (row-major) samples
    from its own PCG64 stream keyed on ``(seed, i)``, so results do not depend
    on processing order or ``workers``. ``position`` may be a mode name, in
    which case the image's own size is used as the tag.
    """
    recipe = IDENTITY if recipe is None else recipe
    shots = normalize_shots(shots)
    if isinstance(position, str):
        position = PositionEncoding(position, image.size)
    elif position is not None and tuple(position.size_tag) != image.size:
        raise ShapeError(f"position size tag {position.size_tag} does not match image {image.size}")
    decoded = _execute(image, recipe, shots, seed, position, workers)
    out, dislocations, moved = _assemble(image, decoded)
    rms, mae = error_stats(out, image)
    stats = RunStats(rms, mae, dislocations, shots, int(seed))
    if keep_records:
        w = image.width
        stats.pixel_results = [
            PixelRunResult(
                PixelRecord(i % w, i // w, image.pixel(i % w, i // w)),
                (int(decoded.positions[i, 0]), int(decoded.positions[i, 1])),
                RgbColor(*(int(c) for c in decoded.colors[i])),
            )
            for i in range(decoded.colors.shape[0])
        ]
    return out, stats
