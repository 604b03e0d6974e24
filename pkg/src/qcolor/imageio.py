"""RGB image buffers and their PPM (P6) / PNG file codecs."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .colorcodec import RgbColor
from .errors import ImageFormatError, ImageParseError, ShapeError


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """8-bit RGB image. ``data`` has shape ``(height, width, 3)``, row-major."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.uint8)
        if data.ndim != 3 or data.shape[2] != 3 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError(f"image data must be (height>=1, width>=1, 3), got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_pixels(cls, width: int, height: int, pixels) -> ImageBuffer:
        """Build from a row-major sequence of ``width * height`` colors."""
        arr = np.array([tuple(p) for p in pixels], dtype=np.int64)
        if arr.shape != (width * height, 3):
            raise ShapeError(f"expected {width * height} RGB pixels, got array of shape {arr.shape}")
        if arr.min(initial=0) < 0 or arr.max(initial=0) > 255:
            raise ValueError("pixel channels must lie in 0..255")
        return cls(arr.reshape(height, width, 3))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return (self.width, self.height)

    def pixel(self, x: int, y: int) -> RgbColor:
        return RgbColor(*(int(c) for c in self.data[y, x]))

    def pixels(self) -> Iterator[RgbColor]:
        for r, g, b in self.data.reshape(-1, 3).tolist():
            yield RgbColor(r, g, b)

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"ImageBuffer({self.width}x{self.height})"


_WHITESPACE = b" \t\n\r\x0b\x0c"


def _header_token(buf: bytes, pos: int) -> tuple[bytes, int, int]:
    """Next header token; returns (token, start offset, offset after token)."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    if pos >= n:
        raise ImageParseError("unexpected end of header", pos)
    start = pos
    while pos < n and buf[pos : pos + 1] not in _WHITESPACE and buf[pos : pos + 1] != b"#":
        pos += 1
    return buf[start:pos], start, pos


def _header_int(buf: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, start, pos = _header_token(buf, pos)
    if not tok.isdigit():
        raise ImageParseError(f"expected {what}, found {tok[:16]!r}", start)
    return int(tok), pos


def decode_ppm(buf: bytes) -> ImageBuffer:
    if buf[:2] != b"P6":
        raise ImageParseError(f"not a binary PPM (magic {buf[:2]!r}, expected b'P6')", 0)
    pos = 2
    if pos >= len(buf) or buf[pos : pos + 1] not in _WHITESPACE + b"#":
        raise ImageParseError("missing whitespace after magic number", pos)
    width, pos = _header_int(buf, pos, "width")
    height, pos = _header_int(buf, pos, "height")
    maxval_pos = pos
    maxval, pos = _header_int(buf, pos, "maxval")
    if width < 1 or height < 1:
        raise ImageParseError(f"image dimensions must be positive, got {width}x{height}", maxval_pos)
    if maxval != 255:
        raise ImageFormatError(f"unsupported maxval {maxval}; only 255 is accepted")
    if pos >= len(buf) or buf[pos : pos + 1] not in _WHITESPACE:
        raise ImageParseError("missing whitespace before pixel data", pos)
    pos += 1
    need = width * height * 3
    payload = buf[pos : pos + need]
    if len(payload) < need:
        raise ImageParseError(f"pixel data truncated: need {need} bytes, have {len(payload)}", pos + len(payload))
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer(data)


def encode_ppm(image: ImageBuffer) -> bytes:
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.data.tobytes()


def _is_png(path: Path) -> bool:
    return path.suffix.lower() == ".png"


def load_image(path: str | os.PathLike) -> ImageBuffer:
    path = Path(path)
    buf = path.read_bytes()
    if buf.startswith(b"\x89PNG"):
        return _load_png(path)
    return decode_ppm(buf)


def save_image(image: ImageBuffer, path: str | os.PathLike) -> None:
    path = Path(path)
    if _is_png(path):
        _save_png(image, path)
    else:
        path.write_bytes(encode_ppm(image))


def _pillow():
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise ImageFormatError("PNG support needs Pillow (pip install 'artifact[png]')") from exc
    return Image


def _load_png(path: Path) -> ImageBuffer:
    Image = _pillow()
    with Image.open(path) as im:
        if im.mode not in ("RGB", "L", "P", "RGBA"):
            raise ImageFormatError(f"unsupported PNG mode {im.mode}")
        return ImageBuffer(np.asarray(im.convert("RGB")))


def _save_png(image: ImageBuffer, path: Path) -> None:
    Image = _pillow()
    Image.fromarray(np.ascontiguousarray(image.data)).save(path, format="PNG")
