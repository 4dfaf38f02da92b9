"""File formats and image ingestion: PGM parsing, patch extraction,
mean-removal preprocessing, and matrix / dictionary serialization.

Binary matrix format: magic b"ITKM", u32 version (=1), u64 d, u64 K, then
d*K little-endian float64 values in column-major order.  CSV stores one
atom per column with 17 significant digits (value-exact round trip).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dictionary import Dictionary

MAGIC = b"ITKM"
VERSION = 1

__all__ = [
    "GrayImage",
    "PatchSet",
    "read_pgm",
    "extract_patches",
    "preprocess_patches",
    "write_matrix",
    "read_matrix",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_dictionary",
    "read_dictionary",
]


class PgmParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class GrayImage:
    """Grayscale image, row-major samples scaled to [0, 1]."""

    width: int
    height: int
    data: np.ndarray  # (height, width) float64 in [0, 1]


@dataclass(frozen=True)
class PatchSet:
    """d x N matrix of vectorized p x p patches (row-major pixel order)."""

    patch_edge: int
    patches: np.ndarray
    normalized: bool = False
    mean_removed: bool = False
    dropped: int = 0
    pre_projection_norms: np.ndarray | None = None


def _read_pgm_tokens(buf: bytes, count: int, start: int) -> tuple[list[int], int]:
    """Read whitespace-separated integer tokens, skipping '#' comments."""
    tokens: list[int] = []
    i = start
    n = len(buf)
    while len(tokens) < count:
        while i < n and buf[i : i + 1].isspace():
            i += 1
        if i < n and buf[i] == ord("#"):
            while i < n and buf[i] not in (10, 13):
                i += 1
            continue
        j = i
        while j < n and not buf[j : j + 1].isspace():
            j += 1
        if j == i:
            raise PgmParseError("unexpected end of header", i)
        tok = buf[i:j]
        if not tok.isdigit():
            raise PgmParseError(f"expected integer, got {tok!r}", i)
        tokens.append(int(tok))
        i = j
    return tokens, i


def read_pgm(path: str | Path) -> GrayImage:
    """Parse a binary (P5) or ASCII (P2) PGM file with maxval <= 255."""
    buf = Path(path).read_bytes()
    if len(buf) < 2 or buf[:1] != b"P" or buf[1:2] not in (b"2", b"5"):
        raise PgmParseError(f"bad magic {buf[:2]!r}, expected P2 or P5", 0)
    binary = buf[1:2] == b"5"
    (width, height, maxval), pos = _read_pgm_tokens(buf, 3, 2)
    if width < 1 or height < 1:
        raise PgmParseError(f"bad dimensions {width}x{height}", 2)
    if not 0 < maxval <= 255:
        raise PgmParseError(f"maxval {maxval} out of supported range (1..255)", 2)
    count = width * height
    if binary:
        pos += 1  # exactly one whitespace byte after maxval
        if len(buf) - pos < count:
            raise PgmParseError(
                f"short pixel data: need {count} bytes, have {len(buf) - pos}", pos
            )
        raw = np.frombuffer(buf, dtype=np.uint8, count=count, offset=pos)
    else:
        try:
            values, _ = _read_pgm_tokens(buf, count, pos)
        except PgmParseError as e:
            raise PgmParseError(f"short pixel data: need {count} samples", e.offset) from None
        raw = np.array(values, dtype=np.uint8)
        if raw.size and raw.max() > maxval:
            raise PgmParseError(f"sample exceeds maxval {maxval}", pos)
    data = raw.reshape(height, width).astype(np.float64) / maxval
    return GrayImage(width, height, data)


def extract_patches(img: GrayImage, p: int = 8) -> PatchSet:
    """All (w-p+1)(h-p+1) overlapping p x p patches, one column per patch."""
    if p < 1 or p > min(img.width, img.height):
        raise ValueError(f"patch edge {p} exceeds image size {img.width}x{img.height}")
    from numpy.lib.stride_tricks import sliding_window_view

    windows = sliding_window_view(img.data, (p, p))  # (h-p+1, w-p+1, p, p)
    n = windows.shape[0] * windows.shape[1]
    patches = windows.reshape(n, p * p).T.copy()
    return PatchSet(p, patches)


def preprocess_patches(
    ps: PatchSet,
    remove_mean: bool = True,
    normalize: bool = True,
    renormalize: bool = True,
) -> PatchSet:
    """Normalize, then project onto the complement of the constant vector.

    Order matters: normalization happens first, then mean removal (the
    projection shrinks norms).  Zero-norm columns (flat patches) are
    dropped and counted.  ``renormalize`` restores unit norms after the
    projection; disable to keep the literal normalize-then-project output.
    """
    X = ps.patches.copy()
    d = X.shape[0]
    dropped = 0
    if normalize:
        norms = np.linalg.norm(X, axis=0)
        keep = norms >= 1e-12
        dropped += int(np.sum(~keep))
        X = X[:, keep] / norms[keep]
    pre_norms = None
    if remove_mean:
        X = X - np.mean(X, axis=0, keepdims=True)
        pre_norms = np.linalg.norm(X, axis=0)
        keep = pre_norms >= 1e-12
        dropped += int(np.sum(~keep))
        X = X[:, keep]
        pre_norms = pre_norms[keep]
        if renormalize:
            X = X / pre_norms
    return PatchSet(
        ps.patch_edge,
        X,
        normalized=normalize or (remove_mean and renormalize),
        mean_removed=remove_mean,
        dropped=dropped,
        pre_projection_norms=pre_norms,
    )


def write_matrix(path: str | Path, M: np.ndarray) -> None:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    d, K = M.shape
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQQ", VERSION, d, K))
        f.write(M.astype("<f8").tobytes(order="F"))


def read_matrix(path: str | Path) -> np.ndarray:
    buf = Path(path).read_bytes()
    if buf[:4] != MAGIC:
        raise ValueError(f"bad magic {buf[:4]!r}, expected {MAGIC!r}")
    version, d, K = struct.unpack_from("<IQQ", buf, 4)
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    need = 4 + 20 + 8 * d * K
    if len(buf) < need:
        raise ValueError(f"truncated matrix file: need {need} bytes, have {len(buf)}")
    flat = np.frombuffer(buf, dtype="<f8", count=d * K, offset=24)
    return flat.reshape((d, K), order="F").copy()


def write_matrix_csv(path: str | Path, M: np.ndarray) -> None:
    np.savetxt(path, np.asarray(M, dtype=np.float64), delimiter=",", fmt="%.17g")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))


def write_dictionary(path: str | Path, D: Dictionary) -> None:
    write_matrix(path, D.atoms)


def read_dictionary(path: str | Path) -> Dictionary:
    return Dictionary(read_matrix(path))
