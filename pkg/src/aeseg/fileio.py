"""Bit-exact binary tensor formats and netpbm image import/export.

Four little-endian container formats cover the pipeline's interchange
needs: AFF1 (pairwise relation tensors), EIG1 (embedding eigenvectors),
SEG1 (region labels), RNK1 (rank maps), plus OWN1 for boundary-ownership
sidecars. Writers produce identical bytes for identical inputs on every
platform; readers fail with typed errors naming the byte offset. Byte
layouts are documented in docs/formats.md.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .decoder import RankMap, SegmentationMap
from .eigensolver import EmbeddingResult
from .groundtruth import OwnershipLabels
from .stencil import GridDomain, RelationMap, Stencil

MAGIC_AFF = b"AFF1"
MAGIC_EIG = b"EIG1"
MAGIC_SEG = b"SEG1"
MAGIC_RNK = b"RNK1"
MAGIC_OWN = b"OWN1"


class FileFormatError(ValueError):
    """Malformed or truncated file; offset is the failing byte position."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class _Reader:
    def __init__(self, path):
        self.path = Path(path)
        self.data = self.path.read_bytes()
        self.pos = 0

    def take(self, nbytes: int, what: str) -> bytes:
        end = self.pos + nbytes
        if end > len(self.data):
            raise FileFormatError(
                f"{self.path}: truncated {what}: need {nbytes} bytes at offset "
                f"{self.pos}, file has {len(self.data)}",
                offset=self.pos,
            )
        out = self.data[self.pos : end]
        self.pos = end
        return out

    def magic(self, expected: bytes):
        got = self.take(4, "magic")
        if got != expected:
            raise FileFormatError(
                f"{self.path}: bad magic {got!r} at offset 0, expected {expected!r}",
                offset=0,
            )

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def array(self, dtype: str, count: int, what: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count, what), dtype=dtype).copy()

    def done(self):
        if self.pos != len(self.data):
            raise FileFormatError(
                f"{self.path}: {len(self.data) - self.pos} trailing bytes at "
                f"offset {self.pos}",
                offset=self.pos,
            )


def _dims(reader: _Reader) -> GridDomain:
    h = reader.u32("height")
    w = reader.u32("width")
    if h < 1 or w < 1:
        raise FileFormatError(
            f"{reader.path}: degenerate dimensions {h}x{w} at offset 4", offset=4
        )
    return GridDomain(h, w)


def write_aff1(path, rel: RelationMap):
    """Relation tensor: header, offset table, then per-offset b and f planes."""
    h, w = rel.domain.shape
    parts = [MAGIC_AFF, struct.pack("<III", h, w, len(rel.stencil))]
    for dy, dx in rel.stencil.offsets:
        parts.append(struct.pack("<ii", dy, dx))
    for k in range(len(rel.stencil)):
        parts.append(rel.b[k].astype("<f4").tobytes())
        parts.append(rel.f[k].astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_aff1(path) -> RelationMap:
    r = _Reader(path)
    r.magic(MAGIC_AFF)
    domain = _dims(r)
    k = r.u32("offset count")
    if k < 1:
        raise FileFormatError(f"{r.path}: empty offset table", offset=12)
    offsets = []
    for i in range(k):
        dy, dx = struct.unpack("<ii", r.take(8, f"offset {i}"))
        offsets.append((dy, dx))
    n = domain.n
    b = np.empty((k, domain.height, domain.width))
    f = np.empty_like(b)
    for i in range(k):
        b[i] = r.array("<f4", n, f"b plane {i}").reshape(domain.shape)
        f[i] = r.array("<f4", n, f"f plane {i}").reshape(domain.shape)
    r.done()
    try:
        return RelationMap(domain, Stencil(tuple(offsets)), b, f)
    except ValueError as exc:
        raise FileFormatError(f"{r.path}: {exc}") from exc


def write_eig1(path, emb: EmbeddingResult):
    """Embedding: per eigenvector a float64 eigenvalue then an interleaved
    (re, im) float32 vector. Requires the embedding to carry its domain."""
    if emb.domain is None:
        raise ValueError("embedding carries no grid domain; cannot serialize")
    h, w = emb.domain.shape
    if emb.eigenvectors.shape[1] != h * w:
        raise ValueError("eigenvector length does not match the domain")
    parts = [MAGIC_EIG, struct.pack("<III", h, w, emb.m)]
    for lam, z in zip(emb.eigenvalues, emb.eigenvectors):
        parts.append(struct.pack("<d", float(lam)))
        inter = np.empty(2 * len(z), dtype="<f4")
        inter[0::2] = z.real
        inter[1::2] = z.imag
        parts.append(inter.tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_eig1(path) -> EmbeddingResult:
    """Read an embedding. Residuals are not stored; they come back NaN."""
    r = _Reader(path)
    r.magic(MAGIC_EIG)
    domain = _dims(r)
    m = r.u32("eigenvector count")
    if m < 1:
        raise FileFormatError(f"{r.path}: zero eigenvectors declared", offset=12)
    n = domain.n
    lams = np.empty(m)
    vecs = np.empty((m, n), dtype=np.complex128)
    for i in range(m):
        lams[i] = struct.unpack("<d", r.take(8, f"eigenvalue {i}"))[0]
        inter = r.array("<f4", 2 * n, f"eigenvector {i}")
        vecs[i] = inter[0::2] + 1j * inter[1::2]
    r.done()
    return EmbeddingResult(lams, vecs, np.full(m, np.nan), domain=domain)


def write_seg1(path, seg: SegmentationMap):
    h, w = seg.labels.shape
    parts = [
        MAGIC_SEG,
        struct.pack("<III", h, w, seg.region_count),
        seg.labels.astype("<u4").tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def read_seg1(path) -> SegmentationMap:
    r = _Reader(path)
    r.magic(MAGIC_SEG)
    domain = _dims(r)
    count = r.u32("region count")
    labels = r.array("<u4", domain.n, "labels")
    r.done()
    over = np.flatnonzero(labels >= count)
    if over.size:
        idx = int(over[0])
        raise FileFormatError(
            f"{r.path}: label {int(labels[idx])} >= declared region count {count} "
            f"at offset {16 + 4 * idx}",
            offset=16 + 4 * idx,
        )
    try:
        return SegmentationMap(labels.reshape(domain.shape).astype(np.int32), count)
    except ValueError as exc:
        raise FileFormatError(f"{r.path}: {exc}") from exc


def write_rnk1(path, rank: RankMap):
    h, w = rank.theta.shape
    parts = [MAGIC_RNK, struct.pack("<II", h, w), rank.theta.astype("<f4").tobytes()]
    Path(path).write_bytes(b"".join(parts))


def read_rnk1(path) -> RankMap:
    r = _Reader(path)
    r.magic(MAGIC_RNK)
    domain = _dims(r)
    theta = r.array("<f4", domain.n, "rank values").astype(np.float64)
    r.done()
    return RankMap(theta.reshape(domain.shape))


def write_own1(path, own: OwnershipLabels):
    h, w = own.shape
    parts = [
        MAGIC_OWN,
        struct.pack("<II", h, w),
        own.horiz.astype("<i1").tobytes(),
        own.vert.astype("<i1").tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def read_own1(path) -> OwnershipLabels:
    r = _Reader(path)
    r.magic(MAGIC_OWN)
    domain = _dims(r)
    h, w = domain.shape
    horiz = r.array("<i1", h * (w - 1), "horizontal labels").reshape(h, w - 1)
    vert = r.array("<i1", (h - 1) * w, "vertical labels").reshape(h - 1, w)
    r.done()
    try:
        return OwnershipLabels(horiz.astype(np.int8), vert.astype(np.int8))
    except ValueError as exc:
        raise FileFormatError(f"{r.path}: {exc}") from exc


def _netpbm_tokens(data: bytes, start: int, count: int):
    """Read whitespace-separated header tokens, skipping # comments."""
    tokens = []
    pos = start
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos] == ord("#"):
            while pos < len(data) and data[pos] != ord("\n"):
                pos += 1
            continue
        tok = bytearray()
        while pos < len(data) and not data[pos : pos + 1].isspace():
            tok.extend(data[pos : pos + 1])
            pos += 1
        if not tok:
            raise FileFormatError(f"truncated image header at offset {pos}", offset=pos)
        if not tok.isdigit():
            raise FileFormatError(
                f"bad image header token {bytes(tok)!r} at offset {pos - len(tok)}",
                offset=pos - len(tok),
            )
        tokens.append(int(tok))
    return tokens, pos + 1  # single whitespace byte ends the header


def load_image(path) -> np.ndarray:
    """Binary PGM (P5) or PPM (P6) as floats in [0, 1].

    Gray images come back (H, W), color (H, W, 3), scaled by 1/maxval.
    Two-byte samples (maxval > 255) are big-endian per the netpbm spec.
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise FileFormatError(
            f"{path}: unsupported image magic {magic!r}; convert to binary "
            "PGM (P5) or PPM (P6)",
            offset=0,
        )
    (w, h, maxval), pos = _netpbm_tokens(data, 2, 3)
    if maxval < 1 or maxval > 65535:
        raise FileFormatError(f"{path}: invalid maxval {maxval}")
    dtype = ">u2" if maxval > 255 else "u1"
    count = h * w * channels
    need = count * np.dtype(dtype).itemsize
    if pos + need > len(data):
        raise FileFormatError(
            f"{path}: truncated pixel data: need {need} bytes at offset {pos}, "
            f"file has {len(data)}",
            offset=pos,
        )
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    img = raw.astype(np.float64) / maxval
    if channels == 1:
        return img.reshape(h, w)
    return img.reshape(h, w, 3)


def write_image(path, img: np.ndarray):
    """Write floats in [0, 1] as 8-bit P5 (gray) or P6 (color)."""
    arr = np.clip(np.rint(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)
    if arr.ndim == 2:
        magic, h, w = b"P5", *arr.shape
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic, h, w = b"P6", arr.shape[0], arr.shape[1]
    else:
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got {arr.shape}")
    header = magic + f"\n{w} {h}\n255\n".encode()
    Path(path).write_bytes(header + arr.tobytes())
