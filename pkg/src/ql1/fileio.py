"""Problem file format (QL1P) and suite manifest I/O.

QL1P layout, all little-endian:

    magic   4 bytes  0x51 0x4C 0x31 0x50 ("QL1P")
    version u32      1
    kind    u8       0 = dense, 1 = factored
    n       u64
    dense:    n*n f64, row-major A
    factored: u64 m, m*n f64 row-major B, f64 gamma
    b       n f64
    tau     f64

Writing then reading reproduces every field bit-exactly.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ql1.problem import DenseOperator, FactoredOperator, QuadraticProblem

MAGIC = b"QL1P"
VERSION = 1
_KIND_DENSE = 0
_KIND_FACTORED = 1


class ProblemFormatError(ValueError):
    """Malformed QL1P data; ``offset`` is the byte position of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def write_problem(path, problem: QuadraticProblem) -> None:
    op = problem.op
    parts = [MAGIC, struct.pack("<I", VERSION)]
    if isinstance(op, DenseOperator):
        parts.append(struct.pack("<B", _KIND_DENSE))
        parts.append(struct.pack("<Q", op.n))
        parts.append(np.ascontiguousarray(op.a, dtype="<f8").tobytes())
    elif isinstance(op, FactoredOperator):
        parts.append(struct.pack("<B", _KIND_FACTORED))
        parts.append(struct.pack("<Q", op.n))
        parts.append(struct.pack("<Q", op.m))
        parts.append(np.ascontiguousarray(op.b_mat, dtype="<f8").tobytes())
        parts.append(struct.pack("<d", op.gamma))
    else:
        raise TypeError(f"cannot serialize operator of type {type(op).__name__}")
    parts.append(np.ascontiguousarray(problem.b, dtype="<f8").tobytes())
    parts.append(struct.pack("<d", problem.tau))
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.data):
            raise ProblemFormatError(
                f"truncated file while reading {what}: need {self.pos + count} bytes, have {len(self.data)}",
                self.pos,
            )
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def f64_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)


def read_problem(path) -> QuadraticProblem:
    data = Path(path).read_bytes()
    rd = _Reader(data)
    magic = rd.take(4, "magic")
    if magic != MAGIC:
        raise ProblemFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    version = rd.u32("version")
    if version != VERSION:
        raise ProblemFormatError(f"unsupported version {version}", 4)
    kind = rd.u8("kind")
    n = rd.u64("n")
    if kind == _KIND_DENSE:
        a = rd.f64_array(n * n, "dense matrix").reshape(n, n)
        op = DenseOperator(a)
    elif kind == _KIND_FACTORED:
        m = rd.u64("m")
        b_mat = rd.f64_array(m * n, "factor matrix").reshape(m, n)
        gamma = rd.f64("gamma")
        op = FactoredOperator(b_mat, gamma)
    else:
        raise ProblemFormatError(f"unknown operator kind {kind}", 8)
    b = rd.f64_array(n, "b vector")
    tau = rd.f64("tau")
    if rd.pos != len(data):
        raise ProblemFormatError(
            f"trailing data: file has {len(data)} bytes, format ends at {rd.pos}", rd.pos
        )
    return QuadraticProblem(op, b, tau)


@dataclass
class ManifestRow:
    problem: str
    family: str
    seed: int
    params: str
    path: str

    def param(self, key: str, default: str | None = None) -> str | None:
        for item in self.params.split(";"):
            if "=" in item:
                k, v = item.split("=", 1)
                if k == key:
                    return v
        return default


def write_manifest(path, rows: list[ManifestRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["problem", "family", "seed", "params", "path"])
        for row in rows:
            writer.writerow([row.problem, row.family, row.seed, row.params, row.path])


def read_manifest(path) -> list[ManifestRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                ManifestRow(
                    problem=rec["problem"],
                    family=rec["family"],
                    seed=int(rec["seed"]),
                    params=rec["params"],
                    path=rec["path"],
                )
            )
    return rows
