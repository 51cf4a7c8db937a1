"""On-disk record cache: a plain-text header followed by fixed-width binary rows."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curves import CurveSpec, Method, PrimeRecord

MAGIC = "CMGROUPS-RECORDS"
FORMAT_VERSION = 1
ROW_DTYPE = np.dtype(
    [("p", "<u8"), ("a_p", "<i8"), ("d_p", "<u8"), ("e_p", "<u8"), ("method", "u1"), ("crosschecked", "u1")]
)
METHOD_CODES = {Method.ENUMERATION: 0, Method.BSGS: 1, Method.CM_FAST: 2}
CODE_METHODS = {v: k for k, v in METHOD_CODES.items()}


class CacheMismatch(ValueError):
    pass


@dataclass
class RecordCache:
    curve: CurveSpec
    x_max: int
    rows: np.ndarray  # ROW_DTYPE, sorted by p
    computed: int = field(default=0, compare=False)  # rows added by the last compute, not persisted

    def __len__(self):
        return len(self.rows)

    def records(self) -> list[PrimeRecord]:
        return [
            PrimeRecord(int(r["p"]), int(r["a_p"]), int(r["d_p"]), int(r["e_p"]), CODE_METHODS[int(r["method"])], bool(r["crosschecked"]))
            for r in self.rows
        ]

    def extend(self, records: list[PrimeRecord], x_max: int) -> None:
        new = rows_from_records(records)
        if len(self.rows) and len(new) and new["p"][0] <= self.rows["p"][-1]:
            raise ValueError("new rows must start after the cached range")
        self.rows = np.concatenate([self.rows, new])
        self.x_max = max(self.x_max, x_max)

    def header(self) -> str:
        c = self.curve
        p_min = int(self.rows["p"][0]) if len(self.rows) else 0
        p_max = int(self.rows["p"][-1]) if len(self.rows) else 0
        lines = [
            MAGIC,
            f"format: {FORMAT_VERSION}",
            f"curve: {c.label}",
            f"hash: {c.fingerprint()}",
            f"a4: {c.a4}",
            f"a6: {c.a6}",
            f"conductor: {c.conductor}",
            f"d_K: {c.d_K}",
            f"x_max: {self.x_max}",
            f"p_min: {p_min}",
            f"p_max: {p_max}",
            f"rows: {len(self.rows)}",
            "row: p u64, a_p i64, d_p u64, e_p u64, method u8 (0 enumeration, 1 bsgs, 2 cm_fast), crosschecked u8; little-endian",
        ]
        return "\n".join(lines) + "\n\n"

    def write(self, path: str | os.PathLike) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(self.header().encode("ascii"))
            fh.write(np.ascontiguousarray(self.rows, dtype=ROW_DTYPE).tobytes())
        os.replace(tmp, path)


def rows_from_records(records: list[PrimeRecord]) -> np.ndarray:
    out = np.zeros(len(records), dtype=ROW_DTYPE)
    for i, r in enumerate(records):
        out[i] = (r.p, r.a_p, r.d_p, r.e_p, METHOD_CODES[r.method], int(r.crosschecked))
    return out


def read_cache(path: str | os.PathLike, curve: CurveSpec) -> RecordCache:
    """Load a cache, refusing it unless the header matches ``curve``."""
    blob = Path(path).read_bytes()
    end = blob.find(b"\n\n")
    if end < 0 or not blob.startswith(MAGIC.encode()):
        raise CacheMismatch(f"{path} is not a record cache")
    fields = dict(line.split(": ", 1) for line in blob[:end].decode("ascii").splitlines()[1:])
    if int(fields["format"]) != FORMAT_VERSION:
        raise CacheMismatch(f"{path}: unsupported format {fields['format']}")
    if fields["hash"] != curve.fingerprint():
        raise CacheMismatch(
            f"{path}: header hash {fields['hash']} does not match curve {curve.label} ({curve.fingerprint()}); "
            "the cache belongs to different coefficients or was edited"
        )
    for key, val in (("a4", curve.a4), ("a6", curve.a6), ("conductor", curve.conductor), ("d_K", curve.d_K)):
        if int(fields[key]) != val:
            raise CacheMismatch(f"{path}: header {key}={fields[key]} but curve has {val}")
    body = blob[end + 2 :]
    if len(body) % ROW_DTYPE.itemsize:
        raise CacheMismatch(f"{path}: truncated row data ({len(body)} bytes)")
    rows = np.frombuffer(body, dtype=ROW_DTYPE).copy()
    if len(rows) != int(fields["rows"]):
        raise CacheMismatch(f"{path}: header says {fields['rows']} rows, found {len(rows)}")
    if len(rows) > 1 and not np.all(np.diff(rows["p"].astype(np.int64)) > 0):
        raise CacheMismatch(f"{path}: rows are not strictly increasing in p")
    return RecordCache(curve, int(fields["x_max"]), rows)


def cache_path(cache_dir: str | os.PathLike, curve: CurveSpec) -> Path:
    return Path(cache_dir) / f"{curve.label}-{curve.fingerprint()}.rec"


def empty_cache(curve: CurveSpec) -> RecordCache:
    return RecordCache(curve, 0, np.zeros(0, dtype=ROW_DTYPE))
