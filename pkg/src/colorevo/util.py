"""Small shared helpers: seeding, float formatting, stream handling."""

from __future__ import annotations

import io
import os
from typing import IO, Iterable

import numpy as np


def derived_rng(*key: int) -> np.random.Generator:
    """Deterministic generator for a (seed, subsystem, ...) key tuple.

    Streams derived from distinct keys are statistically independent, so
    parallel and serial execution orders produce identical results.
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) & 0xFFFFFFFF for k in key]))


def fmt_float(x: float) -> str:
    """Shortest exact decimal form; round-trips bit-identically via float()."""
    return repr(float(x))


def open_text(source: str | os.PathLike | IO[str], mode: str = "r") -> tuple[IO[str], bool]:
    """Accept a path or an already-open text stream; returns (stream, owned)."""
    if isinstance(source, (str, os.PathLike)):
        return open(source, mode, encoding="utf-8"), True
    return source, False


def read_lines(source: str | os.PathLike | IO[str]) -> list[str]:
    stream, owned = open_text(source)
    try:
        return stream.read().splitlines()
    finally:
        if owned:
            stream.close()


def write_csv(path: str | os.PathLike, header: str, rows: Iterable[str]) -> None:
    """Write a CSV with '\n' line endings so reruns are byte-comparable."""
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(row + "\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
