"""Stimulus space: the 330-chip palette, prior over chips, Gaussian meaning model.

The palette is a 10x41 naming grid: rows A-J, where column 0 holds the ten
achromatic chips (one per row) and rows B-I carry 40 chromatic columns each.
All geometry lives in CIELAB; downstream analysis only ever touches squared
Euclidean distances between chips.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from typing import IO

import numpy as np

from .errors import FormatError, ValidationError
from .util import read_lines

ROW_LETTERS = "ABCDEFGHIJ"
NUM_CHIPS = 330
DEFAULT_SIGMA_SQ = 64.0


@dataclass(frozen=True)
class Chip:
    """One palette cell: grid position plus CIELAB coordinates."""

    index: int
    row: str
    col: int
    lab: np.ndarray  # (3,) L*, a*, b*


@dataclass(frozen=True)
class ChipGrid:
    """Immutable 330-chip palette with a prior over chips.

    `lab` stacks the chip coordinates as a (330, 3) array and `dist_sq`
    holds all pairwise squared CIELAB distances; both are precomputed and
    marked read-only so grids can be shared across workers.
    """

    chips: tuple[Chip, ...]
    prior: np.ndarray  # (330,)
    lab: np.ndarray = field(repr=False)  # (330, 3)
    dist_sq: np.ndarray = field(repr=False)  # (330, 330)
    grid_id: str = ""

    def __post_init__(self):
        if len(self.chips) != NUM_CHIPS:
            raise FormatError(f"expected {NUM_CHIPS} chips, got {len(self.chips)}")
        if self.prior.shape != (NUM_CHIPS,):
            raise ValidationError(f"prior has shape {self.prior.shape}")
        if np.any(self.prior < 0):
            raise ValidationError("prior has negative entries")
        if abs(self.prior.sum() - 1.0) > 1e-9:
            raise ValidationError(f"prior sums to {self.prior.sum()!r}, not 1")


@dataclass(frozen=True)
class MeaningModel:
    """Gaussian meaning likelihood m_c(u) over chips, one row per chip.

    Row c is proportional to exp(-||x_u - x_c||^2 / (2 * sigma_sq)) and is
    normalized over the 330 chips, so each row peaks at u = c.
    """

    sigma_sq: float
    likelihood: np.ndarray = field(repr=False)  # (330, 330), row-stochastic


def _grid_hash(lab: np.ndarray, prior: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(lab, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(prior, dtype=np.float64).tobytes())
    return h.hexdigest()[:12]


def _make_grid(chips: list[Chip], prior: np.ndarray) -> ChipGrid:
    lab = np.stack([c.lab for c in chips]).astype(np.float64)
    diff = lab[:, None, :] - lab[None, :, :]
    dist_sq = np.einsum("ijk,ijk->ij", diff, diff)
    for arr in (lab, dist_sq, prior):
        arr.setflags(write=False)
    return ChipGrid(
        chips=tuple(chips),
        prior=prior,
        lab=lab,
        dist_sq=dist_sq,
        grid_id=_grid_hash(lab, prior),
    )


def _parse_chip_rows(lines: list[str]) -> list[Chip]:
    chips: dict[int, Chip] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if lineno == 1 and not parts[0].strip().lstrip("-").isdigit():
            continue  # optional header
        if len(parts) != 6:
            raise FormatError(f"line {lineno}: expected 6 tab-separated fields")
        try:
            index = int(parts[0])
            row = parts[1].strip()
            col = int(parts[2])
            lab = np.array([float(parts[3]), float(parts[4]), float(parts[5])])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if row not in ROW_LETTERS:
            raise FormatError(f"line {lineno}: row {row!r} not in A-J")
        if not 0 <= col <= 40:
            raise FormatError(f"line {lineno}: column {col} outside 0..40")
        if not np.all(np.isfinite(lab)):
            raise FormatError(f"line {lineno}: non-finite CIELAB coordinates")
        if not 0.0 <= lab[0] <= 100.0:
            raise FormatError(f"line {lineno}: L*={lab[0]} outside [0, 100]")
        if index in chips:
            raise FormatError(f"duplicate chip index {index}")
        lab.setflags(write=False)
        chips[index] = Chip(index=index, row=row, col=col, lab=lab)
    if sorted(chips) != list(range(NUM_CHIPS)):
        raise FormatError(
            f"chip indices must cover 0..{NUM_CHIPS - 1} exactly, got {len(chips)} rows"
        )
    ordered = [chips[i] for i in range(NUM_CHIPS)]
    achromatic = [c for c in ordered if c.col == 0]
    chromatic = [c for c in ordered if c.col > 0]
    if len(achromatic) != 10 or sorted(c.row for c in achromatic) != list(ROW_LETTERS):
        raise FormatError("column 0 must hold one achromatic chip per row A-J")
    if len(chromatic) != 320 or any(c.row in "AJ" for c in chromatic):
        raise FormatError("chromatic chips must fill rows B-I, columns 1-40")
    return ordered


def _parse_prior(lines: list[str], renormalize: bool) -> np.ndarray:
    values: dict[int, float] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if lineno == 1 and not parts[0].strip().lstrip("-").isdigit():
            continue
        if len(parts) != 2:
            raise FormatError(f"prior line {lineno}: expected index<TAB>p")
        try:
            index = int(parts[0])
            p = float(parts[1])
        except ValueError as exc:
            raise FormatError(f"prior line {lineno}: {exc}") from exc
        if index in values:
            raise FormatError(f"prior: duplicate index {index}")
        values[index] = p
    if sorted(values) != list(range(NUM_CHIPS)):
        raise FormatError("prior must provide one probability per chip index")
    prior = np.array([values[i] for i in range(NUM_CHIPS)], dtype=np.float64)
    if np.any(prior < 0):
        raise ValidationError("prior has negative entries")
    total = prior.sum()
    if abs(total - 1.0) > 1e-6 and not renormalize:
        raise ValidationError(
            f"prior sums to {total!r}; pass renormalize=True to rescale"
        )
    return prior / total


def load_chip_grid(
    coord_table: str | IO[str],
    prior_source: str | IO[str] | None = None,
    renormalize: bool = False,
) -> ChipGrid:
    """Load a grid from a chip TSV (index, row, col, L, a, b) and optional prior.

    Without a prior source the prior is uniform 1/330.  A supplied prior must
    sum to 1 within 1e-6 (it is then rescaled to machine precision); looser
    inputs are accepted only with `renormalize=True`.
    """
    chips = _parse_chip_rows(read_lines(coord_table))
    if prior_source is None:
        prior = np.full(NUM_CHIPS, 1.0 / NUM_CHIPS)
    else:
        prior = _parse_prior(read_lines(prior_source), renormalize)
    return _make_grid(chips, prior)


def default_grid(prior_source: str | IO[str] | None = None) -> ChipGrid:
    """The bundled synthetic palette (see scripts/make_palette.py)."""
    table = resources.files("colorevo.data").joinpath("chips.tsv").read_text("utf-8")
    import io

    return load_chip_grid(io.StringIO(table), prior_source)


def perceptual_distance_sq(a: Chip, b: Chip) -> float:
    """Squared Euclidean CIELAB distance between two chips."""
    d = a.lab - b.lab
    return float(d @ d)


def build_meaning_model(grid: ChipGrid, sigma_sq: float = DEFAULT_SIGMA_SQ) -> MeaningModel:
    """Gaussian meaning likelihood over chips at the given squared width."""
    if sigma_sq <= 0:
        raise ValidationError("sigma_sq must be positive")
    logits = -grid.dist_sq / (2.0 * sigma_sq)
    logits -= logits.max(axis=1, keepdims=True)
    like = np.exp(logits)
    like /= like.sum(axis=1, keepdims=True)
    like.setflags(write=False)
    return MeaningModel(sigma_sq=float(sigma_sq), likelihood=like)
