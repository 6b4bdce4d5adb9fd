"""Random Gaussian-kernel naming systems and the similar/dissimilar split.

A random system places K prototype chips on the grid and names every chip
by a softmax over squared CIELAB distances to the prototypes, with kernel
precision eta drawn uniformly from [0.001, 0.005].  Batches are filtered to
a target complexity range and labeled by their minimum gNID to a reference
set of human-like systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import NUM_CHIPS, ChipGrid, MeaningModel
from .ib import IBCurve, IBPoint, NamingSystem, analyze, complexity, fit_tradeoff, min_gnid_to_set
from .util import derived_rng, fmt_float, write_csv

ETA_LOW = 0.001
ETA_HIGH = 0.005
DEFAULT_COMPLEXITY_RANGE = (0.84, 2.65)
DEFAULT_GNID_THRESHOLD = 0.29
DEFAULT_K_RANGE = range(3, 11)

_RM_STREAM = 0xA11CE


@dataclass(frozen=True)
class RMParams:
    """Kernel precision and prototype chips of one random system."""

    num_words: int
    eta: float
    prototypes: tuple[int, ...]

    def __post_init__(self):
        if self.eta <= 0:
            raise ValidationError("eta must be positive")
        if len(set(self.prototypes)) != len(self.prototypes):
            raise ValidationError("prototypes must be pairwise distinct")


@dataclass
class RMEntry:
    params: RMParams
    system: NamingSystem
    point: IBPoint
    min_gnid: float
    neighbor: int
    seed_used: int


@dataclass
class RMBatch:
    """Complexity-filtered random systems with similarity labels."""

    entries: list[RMEntry]
    threshold: float

    def labels(self) -> list[str]:
        return ["rm_d" if e.min_gnid >= self.threshold else "rm_s" for e in self.entries]

    def dissimilar_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(e.min_gnid >= self.threshold for e in self.entries) / len(self.entries)

    def to_csv(self, path) -> None:
        header = "K,seed,eta,prototypes,complexity,accuracy,epsilon,min_gnid,label"
        rows = []
        for e, label in zip(self.entries, self.labels()):
            protos = ";".join(str(p) for p in e.params.prototypes)
            eps = fmt_float(e.point.epsilon) if e.point.epsilon is not None else ""
            rows.append(
                f"{e.params.num_words},{e.seed_used},{fmt_float(e.params.eta)},{protos},"
                f"{fmt_float(e.point.complexity)},{fmt_float(e.point.accuracy)},{eps},"
                f"{fmt_float(e.min_gnid)},{label}"
            )
        write_csv(path, header, rows)


def kernel_system(grid: ChipGrid, prototypes: Sequence[int], eta: float) -> NamingSystem:
    """Encoder q(w|c) ~ exp(-eta * d2(chip, prototype_w)), normalized per chip."""
    protos = np.asarray(prototypes, dtype=int)
    logits = -eta * grid.dist_sq[protos, :]  # (K, chips)
    logits -= logits.max(axis=0, keepdims=True)
    enc = np.exp(logits)
    enc /= enc.sum(axis=0, keepdims=True)
    return NamingSystem(enc)


def sample_rm_system(
    grid: ChipGrid, num_words: int, rng_seed: int
) -> tuple[RMParams, NamingSystem]:
    """One random system: eta ~ U[0.001, 0.005], prototypes without replacement."""
    if not 1 <= num_words <= NUM_CHIPS:
        raise ValidationError(f"K={num_words} outside 1..{NUM_CHIPS}")
    rng = derived_rng(_RM_STREAM, rng_seed)
    eta = float(rng.uniform(ETA_LOW, ETA_HIGH))
    prototypes = tuple(int(i) for i in rng.choice(NUM_CHIPS, size=num_words, replace=False))
    params = RMParams(num_words=num_words, eta=eta, prototypes=prototypes)
    return params, kernel_system(grid, prototypes, eta)


def generate_rm_batch(
    grid: ChipGrid,
    curve: IBCurve,
    refs: Sequence[NamingSystem],
    mm: MeaningModel,
    per_k: int = 100,
    k_range: Sequence[int] = DEFAULT_K_RANGE,
    complexity_range: tuple[float, float] = DEFAULT_COMPLEXITY_RANGE,
    threshold: float = DEFAULT_GNID_THRESHOLD,
    rng_seed: int = 0,
    max_reject_window: int = 2000,
) -> RMBatch:
    """Rejection-sample `per_k` in-range systems per K and label them.

    Out-of-range draws are discarded whole (eta and prototypes resampled
    together).  A window with rejection rate above 99.9% aborts, which
    guards against a configuration that can never land in range.
    """
    if per_k < 1:
        raise ValidationError("per_k must be >= 1")
    lo, hi = complexity_range
    entries: list[RMEntry] = []
    for k in k_range:
        kept = 0
        attempt = 0
        window_rejects = 0
        while kept < per_k:
            if attempt >= max_reject_window and window_rejects / attempt > 0.999:
                raise NumericalError(
                    f"K={k}: rejection rate {window_rejects}/{attempt}; "
                    f"complexity range {complexity_range} looks unreachable"
                )
            seed_used = (rng_seed << 20) ^ (k << 14) ^ attempt
            params, system = sample_rm_system(grid, k, seed_used)
            attempt += 1
            cx = complexity(system, grid)
            if not lo <= cx <= hi:
                window_rejects += 1
                continue
            point = analyze(system, grid, mm)
            point.epsilon, point.fitted_beta = fit_tradeoff(system, curve, grid, mm)
            d, neighbor = min_gnid_to_set(system, refs, grid)
            entries.append(
                RMEntry(
                    params=params,
                    system=system,
                    point=point,
                    min_gnid=d,
                    neighbor=neighbor,
                    seed_used=seed_used,
                )
            )
            kept += 1
    return RMBatch(entries=entries, threshold=threshold)
