"""Information-theoretic analysis of naming systems.

Quantities follow the information bottleneck reading of color naming:
complexity is I(C;W) between chips and words, accuracy is I(W;U) through
the Gaussian meaning channel, the frontier is traced by reverse annealing
of the self-consistent encoder equations, inefficiency is the fitted
per-tradeoff objective gap to that frontier, and gNID measures dissimilarity
between two systems sharing a stimulus prior.

All reported quantities are in bits.  Internally the annealing exponent uses
natural-log KL divergences; that only rescales the tradeoff parameter by a
constant and keeps beta = 1 as the degenerate endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .errors import ValidationError
from .grid import NUM_CHIPS, ChipGrid, MeaningModel
from .util import fmt_float, open_text

LN2 = float(np.log(2.0))
_TINY = 1e-300


@dataclass
class NamingSystem:
    """Row-per-word conditional encoder q(w|c); columns are chips.

    Every column is a distribution over the K words (sums to 1).
    """

    encoder: np.ndarray  # (K, num_chips)
    num_words: int = field(init=False)

    def __post_init__(self):
        enc = np.asarray(self.encoder, dtype=np.float64)
        if enc.ndim != 2:
            raise ValidationError("encoder must be a 2-D matrix")
        if enc.shape[0] < 1:
            raise ValidationError("encoder needs at least one word")
        if np.any(enc < 0) or not np.all(np.isfinite(enc)):
            raise ValidationError("encoder entries must be finite and >= 0")
        col_sums = enc.sum(axis=0)
        if np.any(np.abs(col_sums - 1.0) > 1e-9):
            worst = float(np.abs(col_sums - 1.0).max())
            raise ValidationError(f"encoder columns must sum to 1 (off by {worst:.3g})")
        self.encoder = enc
        self.num_words = enc.shape[0]

    @classmethod
    def deterministic(cls, word_of_chip: Sequence[int], num_words: int) -> "NamingSystem":
        idx = np.asarray(word_of_chip, dtype=int)
        enc = np.zeros((num_words, idx.size))
        enc[idx, np.arange(idx.size)] = 1.0
        return cls(enc)

    def to_tsv(self, dest: str | IO[str], grid_id: str = "") -> None:
        """One header line `K=<int> grid=<id>`, then K rows x chips columns."""
        stream, owned = open_text(dest, "w")
        try:
            stream.write(f"K={self.num_words} grid={grid_id}\n")
            for row in self.encoder:
                stream.write("\t".join(fmt_float(v) for v in row) + "\n")
        finally:
            if owned:
                stream.close()

    @classmethod
    def from_tsv(cls, src: str | IO[str]) -> tuple["NamingSystem", str]:
        stream, owned = open_text(src)
        try:
            header = stream.readline().strip()
            fields = dict(part.split("=", 1) for part in header.split())
            k = int(fields["K"])
            grid_id = fields.get("grid", "")
            rows = [
                [float(v) for v in line.split("\t")]
                for line in stream.read().splitlines()
                if line.strip()
            ]
        finally:
            if owned:
                stream.close()
        if len(rows) != k:
            raise ValidationError(f"header says K={k} but found {len(rows)} rows")
        return cls(np.array(rows)), grid_id


@dataclass
class IBPoint:
    """A position in the (complexity, accuracy) plane, in bits."""

    complexity: float
    accuracy: float
    epsilon: float | None = None
    fitted_beta: float | None = None


@dataclass
class IBCurve:
    """Frontier traced by annealing: one point per converged beta.

    `encoders` is populated only when the frontier was computed with
    `keep_encoders`; it maps beta -> optimal NamingSystem at that beta.
    Non-converged betas are listed in `flagged` and excluded from `points`.
    """

    betas: np.ndarray  # descending, aligned with points
    points: list[IBPoint]
    encoders: dict[float, NamingSystem] = field(default_factory=dict)
    flagged: list[float] = field(default_factory=list)

    def complexities(self) -> np.ndarray:
        return np.array([p.complexity for p in self.points])

    def accuracies(self) -> np.ndarray:
        return np.array([p.accuracy for p in self.points])

    def interp_accuracy(self, complexity: float | np.ndarray) -> np.ndarray:
        """Piecewise-linear frontier through (0,0); conservative for a concave curve."""
        cx = self.complexities()
        ax = self.accuracies()
        order = np.argsort(cx, kind="stable")
        cx = np.concatenate(([0.0], cx[order]))
        ax = np.concatenate(([0.0], ax[order]))
        return np.interp(complexity, cx, ax)

    def to_csv(self, dest: str | IO[str]) -> None:
        stream, owned = open_text(dest, "w")
        try:
            stream.write("beta,complexity,accuracy\n")
            for beta, pt in zip(self.betas, self.points):
                stream.write(
                    f"{fmt_float(beta)},{fmt_float(pt.complexity)},{fmt_float(pt.accuracy)}\n"
                )
        finally:
            if owned:
                stream.close()

    @classmethod
    def from_csv(cls, src: str | IO[str]) -> "IBCurve":
        stream, owned = open_text(src)
        try:
            lines = stream.read().splitlines()
        finally:
            if owned:
                stream.close()
        betas, points = [], []
        for line in lines[1:]:
            if not line.strip():
                continue
            b, c, a = (float(v) for v in line.split(","))
            betas.append(b)
            points.append(IBPoint(complexity=c, accuracy=a))
        return cls(betas=np.array(betas), points=points)


def _xlogx(p: np.ndarray) -> np.ndarray:
    """x*ln(x) with the 0*log(0) = 0 convention."""
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log(p[mask])
    return out


def _mi_bits(joint: np.ndarray) -> float:
    """I(X;Y) in bits from a joint matrix; assumes a valid distribution."""
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nats = _xlogx(joint).sum() - _xlogx(px).sum() - _xlogx(py).sum()
    return max(nats / LN2, 0.0)


def mutual_information(joint: np.ndarray) -> float:
    """I(X;Y) in bits of a validated M x N joint distribution."""
    joint = np.asarray(joint, dtype=np.float64)
    if joint.ndim != 2:
        raise ValidationError("joint must be a 2-D matrix")
    if np.any(joint < 0) or not np.all(np.isfinite(joint)):
        raise ValidationError("joint entries must be finite and >= 0")
    if abs(joint.sum() - 1.0) > 1e-9:
        raise ValidationError(f"joint sums to {joint.sum()!r}, not 1")
    return _mi_bits(joint)


def _check_dims(sys: NamingSystem, grid: ChipGrid) -> None:
    if sys.encoder.shape[1] != len(grid.chips):
        raise ValidationError(
            f"encoder covers {sys.encoder.shape[1]} chips, grid has {len(grid.chips)}"
        )


def complexity(sys: NamingSystem, grid: ChipGrid) -> float:
    """I(C;W) in bits under the grid prior."""
    _check_dims(sys, grid)
    joint = sys.encoder * grid.prior[None, :]
    return _mi_bits(joint)


def accuracy(sys: NamingSystem, grid: ChipGrid, mm: MeaningModel) -> float:
    """I(W;U) in bits through the Bayesian decoder over the meaning model."""
    _check_dims(sys, grid)
    joint_wc = sys.encoder * grid.prior[None, :]
    joint_wu = joint_wc @ mm.likelihood  # p(w,u) = sum_c p(c,w) m_c(u)
    return _mi_bits(joint_wu)


def analyze(sys: NamingSystem, grid: ChipGrid, mm: MeaningModel) -> IBPoint:
    return IBPoint(complexity=complexity(sys, grid), accuracy=accuracy(sys, grid, mm))


def default_beta_schedule(
    steps: int = 1500,
    beta_max: float = 2.0**13,
    beta_min: float = 1.0,
    anchor_gap: float = 1e-4,
) -> np.ndarray:
    """Descending schedule from beta_max to beta_min, geometric in (beta - 1).

    Anchoring the descent at the degenerate endpoint concentrates steps in
    the narrow band just above beta = 1 where the whole low-complexity arm
    of the frontier lives; a plain geometric descent leaves that arm too
    sparsely sampled for interpolation to stay within tolerance.
    """
    if steps < 2:
        return np.array([beta_max], dtype=np.float64)
    shifted = np.geomspace(beta_max - beta_min, anchor_gap, steps - 1)
    return np.concatenate([shifted + beta_min, [beta_min]])


def ib_frontier(
    grid: ChipGrid,
    mm: MeaningModel,
    beta_schedule: Sequence[float] | None = None,
    max_words: int = NUM_CHIPS,
    tol: float = 1e-6,
    max_sweeps: int = 5000,
    keep_encoders: int = 0,
    init_restarts: int = 8,
) -> IBCurve:
    """Trace the optimal (complexity, accuracy) frontier by reverse annealing.

    Each beta is solved by self-consistent sweeps
        q(w|c) propto q(w) * exp(-beta * KL[m_c || mhat_w])
    warm-started from the previous (higher) beta, until the objective
    I(C;W) - beta*I(W;U) moves less than `tol` bits between sweeps.  Words
    whose marginal collapses are pruned; they never revive under annealing.

    With `max_words` below the stimulus count, the first beta is solved from
    `init_restarts` random hard assignments and the best objective kept, to
    escape the symmetric fixed point of a uniform start.

    `keep_encoders=n` stores every n-th beta's encoder (plus the last).
    Non-converged betas are flagged and excluded from the curve.
    """
    betas = (
        np.asarray(beta_schedule, dtype=np.float64)
        if beta_schedule is not None
        else default_beta_schedule()
    )
    if betas.ndim != 1 or len(betas) == 0:
        raise ValidationError("beta schedule must be a non-empty 1-D sequence")
    if np.any(np.diff(betas) > 0):
        raise ValidationError("beta schedule must be descending")
    if betas[-1] < 1.0:
        raise ValidationError("beta values must be >= 1")
    if not 1 <= max_words <= NUM_CHIPS:
        raise ValidationError("max_words must be in 1..330")

    p = grid.prior
    like = mm.likelihood
    n = like.shape[0]
    ln_like = np.log(np.maximum(like, _TINY))
    negent = (like * np.where(like > 0, ln_like, 0.0)).sum(axis=1)

    def solve(enc: np.ndarray, beta: float):
        """Self-consistent sweeps at one beta; returns (enc, cx, ax, F, ok)."""
        f_prev = np.inf
        cx = ax = f = 0.0
        converged = False
        for _ in range(max_sweeps):
            q_w = enc @ p
            alive = q_w > 1e-16
            if not np.all(alive):
                enc = enc[alive]
                enc /= enc.sum(axis=0, keepdims=True)
                q_w = enc @ p
            joint_wc = enc * p[None, :]
            cx = _mi_bits(joint_wc)
            p_c_w = joint_wc / q_w[:, None]
            mhat = p_c_w @ like  # (K, U)
            joint_wu = q_w[:, None] * mhat
            ax = _mi_bits(joint_wu)
            f = cx - beta * ax
            if abs(f - f_prev) < tol:
                converged = True
                break
            f_prev = f
            # KL[m_c || mhat_w] in nats, as a (chips, words) table
            ln_mhat = np.log(np.maximum(mhat, _TINY))
            kl = negent[:, None] - like @ ln_mhat.T
            logits = np.log(q_w)[None, :] - beta * kl
            logits -= logits.max(axis=1, keepdims=True)
            enc = np.exp(logits)
            enc /= enc.sum(axis=1, keepdims=True)
            enc = enc.T.copy()  # back to (words, chips)
        return enc, cx, ax, f, converged

    if max_words >= n:
        enc, cx, ax, _, conv = solve(np.eye(n), float(betas[0]))
    else:
        rng = np.random.default_rng(12345)  # fixed: the frontier is deterministic
        best = None
        for _ in range(max(1, init_restarts)):
            assign = rng.integers(max_words, size=n)
            init = np.full((max_words, n), 0.02 / max_words)
            init[assign, np.arange(n)] += 0.98
            init /= init.sum(axis=0, keepdims=True)
            candidate = solve(init, float(betas[0]))
            if best is None or candidate[3] < best[3]:
                best = candidate
        enc, cx, ax, _, conv = best

    kept_betas: list[float] = []
    points: list[IBPoint] = []
    encoders: dict[float, NamingSystem] = {}
    flagged: list[float] = []

    for bi, beta in enumerate(betas):
        if bi > 0:
            enc, cx, ax, _, conv = solve(enc, float(beta))
        if not conv:
            flagged.append(float(beta))
            continue
        kept_betas.append(float(beta))
        points.append(IBPoint(complexity=cx, accuracy=ax))
        if keep_encoders and (bi % keep_encoders == 0 or bi == len(betas) - 1):
            encoders[float(beta)] = NamingSystem(enc / enc.sum(axis=0, keepdims=True))

    return IBCurve(
        betas=np.array(kept_betas), points=points, encoders=encoders, flagged=flagged
    )


def fit_tradeoff(
    sys: NamingSystem, curve: IBCurve, grid: ChipGrid, mm: MeaningModel
) -> tuple[float, float]:
    """(epsilon, fitted beta): minimal per-beta normalized objective gap.

    epsilon = min over curve betas of (F_beta[sys] - F_beta[optimum]) / beta,
    clamped at 0 against numerical noise from the computed frontier.
    """
    if not curve.points:
        raise ValidationError("curve is empty")
    pt = analyze(sys, grid, mm)
    betas = curve.betas
    gaps = (
        (pt.complexity - betas * pt.accuracy)
        - (curve.complexities() - betas * curve.accuracies())
    ) / betas
    i = int(np.argmin(gaps))
    return max(float(gaps[i]), 0.0), float(betas[i])


def inefficiency_epsilon(
    sys: NamingSystem,
    curve: IBCurve,
    grid: ChipGrid,
    mm: MeaningModel,
    mode: str = "objective",
) -> float:
    """Deviation from the frontier, in bits.

    `objective` is the fitted-tradeoff gap of `fit_tradeoff`; `vertical` is
    the accuracy shortfall against the interpolated frontier at the system's
    complexity, exposed for sensitivity checks.
    """
    if mode == "objective":
        eps, _ = fit_tradeoff(sys, curve, grid, mm)
        return eps
    if mode == "vertical":
        pt = analyze(sys, grid, mm)
        return max(float(curve.interp_accuracy(pt.complexity) - pt.accuracy), 0.0)
    raise ValidationError(f"unknown epsilon mode {mode!r}")


def _is_constant_encoder(sys: NamingSystem) -> bool:
    return bool(np.allclose(sys.encoder, sys.encoder[:, :1], atol=1e-12))


def gnid(a: NamingSystem, b: NamingSystem, grid: ChipGrid) -> float:
    """Generalized NID between two systems sharing the grid prior.

    Uses the chip-marginalized joint p(w_a, w_b) and each system's
    self-joint against an independent replay of itself.  Two degenerate
    (constant) systems are defined to be at distance 0.
    """
    _check_dims(a, grid)
    _check_dims(b, grid)
    weighted_a = a.encoder * grid.prior[None, :]
    joint_ab = weighted_a @ b.encoder.T
    self_a = weighted_a @ a.encoder.T
    self_b = (b.encoder * grid.prior[None, :]) @ b.encoder.T
    denom = max(_mi_bits(self_a), _mi_bits(self_b))
    if denom <= 1e-12:
        if _is_constant_encoder(a) and _is_constant_encoder(b):
            return 0.0
        raise ValidationError("gNID undefined: both systems carry no self-information")
    return 1.0 - _mi_bits(joint_ab) / denom


def min_gnid_to_set(
    sys: NamingSystem, refs: Sequence[NamingSystem], grid: ChipGrid
) -> tuple[float, int]:
    """Smallest gNID from `sys` to any reference; ties break to the lowest index."""
    if not refs:
        raise ValidationError("reference set is empty")
    best, best_i = np.inf, -1
    for i, ref in enumerate(refs):
        d = gnid(sys, ref, grid)
        if d < best - 1e-15:
            best, best_i = d, i
    return float(best), best_i


@dataclass
class ModeMap:
    """Per-chip modal word plus rendering band (2 strong, 1 faded, 0 blank)."""

    words: np.ndarray  # (num_chips,) int
    band: np.ndarray  # (num_chips,) int in {0, 1, 2}


def mode_map(sys: NamingSystem) -> ModeMap:
    """Argmax word per chip (ties -> lowest word index) with level-set bands.

    Bands follow the display convention: max probability in [0.75, 1.0]
    renders at full strength, [0.3, 0.75) faded, below 0.3 blank.
    """
    words = sys.encoder.argmax(axis=0)
    peak = sys.encoder.max(axis=0)
    band = np.where(peak >= 0.75, 2, np.where(peak >= 0.3, 1, 0))
    return ModeMap(words=words, band=band)
