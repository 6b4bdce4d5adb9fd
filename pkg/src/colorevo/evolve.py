"""Generational simulation: signaling game, transmission chains, experiments.

One chain alternates three phases per generation: a fresh speaker imitates
the previous generation from a 300-pair dataset (cross-entropy), a fresh
listener then learns from reward-only play against that speaker, both agents
play and update jointly, and finally the speaker labels a new sample of
chips for the next generation.  Ablations drop the joint-update phase
(`il`) or stop after a single generation without transmitting (`c`).

A chain stops once complexity and accuracy have each moved less than 0.1
bit across the ten latest generations, or at the generation cap.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import agents
from .errors import ValidationError
from .grid import ChipGrid, MeaningModel
from .ib import IBCurve, NamingSystem, analyze, fit_tradeoff, min_gnid_to_set
from .util import derived_rng, fmt_float, write_csv

VARIANTS = ("il+c", "il", "c")

_CHAIN_STREAM = 0xC4A1
_INIT_STREAM = 0xD474


@dataclass
class TransmissionDataset:
    """Chip/word pairs one generation leaves for the next."""

    chips: np.ndarray  # (size,) chip indices
    words: np.ndarray  # (size,) word indices

    def __post_init__(self):
        if len(self.chips) != len(self.words):
            raise ValidationError("chips and words must be the same length")

    def __len__(self) -> int:
        return len(self.chips)


@dataclass(frozen=True)
class GameConfig:
    """Hyperparameters of one chain; defaults follow the reference setup."""

    num_words: int
    variant: str = "il+c"
    reward_sigma_sq: float = 64.0
    steps_per_phase: int = 1000
    batch_size: int = 50
    learning_rate: float = agents.DEFAULT_LEARNING_RATE
    hidden: int = agents.HIDDEN_UNITS
    dataset_size: int = 300
    max_generations: int = 200
    convergence_window: int = 10
    convergence_tol: float = 0.1  # bits
    input_scale: float = agents.LAB_SCALE
    init_scale: float = 1.0
    listener_init_scale: float = 10.0
    transmission_argmax: bool = False
    transmission_with_replacement: bool = False
    reinforce_baseline: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.steps_per_phase < 1:
            raise ValidationError("steps_per_phase must be >= 1")
        if self.num_words < 1:
            raise ValidationError("num_words must be >= 1")


@dataclass
class GenerationStat:
    generation: int
    complexity: float
    accuracy: float
    mean_reward: float


@dataclass
class RunRecord:
    """Trajectory and outcome of one chain."""

    stats: list[GenerationStat]
    final: NamingSystem
    converged: bool
    generations: int

    def trajectory_csv(self, path: str | os.PathLike) -> None:
        rows = [
            f"{s.generation},{fmt_float(s.complexity)},{fmt_float(s.accuracy)},{fmt_float(s.mean_reward)}"
            for s in self.stats
        ]
        write_csv(path, "generation,complexity,accuracy,mean_reward", rows)


def reward(grid: ChipGrid, c: int, c_hat: int, sigma_sq: float) -> float:
    """Perceptual-similarity reward exp(-d2/(2 sigma_sq)) in (0, 1]."""
    if sigma_sq <= 0:
        raise ValidationError("sigma_sq must be positive")
    return float(np.exp(-grid.dist_sq[c, c_hat] / (2.0 * sigma_sq)))


def _reward_matrix(grid: ChipGrid, sigma_sq: float) -> np.ndarray:
    if sigma_sq <= 0:
        raise ValidationError("sigma_sq must be positive")
    return np.exp(-grid.dist_sq / (2.0 * sigma_sq))


def _sample_prior(grid: ChipGrid, size: int, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(grid.prior)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(size), side="right")


def _weighted_sample_no_replace(
    prior: np.ndarray, size: int, rng: np.random.Generator
) -> np.ndarray:
    # exponential-keys trick: smallest -log(u)/p are a weighted sample
    u = rng.random(len(prior))
    keys = -np.log(u) / np.maximum(prior, 1e-300)
    return np.sort(np.argsort(keys)[:size])


@dataclass
class RoundResult:
    chips: np.ndarray
    words: np.ndarray
    guesses: np.ndarray
    rewards: np.ndarray

    @property
    def mean_reward(self) -> float:
        return float(self.rewards.mean())


def play_signaling_round(
    speaker: agents.AgentParams,
    listener: agents.AgentParams,
    speaker_opt: agents.OptimizerState,
    listener_opt: agents.OptimizerState,
    grid: ChipGrid,
    cfg: GameConfig,
    rng: np.random.Generator,
    update: str,
    reward_matrix: np.ndarray | None = None,
) -> tuple[
    agents.AgentParams,
    agents.AgentParams,
    agents.OptimizerState,
    agents.OptimizerState,
    RoundResult,
]:
    """One batched round: name a prior-sampled chip, guess it, collect reward.

    `update` selects who learns from the episode batch: "none", "listener",
    or "both" (the joint-reward case).
    """
    if update not in ("none", "listener", "both"):
        raise ValidationError(f"unknown update mode {update!r}")
    r_mat = reward_matrix if reward_matrix is not None else _reward_matrix(grid, cfg.reward_sigma_sq)
    chips = _sample_prior(grid, cfg.batch_size, rng)
    labs = grid.lab[chips]
    word_probs = agents.speaker_forward(speaker, labs)
    words = agents.sample_categorical(rng, word_probs)
    onehot = np.zeros((cfg.batch_size, cfg.num_words))
    onehot[np.arange(cfg.batch_size), words] = 1.0
    guess_probs = agents.listener_forward(listener, onehot)
    guesses = agents.sample_categorical(rng, guess_probs)
    rewards = r_mat[chips, guesses]
    if update in ("listener", "both"):
        listener, listener_opt = agents.reinforce_update(
            listener, listener_opt, onehot, guesses, rewards, baseline=cfg.reinforce_baseline
        )
    if update == "both":
        speaker, speaker_opt = agents.reinforce_update(
            speaker, speaker_opt, labs, words, rewards, baseline=cfg.reinforce_baseline
        )
    return speaker, listener, speaker_opt, listener_opt, RoundResult(chips, words, guesses, rewards)


def init_dataset(
    grid: ChipGrid,
    num_words: int,
    rng: np.random.Generator,
    mode: str = "uniform",
    source: NamingSystem | None = None,
    size: int = 300,
    with_replacement: bool = False,
    argmax_words: bool = False,
) -> TransmissionDataset:
    """Seed dataset: prior-sampled chips paired with uniform or system words.

    `mode="uniform"` draws each word uniformly from the vocabulary;
    `mode="system"` draws (or takes the modal word, with `argmax_words`)
    from `source`'s encoder column for each sampled chip.
    """
    if not with_replacement and size > len(grid.chips):
        raise ValidationError("size cannot exceed the grid without replacement")
    if with_replacement:
        chips = _sample_prior(grid, size, rng)
    else:
        chips = _weighted_sample_no_replace(grid.prior, size, rng)
    if mode == "uniform":
        words = rng.integers(num_words, size=size)
    elif mode == "system":
        if source is None:
            raise ValidationError("mode='system' needs a source system")
        cols = source.encoder[:, chips].T  # (size, K)
        if argmax_words:
            words = cols.argmax(axis=1)
        else:
            words = agents.sample_categorical(rng, cols)
    else:
        raise ValidationError(f"unknown dataset mode {mode!r}")
    return TransmissionDataset(chips=chips, words=np.asarray(words, dtype=int))


def speaker_system(speaker: agents.AgentParams, grid: ChipGrid) -> NamingSystem:
    """The speaker's full encoder: its word distribution for all 330 chips."""
    probs = agents.speaker_forward(speaker, grid.lab)  # (chips, K)
    return NamingSystem(probs.T.copy())


def run_nil_chain(
    grid: ChipGrid,
    mm: MeaningModel,
    cfg: GameConfig,
    init: TransmissionDataset | None,
    rng_seed: int,
    on_generation: Callable[[GenerationStat], None] | None = None,
) -> RunRecord:
    """Run one chain to convergence or the generation cap.

    `init` seeds the first learning phase; it is required for iterated
    variants and optional for the single-generation `c` variant (without it
    the first speaker starts from its random initialization).
    """
    if cfg.variant in ("il+c", "il") and (init is None or len(init) == 0):
        raise ValidationError(f"variant {cfg.variant!r} needs a non-empty init dataset")
    rng = derived_rng(_CHAIN_STREAM, rng_seed)
    r_mat = _reward_matrix(grid, cfg.reward_sigma_sq)
    dataset = init
    stats: list[GenerationStat] = []
    cx_hist: list[float] = []
    ax_hist: list[float] = []
    converged = False
    system = None

    for generation in range(1, cfg.max_generations + 1):
        speaker = agents.init_agent(
            "speaker",
            cfg.num_words,
            rng,
            hidden=cfg.hidden,
            init_scale=cfg.init_scale,
            input_scale=cfg.input_scale,
        )
        listener = agents.init_agent(
            "listener",
            cfg.num_words,
            rng,
            hidden=cfg.hidden,
            num_chips=len(grid.chips),
            init_scale=cfg.listener_init_scale,
        )
        sp_opt = agents.init_optimizer(speaker, cfg.learning_rate)
        li_opt = agents.init_optimizer(listener, cfg.learning_rate)

        # learning phase: imitate the previous generation, then teach the listener
        if dataset is not None and len(dataset) > 0:
            speaker, sp_opt = agents.train_supervised(
                speaker,
                grid.lab[dataset.chips],
                dataset.words,
                sp_opt,
                cfg.steps_per_phase,
                cfg.batch_size,
                rng,
            )
        reward_sum = 0.0
        rounds = 0
        for _ in range(cfg.steps_per_phase):
            speaker, listener, sp_opt, li_opt, rr = play_signaling_round(
                speaker, listener, sp_opt, li_opt, grid, cfg, rng, "listener", r_mat
            )
            reward_sum += rr.mean_reward
            rounds += 1

        # interaction phase: joint reward, both agents update
        if cfg.variant != "il":
            for _ in range(cfg.steps_per_phase):
                speaker, listener, sp_opt, li_opt, rr = play_signaling_round(
                    speaker, listener, sp_opt, li_opt, grid, cfg, rng, "both", r_mat
                )
                reward_sum += rr.mean_reward
                rounds += 1

        system = speaker_system(speaker, grid)
        point = analyze(system, grid, mm)
        stat = GenerationStat(
            generation=generation,
            complexity=point.complexity,
            accuracy=point.accuracy,
            mean_reward=reward_sum / max(rounds, 1),
        )
        stats.append(stat)
        if on_generation is not None:
            on_generation(stat)
        cx_hist.append(point.complexity)
        ax_hist.append(point.accuracy)

        if cfg.variant == "c":
            break
        w = cfg.convergence_window
        if len(cx_hist) >= w:
            cx_spread = max(cx_hist[-w:]) - min(cx_hist[-w:])
            ax_spread = max(ax_hist[-w:]) - min(ax_hist[-w:])
            if cx_spread < cfg.convergence_tol and ax_spread < cfg.convergence_tol:
                converged = True
                break

        # transmission phase: label a fresh prior sample for the next generation
        if cfg.transmission_with_replacement:
            chips = _sample_prior(grid, cfg.dataset_size, rng)
        else:
            chips = _weighted_sample_no_replace(grid.prior, cfg.dataset_size, rng)
        word_probs = agents.speaker_forward(speaker, grid.lab[chips])
        if cfg.transmission_argmax:
            words = word_probs.argmax(axis=1)
        else:
            words = agents.sample_categorical(rng, word_probs)
        dataset = TransmissionDataset(chips=chips, words=words)

    return RunRecord(
        stats=stats, final=system, converged=converged, generations=len(stats)
    )


EXPERIMENT_HEADER = (
    "variant,K,seed,generations,converged,complexity,accuracy,epsilon,min_gnid,wcs_neighbor"
)


@dataclass
class ExperimentRow:
    variant: str
    num_words: int
    seed: int
    generations: int
    converged: bool
    complexity: float
    accuracy: float
    epsilon: float
    min_gnid: float
    wcs_neighbor: int

    def key(self) -> tuple[str, int, int]:
        return (self.variant, self.num_words, self.seed)

    def to_csv(self) -> str:
        return (
            f"{self.variant},{self.num_words},{self.seed},{self.generations},"
            f"{str(self.converged).lower()},{fmt_float(self.complexity)},"
            f"{fmt_float(self.accuracy)},{fmt_float(self.epsilon)},"
            f"{fmt_float(self.min_gnid)},{self.wcs_neighbor}"
        )

    @classmethod
    def from_csv(cls, line: str) -> "ExperimentRow":
        v, k, s, gens, conv, cx, ax, eps, mg, nb = line.split(",")
        return cls(
            variant=v,
            num_words=int(k),
            seed=int(s),
            generations=int(gens),
            converged=conv == "true",
            complexity=float(cx),
            accuracy=float(ax),
            epsilon=float(eps),
            min_gnid=float(mg),
            wcs_neighbor=int(nb),
        )


def load_experiment_rows(path: str | os.PathLike) -> list[ExperimentRow]:
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    return [ExperimentRow.from_csv(ln) for ln in lines[1:]]


def chain_seed(master_seed: int, variant: str, num_words: int, seed: int) -> int:
    """Stable per-chain stream id, independent of execution order."""
    mix = int(master_seed)
    for part in (VARIANTS.index(variant), int(num_words), int(seed)):
        mix = (mix * 1000003 + part) & 0x7FFFFFFFFFFFFFFF
    return mix


def run_experiment(
    grid: ChipGrid,
    mm: MeaningModel,
    cfg_grid: Sequence[tuple[str, int]],
    seeds_per_cell: int,
    rng_seed: int,
    out_csv: str | os.PathLike,
    curve: IBCurve | None = None,
    refs: Sequence[NamingSystem] | None = None,
    base_cfg: GameConfig | None = None,
    init_mode: str = "uniform",
    init_sources: Sequence[NamingSystem] | None = None,
    progress: Callable[[ExperimentRow], None] | None = None,
) -> list[ExperimentRow]:
    """Run a grid of chains, appending to a resumable results table.

    Rows are keyed by (variant, K, seed); existing keys in `out_csv` are
    not recomputed.  Failures are recorded as rows with zero generations
    and NaN metrics so a partial sweep still yields a complete table.
    The table is rewritten sorted by key, so a finished sweep is
    byte-stable under reruns.
    """
    if seeds_per_cell < 1:
        raise ValidationError("seeds_per_cell must be >= 1")
    rows = {r.key(): r for r in load_experiment_rows(out_csv)}
    for variant, num_words in cfg_grid:
        for seed in range(seeds_per_cell):
            key = (variant, num_words, seed)
            if key in rows:
                continue
            cfg = replace(
                base_cfg or GameConfig(num_words=num_words),
                variant=variant,
                num_words=num_words,
            )
            cseed = chain_seed(rng_seed, variant, num_words, seed)
            init_rng = derived_rng(_INIT_STREAM, cseed)
            try:
                if init_mode == "system":
                    if not init_sources:
                        raise ValidationError("init_mode='system' needs init_sources")
                    source = init_sources[seed % len(init_sources)]
                    init = init_dataset(
                        grid, num_words, init_rng, mode="system", source=source,
                        size=cfg.dataset_size,
                    )
                else:
                    init = init_dataset(
                        grid, num_words, init_rng, mode="uniform", size=cfg.dataset_size
                    )
                record = run_nil_chain(grid, mm, cfg, init, cseed)
                point = analyze(record.final, grid, mm)
                eps = float("nan")
                if curve is not None:
                    eps, _ = fit_tradeoff(record.final, curve, grid, mm)
                mg, neighbor = (float("nan"), -1)
                if refs:
                    mg, neighbor = min_gnid_to_set(record.final, refs, grid)
                row = ExperimentRow(
                    variant=variant,
                    num_words=num_words,
                    seed=seed,
                    generations=record.generations,
                    converged=record.converged,
                    complexity=point.complexity,
                    accuracy=point.accuracy,
                    epsilon=eps,
                    min_gnid=mg,
                    wcs_neighbor=neighbor,
                )
            except ValidationError:
                raise
            except Exception:
                row = ExperimentRow(
                    variant=variant,
                    num_words=num_words,
                    seed=seed,
                    generations=0,
                    converged=False,
                    complexity=float("nan"),
                    accuracy=float("nan"),
                    epsilon=float("nan"),
                    min_gnid=float("nan"),
                    wcs_neighbor=-1,
                )
            rows[key] = row
            ordered = [rows[k] for k in sorted(rows)]
            write_csv(out_csv, EXPERIMENT_HEADER, [r.to_csv() for r in ordered])
            if progress is not None:
                progress(row)
    ordered = [rows[k] for k in sorted(rows)]
    write_csv(out_csv, EXPERIMENT_HEADER, [r.to_csv() for r in ordered])
    return ordered
