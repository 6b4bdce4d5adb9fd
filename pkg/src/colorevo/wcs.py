"""Survey-data ingestion: naming systems from speaker response files.

Term files follow the published survey layout, one response per line:
`lang<TAB>speaker<TAB>chip<TAB>term` with 1-based chip numbers.  A language's
encoder is the per-chip relative frequency of each term across speakers.

When the real survey data is absent, `fixture_languages` provides a
deterministic synthetic reference set with matching statistics (complexity
inside the attested range, imperfect consensus, term counts 3..10) so the
whole pipeline stays testable offline.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import FormatError, ValidationError
from .grid import NUM_CHIPS, ChipGrid
from .ib import NamingSystem, complexity
from .randmodel import kernel_system
from .util import derived_rng, read_lines

_FIXTURE_STREAM = 0xF1C5
FIXTURE_COUNT = 110
# Term-count histogram loosely matching field data: most languages name
# color with 4-8 major terms.
FIXTURE_K_WEIGHTS = {3: 8, 4: 14, 5: 22, 6: 24, 7: 16, 8: 12, 9: 8, 10: 6}
FIXTURE_ETA_RANGE = (0.001, 0.005)
FIXTURE_SPEAKERS = 10
FIXTURE_JITTER_D2 = 150.0
FIXTURE_COMPLEXITY_RANGE = (0.84, 2.65)


@dataclass
class WcsLanguage:
    """One language's naming system plus bookkeeping from the source file."""

    id: int
    name: str
    encoder: NamingSystem
    num_terms: int
    speaker_count: int
    flagged: bool = False


def parse_wcs(
    term_file: str | IO[str],
    dict_file: str | IO[str] | None,
    grid: ChipGrid,
    strict_coverage: bool = False,
) -> list[WcsLanguage]:
    """Build per-language encoders from speaker responses.

    q(w|c) is the fraction of responses naming chip c with term w.  Chips
    nobody named inherit the language's marginal term distribution unless
    `strict_coverage` is set, in which case they are an error.  Languages
    with fewer than two distinct terms are kept but flagged.
    """
    term_names: dict[tuple[int, str], str] = {}
    if dict_file is not None:
        for lineno, line in enumerate(read_lines(dict_file), start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if lineno == 1 and not parts[0].strip().lstrip("-").isdigit():
                continue
            if len(parts) < 3:
                raise FormatError(f"dict line {lineno}: expected lang<TAB>code<TAB>name")
            term_names[(int(parts[0]), parts[1].strip())] = parts[2].strip()

    counts: dict[int, dict[str, np.ndarray]] = {}
    speakers: dict[int, set[str]] = {}
    for lineno, line in enumerate(read_lines(term_file), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if lineno == 1 and not parts[0].lstrip("-").isdigit():
            continue
        if len(parts) != 4:
            raise FormatError(f"term line {lineno}: expected lang speaker chip term")
        lang, speaker, chip_s, term = parts
        try:
            lang_id = int(lang)
            chip = int(chip_s)
        except ValueError as exc:
            raise FormatError(f"term line {lineno}: {exc}") from exc
        if not 1 <= chip <= NUM_CHIPS:
            raise FormatError(f"term line {lineno}: chip {chip} outside 1..{NUM_CHIPS}")
        lang_counts = counts.setdefault(lang_id, {})
        if term not in lang_counts:
            lang_counts[term] = np.zeros(NUM_CHIPS)
        lang_counts[term][chip - 1] += 1.0
        speakers.setdefault(lang_id, set()).add(speaker)

    languages = []
    for lang_id in sorted(counts):
        lang_counts = counts[lang_id]
        terms = sorted(lang_counts)
        matrix = np.stack([lang_counts[t] for t in terms])  # (K, chips)
        totals = matrix.sum(axis=0)
        covered = totals > 0
        if strict_coverage and not covered.all():
            missing = int((~covered).sum())
            raise ValidationError(f"language {lang_id}: {missing} chips have no responses")
        marginal = matrix.sum(axis=1)
        marginal = marginal / marginal.sum()
        enc = np.empty_like(matrix)
        enc[:, covered] = matrix[:, covered] / totals[covered]
        enc[:, ~covered] = marginal[:, None]
        languages.append(
            WcsLanguage(
                id=lang_id,
                name=f"lang-{lang_id:03d}",
                encoder=NamingSystem(enc),
                num_terms=len(terms),
                speaker_count=len(speakers[lang_id]),
                flagged=len(terms) < 2,
            )
        )
    return languages


def _spread_prototypes(grid: ChipGrid, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy farthest-point prototype placement with a jittered start.

    Spread-out prototypes mimic how attested systems anchor categories on
    mutually distinct regions of color space, unlike uniform random draws.
    """
    first = int(rng.integers(NUM_CHIPS))
    chosen = [first]
    for _ in range(k - 1):
        d_min = grid.dist_sq[:, chosen].min(axis=1)
        # sample among the farthest candidates instead of taking the argmax,
        # so different seeds give distinct but still well-spread layouts
        order = np.argsort(d_min)[::-1]
        pick = order[int(rng.integers(4))]
        chosen.append(int(pick))
    return np.array(chosen)


def _fixture_k_sequence(count: int) -> list[int]:
    ks: list[int] = []
    total = sum(FIXTURE_K_WEIGHTS.values())
    for k, w in sorted(FIXTURE_K_WEIGHTS.items()):
        ks.extend([k] * round(w * count / total))
    while len(ks) < count:
        ks.append(6)
    return ks[:count]


def _consensus_encoder(
    grid: ChipGrid, protos: np.ndarray, eta: float, rng: np.random.Generator
) -> np.ndarray:
    """Response frequencies from simulated speakers of one kernel language.

    Each speaker carries the shared prototypes displaced to a random nearby
    chip and names every chip once by sampling their own kernel system.
    Averaging the responses blurs category boundaries the way field
    consensus data does.
    """
    k = len(protos)
    counts = np.zeros((k, len(grid.chips)))
    chip_ids = np.arange(len(grid.chips))
    for _ in range(FIXTURE_SPEAKERS):
        jittered = []
        for p in protos:
            near = np.flatnonzero(grid.dist_sq[p] <= FIXTURE_JITTER_D2)
            jittered.append(int(near[rng.integers(len(near))]))
        q = kernel_system(grid, np.array(jittered), eta).encoder
        draws = rng.random(len(grid.chips))
        words = (q.cumsum(axis=0) < draws[None, :]).sum(axis=0)
        counts[words, chip_ids] += 1.0
    return counts / counts.sum(axis=0, keepdims=True)


def fixture_languages(grid: ChipGrid, count: int = FIXTURE_COUNT) -> list[WcsLanguage]:
    """Deterministic synthetic reference languages.

    Each is the speaker-consensus of a Gaussian-kernel system over
    well-spread prototypes, resampled until its complexity lands in the
    attested range.  Same call, same languages, always.
    """
    lo, hi = FIXTURE_COMPLEXITY_RANGE
    ks = _fixture_k_sequence(count)
    languages = []
    for i, k in enumerate(ks):
        sys = None
        for attempt in range(64):
            rng = derived_rng(_FIXTURE_STREAM, i, attempt)
            protos = _spread_prototypes(grid, k, rng)
            eta = float(rng.uniform(*FIXTURE_ETA_RANGE))
            sys = NamingSystem(_consensus_encoder(grid, protos, eta, rng))
            if lo <= complexity(sys, grid) <= hi:
                break
        else:
            raise ValidationError(f"fixture {i}: no in-range draw after 64 attempts")
        languages.append(
            WcsLanguage(
                id=i + 1,
                name=f"fixture-{i + 1:03d}",
                encoder=sys,
                num_terms=k,
                speaker_count=FIXTURE_SPEAKERS,
            )
        )
    return languages


def reference_systems(languages: Sequence[WcsLanguage]) -> list[NamingSystem]:
    return [lang.encoder for lang in languages]


def file_checksum(path: str) -> str:
    """SHA-256 of a file, for verifying a downloaded survey archive."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def verify_checksums(manifest: str | IO[str], base_dir: str = ".") -> dict[str, bool]:
    """Check `name<TAB>sha256` manifest lines against files under base_dir."""
    import os

    results = {}
    for line in read_lines(manifest):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, expected = line.split("\t")
        path = os.path.join(base_dir, name)
        results[name] = os.path.exists(path) and file_checksum(path) == expected.lower()
    return results
