import io

import numpy as np
import pytest

from colorevo import (
    build_meaning_model,
    complexity,
    default_grid,
    load_chip_grid,
    perceptual_distance_sq,
)
from colorevo.errors import FormatError, ValidationError
from colorevo.grid import NUM_CHIPS, Chip


def chip_table_text(grid):
    lines = ["index\trow\tcol\tL\ta\tb"]
    for c in grid.chips:
        lines.append(f"{c.index}\t{c.row}\t{c.col}\t{c.lab[0]}\t{c.lab[1]}\t{c.lab[2]}")
    return "\n".join(lines)


def test_default_grid_has_330_chips(grid):
    assert len(grid.chips) == NUM_CHIPS
    achromatic = [c for c in grid.chips if c.col == 0]
    assert len(achromatic) == 10
    assert sorted(c.row for c in achromatic) == list("ABCDEFGHIJ")
    chromatic = [c for c in grid.chips if c.col > 0]
    assert len(chromatic) == 320
    assert all(c.row in "BCDEFGHI" for c in chromatic)


def test_uniform_prior_fallback(grid):
    assert np.allclose(grid.prior, 1.0 / NUM_CHIPS)
    assert abs(grid.prior.sum() - 1.0) < 1e-9


def test_grid_loading_deterministic(grid):
    text = chip_table_text(grid)
    g1 = load_chip_grid(io.StringIO(text))
    g2 = load_chip_grid(io.StringIO(text))
    assert g1.grid_id == g2.grid_id
    assert np.array_equal(g1.lab, g2.lab)


def test_missing_chip_is_format_error(grid):
    lines = chip_table_text(grid).splitlines()
    with pytest.raises(FormatError):
        load_chip_grid(io.StringIO("\n".join(lines[:-1])))


def test_duplicate_chip_is_format_error(grid):
    lines = chip_table_text(grid).splitlines()
    lines[-1] = lines[-2]
    with pytest.raises(FormatError):
        load_chip_grid(io.StringIO("\n".join(lines)))


def test_uniform_prior_file_matches_fallback(grid):
    """An explicit 1/330 prior file must give identical analysis results."""
    text = chip_table_text(grid)
    prior_text = "\n".join(f"{i}\t{1.0 / NUM_CHIPS}" for i in range(NUM_CHIPS))
    g_file = load_chip_grid(io.StringIO(text), io.StringIO(prior_text))
    g_default = load_chip_grid(io.StringIO(text))
    rng = np.random.default_rng(0)
    enc = rng.random((4, NUM_CHIPS))
    enc /= enc.sum(0, keepdims=True)
    from colorevo import NamingSystem

    sys_ = NamingSystem(enc)
    # renormalization of the parsed prior leaves only float-epsilon drift
    assert complexity(sys_, g_file) == pytest.approx(
        complexity(sys_, g_default), abs=1e-12
    )


def test_bad_prior_sum_rejected_without_flag(grid):
    text = chip_table_text(grid)
    prior_text = "\n".join(f"{i}\t{2.0 / NUM_CHIPS}" for i in range(NUM_CHIPS))
    with pytest.raises(ValidationError):
        load_chip_grid(io.StringIO(text), io.StringIO(prior_text))
    g = load_chip_grid(io.StringIO(text), io.StringIO(prior_text), renormalize=True)
    assert abs(g.prior.sum() - 1.0) < 1e-9


def test_perceptual_distance_examples():
    a = Chip(0, "A", 0, np.array([0.0, 0.0, 0.0]))
    b = Chip(1, "B", 0, np.array([3.0, 4.0, 0.0]))
    assert perceptual_distance_sq(a, a) == 0.0
    assert perceptual_distance_sq(a, b) == pytest.approx(25.0)


def test_distance_symmetry_and_oracle(grid):
    rng = np.random.default_rng(7)
    idx = rng.integers(0, NUM_CHIPS, size=(200, 2))
    for i, j in idx:
        a, b = grid.chips[i], grid.chips[j]
        direct = sum((a.lab[k] - b.lab[k]) ** 2 for k in range(3))
        assert perceptual_distance_sq(a, b) == pytest.approx(direct, rel=1e-12)
        assert perceptual_distance_sq(a, b) == pytest.approx(
            perceptual_distance_sq(b, a), rel=0
        )
        assert grid.dist_sq[i, j] == pytest.approx(direct, rel=1e-12)


def test_meaning_model_rows_are_distributions(grid, meaning):
    sums = meaning.likelihood.sum(axis=1)
    assert np.all(np.abs(sums - 1.0) < 1e-9)
    assert np.array_equal(
        meaning.likelihood.argmax(axis=1), np.arange(NUM_CHIPS)
    )


def test_meaning_model_small_width_is_near_identity(grid):
    mm = build_meaning_model(grid, sigma_sq=1e-6)
    assert np.allclose(np.diag(mm.likelihood), 1.0, atol=1e-12)


def test_meaning_model_toy_grid_matches_hand_normalization():
    """4-chip toy palette: rows equal hand-normalized Gaussian weights.

    build_meaning_model only touches grid.dist_sq, so a stub palette
    exercises the real code against a spreadsheet-style evaluation.
    """
    from types import SimpleNamespace

    labs = np.array([[0.0, 0.0, 0.0], [8.0, 0.0, 0.0], [0.0, 8.0, 0.0], [8.0, 8.0, 0.0]])
    d2 = ((labs[:, None, :] - labs[None, :, :]) ** 2).sum(-1)
    stub = SimpleNamespace(dist_sq=d2)
    mm = build_meaning_model(stub, sigma_sq=64.0)

    # hand evaluation, row by row
    expected = np.empty((4, 4))
    for c in range(4):
        weights = [np.exp(-d2[c, u] / 128.0) for u in range(4)]
        expected[c] = np.array(weights) / sum(weights)
    assert np.allclose(mm.likelihood, expected, atol=1e-15)


def test_rejects_non_positive_sigma(grid):
    with pytest.raises(ValidationError):
        build_meaning_model(grid, sigma_sq=0.0)
