import numpy as np
import pytest
from scipy.stats import chisquare

from psdsample.baseline import GridSampler, build_grid
from psdsample.boxes import HyperRectangle
from psdsample.exceptions import EmptyMassError


def unit_interval():
    return HyperRectangle([0.0], [1.0])


def test_tiles_per_axis_is_floor_root_of_budget():
    box = HyperRectangle([0.0] * 5, [1.0] * 5)
    grid = build_grid(lambda p: np.ones(p.shape[0]), box, budget=10_000)
    assert grid.shape == (6,) * 5
    assert grid.evaluations == 6**5  # 7776 queries out of the 10000 allowed
    grid = build_grid(lambda p: np.ones(p.shape[0]), box, budget=7776)
    assert grid.shape == (6,) * 5
    grid = build_grid(lambda p: np.ones(p.shape[0]), box, budget=7775)
    assert grid.shape == (5,) * 5


def test_exact_integer_roots_survive_float_noise():
    box = HyperRectangle([0.0] * 3, [1.0] * 3)
    for s in (7, 10, 31, 99):
        grid = build_grid(lambda p: np.ones(p.shape[0]), box, budget=s**3)
        assert grid.shape == (s,) * 3


def test_tile_centers_1d_arithmetic():
    grid = build_grid(lambda p: np.ones(p.shape[0]), unit_interval(), budget=4)
    assert grid.shape == (4,)
    assert np.allclose(grid.tile_centers().ravel(), [0.125, 0.375, 0.625, 0.875])


def test_constant_density_gives_uniform_probabilities():
    box = HyperRectangle([-1.0, 0.0], [1.0, 3.0])
    grid = build_grid(lambda p: 2.7 * np.ones(p.shape[0]), box, budget=25)
    assert np.allclose(grid.probabilities, 1.0 / 25.0)
    assert np.isclose(grid.probabilities.sum(), 1.0)


def test_point_mass_tile_catches_all_draws():
    # weight only on the second of four tiles
    def fn(p):
        return np.where((p[:, 0] > 0.25) & (p[:, 0] < 0.5), 1.0, 0.0)

    grid = build_grid(fn, unit_interval(), budget=4)
    assert np.allclose(grid.probabilities, [0.0, 1.0, 0.0, 0.0])
    draws = grid.sample(200, seed=0)
    assert np.all((draws >= 0.25) & (draws < 0.5))


def test_negative_values_are_clamped():
    def fn(p):
        return np.where(p[:, 0] < 0.5, -3.0, 1.0)

    grid = build_grid(fn, unit_interval(), budget=4)
    assert np.allclose(grid.probabilities, [0.0, 0.0, 0.5, 0.5])


def test_draws_stay_in_box_and_repeat_with_seed():
    box = HyperRectangle([-2.0, 1.0], [0.0, 4.0])
    grid = build_grid(lambda p: np.exp(-np.sum(p**2, axis=1)), box, budget=100)
    a = grid.sample(500, seed=7)
    b = grid.sample(500, seed=7)
    c = grid.sample(500, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all(a >= box.lower) and np.all(a < box.upper)
    assert grid.sample(0, seed=1).shape == (0, 2)


def test_tile_frequencies_match_probabilities():
    def fn(p):
        return 1.0 + p[:, 0]

    grid = build_grid(fn, unit_interval(), budget=5)
    n = 100_000
    draws = grid.sample(n, seed=42)
    counts = np.histogram(draws.ravel(), bins=np.linspace(0, 1, 6))[0]
    stat = chisquare(counts, f_exp=n * grid.probabilities)
    assert stat.pvalue > 0.01


def test_zero_density_everywhere_raises():
    with pytest.raises(EmptyMassError):
        build_grid(lambda p: np.zeros(p.shape[0]), unit_interval(), budget=10)


def test_build_grid_validation():
    with pytest.raises(ValueError):
        build_grid(lambda p: np.ones(p.shape[0]), unit_interval(), budget=0)
    with pytest.raises(ValueError):
        build_grid(
            lambda p: np.ones(p.shape[0]), HyperRectangle.whole_space(1), budget=4
        )
    with pytest.raises(ValueError):
        build_grid(lambda p: np.ones(3), unit_interval(), budget=4)


def test_sampler_is_plain_data():
    grid = GridSampler(
        box=unit_interval(),
        shape=(2,),
        probabilities=np.array([0.25, 0.75]),
        evaluations=2,
    )
    draws = grid.sample(2000, seed=3)
    frac_hi = np.mean(draws.ravel() >= 0.5)
    assert abs(frac_hi - 0.75) < 0.05
