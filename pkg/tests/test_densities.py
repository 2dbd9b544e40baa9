import numpy as np
import pytest

from psdsample.boxes import HyperRectangle
from psdsample.densities import (
    TargetDensity,
    get_density,
    list_densities,
    make_potential_density,
    register_density,
)


def test_registry_lists_builtin_targets():
    names = list_densities()
    for expected in (
        "double-well-1d",
        "gaussian-well-1d",
        "signed-mixture-2d",
        "squared-diff-5d",
    ):
        assert expected in names
    assert names == sorted(names)


def test_unknown_name_reports_known_targets():
    with pytest.raises(KeyError, match="signed-mixture-2d"):
        get_density("no-such-target")


def test_duplicate_registration_rejected():
    existing = get_density("gaussian-well-1d")
    with pytest.raises(ValueError):
        register_density(existing)


def test_signed_mixture_clamps_negative_region():
    p1 = get_density("signed-mixture-2d")
    assert p1.dim == 2
    assert np.array_equal(p1.domain.lower, [-3.0, -3.0])

    def raw(x):
        s2 = np.sum((x - np.array([-1.0, -1.0])) ** 2)
        r2 = np.sum((x - np.array([1.0, 1.0])) ** 2)
        return 0.08 * np.exp(-0.7 * s2) - 0.4 * np.exp(-0.6 * r2) + 0.4 * np.exp(-0.7 * r2)

    x = np.array([1.5, 1.0])
    assert raw(x) < 0.0
    assert p1.pdf(x[None, :])[0] == 0.0
    y = np.array([-1.0, -1.0])
    assert np.isclose(p1.pdf(y[None, :])[0], raw(y), rtol=1e-12)
    assert np.all(p1.pdf(np.random.default_rng(0).uniform(-3, 3, (500, 2))) >= 0)


def test_signed_mixture_value_at_first_center():
    p1 = get_density("signed-mixture-2d")
    # at (-1, -1): first bump is at its peak, the others are 8 away
    expected = 0.08 - 0.4 * np.exp(-0.6 * 8.0) + 0.4 * np.exp(-0.7 * 8.0)
    got = p1.pdf(np.array([[-1.0, -1.0]]))[0]
    assert np.isclose(got, expected, rtol=1e-12)
    assert np.isclose(p1.sqrt_pdf(np.array([[-1.0, -1.0]]))[0], np.sqrt(expected))


def test_signed_mixture_raw_mixture_dips_negative():
    p1 = get_density("signed-mixture-2d")
    # sqrt^2 == pdf even where the unclamped mixture would be negative
    pts = np.array([[2.2, 2.2], [0.0, 0.0], [-1.0, -1.0]])
    assert np.allclose(p1.sqrt_pdf(pts) ** 2, p1.pdf(pts))


def test_squared_diff_matches_its_exact_model():
    p2 = get_density("squared-diff-5d")
    assert p2.dim == 5
    truth = p2.exact_model
    assert truth is not None
    assert np.array_equal(truth.a, [1.0, -1.0])
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1, 1, (200, 5))
    signed = p2.sqrt_pdf(pts)
    assert np.allclose(signed**2, p2.pdf(pts), rtol=1e-12)
    assert np.allclose(p2.pdf(pts), truth.evaluate(pts), rtol=1e-12)
    # odd symmetry of the signed part under x -> -x
    assert np.allclose(p2.sqrt_pdf(-pts), -signed, rtol=1e-12)


def test_squared_diff_hand_value():
    p2 = get_density("squared-diff-5d")
    x = np.zeros((1, 5))
    # both kernels are exp(-0.2 * 5) at the origin, so they cancel
    assert p2.pdf(x)[0] == 0.0
    y = np.full((1, 5), 0.5)
    k_plus = np.exp(-0.2 * 5 * 0.25)
    k_minus = np.exp(-0.2 * 5 * 2.25)
    assert np.isclose(p2.pdf(y)[0], (k_plus - k_minus) ** 2, rtol=1e-12)


def test_potential_targets_exponentiate():
    gw = get_density("gaussian-well-1d")
    x = np.array([[0.5], [-2.0]])
    assert np.allclose(gw.pdf(x), np.exp(-x.ravel() ** 2))
    assert np.allclose(gw.sqrt_pdf(x), np.exp(-0.5 * x.ravel() ** 2))
    dw = get_density("double-well-1d")
    assert np.allclose(
        dw.pdf(x), np.exp(-((x.ravel() ** 2 - 1.0) ** 2))
    )
    # modes of the double well sit at +-1
    assert dw.pdf(np.array([[1.0]]))[0] == 1.0


def test_make_potential_density_round_trip():
    box = HyperRectangle([0.0], [2.0])
    target = make_potential_density("linear-well", lambda p: 3.0 * p[:, 0], box)
    x = np.array([[0.5]])
    assert np.isclose(target.pdf(x)[0], np.exp(-1.5))
    assert np.isclose(target.sqrt_pdf(x)[0], np.exp(-0.75))
    assert target.exact_model is None
    assert target.name == "linear-well"


def test_oracle_kinds():
    p2 = get_density("squared-diff-5d")
    nonneg = p2.oracle("nonnegative")
    assert nonneg.kind == "nonnegative"
    linear = p2.oracle("linear")
    assert linear.kind == "linear"
    with pytest.raises(ValueError):
        p2.oracle("quadratic")


def test_oracle_linear_requires_square_root():
    box = HyperRectangle([0.0], [1.0])
    bare = TargetDensity(
        name="bare", domain=box, pdf=lambda p: np.ones(p.shape[0])
    )
    with pytest.raises(ValueError):
        bare.oracle("linear")
    assert bare.oracle("nonnegative").kind == "nonnegative"
