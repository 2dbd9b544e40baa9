"""Built-in target densities for experiments and benchmarks.

Each target bundles an unnormalized density with a default evaluation
domain, an optional signed square-root (useful for square-root fitting),
and, when available, an exact model representation of the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .boxes import HyperRectangle
from .estimator import EvaluationOracle
from .kernels import gaussian_kernel
from .models import RankOneModel


@dataclass(frozen=True)
class TargetDensity:
    """Unnormalized probability density on a box domain.

    ``pdf`` maps an (n, d) array of points to n nonnegative values.
    ``sqrt_pdf``, when present, is a signed function whose square equals
    ``pdf``; square-root fitting consumes it directly.  ``exact_model``
    is a RankOneModel that represents the target exactly, when one exists.
    """

    name: str
    domain: HyperRectangle
    pdf: Callable[[np.ndarray], np.ndarray]
    sqrt_pdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exact_model: Optional[RankOneModel] = None
    description: str = ""

    @property
    def dim(self) -> int:
        return self.domain.dim

    def oracle(self, kind: str = "nonnegative") -> EvaluationOracle:
        """Evaluation oracle for fitting.

        kind="nonnegative" exposes the density itself; kind="linear"
        exposes the signed square root and requires ``sqrt_pdf``.
        """
        if kind == "nonnegative":
            return EvaluationOracle(self.pdf, self.domain, kind="nonnegative")
        if kind == "linear":
            if self.sqrt_pdf is None:
                raise ValueError(
                    f"target {self.name!r} has no signed square root"
                )
            return EvaluationOracle(self.sqrt_pdf, self.domain, kind="linear")
        raise ValueError(f"unknown oracle kind {kind!r}")


def _signed_mixture_2d() -> TargetDensity:
    # Signed three-component mixture in two dimensions.  The middle
    # coefficient is negative and dominates near its center, so the raw
    # mixture dips below zero there; values are clamped at zero.
    centers = np.array([[-1.0, -1.0], [1.0, 1.0], [1.0, 1.0]])
    precisions = np.array([0.7, 0.6, 0.7])
    coefficients = np.array([0.08, -0.4, 0.4])

    def mixture(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        total = np.zeros(pts.shape[0])
        for w, tau, c in zip(coefficients, precisions, centers):
            eta = np.full(2, tau)
            total += w * gaussian_kernel(eta, pts, c)
        return total

    def pdf(points: np.ndarray) -> np.ndarray:
        return np.maximum(mixture(points), 0.0)

    def sqrt_pdf(points: np.ndarray) -> np.ndarray:
        return np.sqrt(pdf(points))

    domain = HyperRectangle(np.array([-3.0, -3.0]), np.array([3.0, 3.0]))
    return TargetDensity(
        name="signed-mixture-2d",
        domain=domain,
        pdf=pdf,
        sqrt_pdf=sqrt_pdf,
        description="clamped signed mixture of three Gaussian bumps in 2D",
    )


def _squared_diff_5d() -> TargetDensity:
    """Squared difference of two Gaussian kernels in five dimensions.

    The density is (k(x, 1) - k(x, -1))^2 with precision 0.2 in every
    coordinate, restricted to the box [-1, 1)^5.  It is exactly the
    square of a two-center Gaussian linear model, so the rank-one truth
    is available in closed form.
    """
    d = 5
    eta = np.full(d, 0.2)
    plus = np.ones(d)
    minus = -np.ones(d)
    truth = RankOneModel(
        a=np.array([1.0, -1.0]),
        X=np.vstack([plus, minus]),
        eta=eta,
    )

    def sqrt_pdf(points: np.ndarray) -> np.ndarray:
        return truth.linear_evaluate(points)

    def pdf(points: np.ndarray) -> np.ndarray:
        return truth.evaluate(points)

    domain = HyperRectangle(np.full(d, -1.0), np.full(d, 1.0))
    return TargetDensity(
        name="squared-diff-5d",
        domain=domain,
        pdf=pdf,
        sqrt_pdf=sqrt_pdf,
        exact_model=truth,
        description="squared difference of two Gaussian kernels, d=5",
    )


def make_potential_density(
    name: str,
    potential: Callable[[np.ndarray], np.ndarray],
    domain: HyperRectangle,
    description: str = "",
) -> TargetDensity:
    """Density proportional to exp(-V) for a smooth potential V.

    The square root exp(-V/2) is returned as the signed square-root
    callable, so these targets work with both fitting modes.
    """

    def pdf(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.exp(-np.asarray(potential(pts), dtype=float))

    def sqrt_pdf(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.exp(-0.5 * np.asarray(potential(pts), dtype=float))

    return TargetDensity(
        name=name,
        domain=domain,
        pdf=pdf,
        sqrt_pdf=sqrt_pdf,
        description=description or f"exp(-V) potential density {name!r}",
    )


def _gaussian_well_1d() -> TargetDensity:
    def potential(points: np.ndarray) -> np.ndarray:
        return np.sum(points**2, axis=1)

    domain = HyperRectangle(np.array([-4.0]), np.array([4.0]))
    return make_potential_density(
        "gaussian-well-1d", potential, domain,
        description="standard Gaussian well exp(-x^2) on [-4, 4)",
    )


def _double_well_1d() -> TargetDensity:
    def potential(points: np.ndarray) -> np.ndarray:
        x = points[:, 0]
        return (x**2 - 1.0) ** 2

    domain = HyperRectangle(np.array([-3.0]), np.array([3.0]))
    return make_potential_density(
        "double-well-1d", potential, domain,
        description="bimodal double-well potential exp(-(x^2-1)^2)",
    )


_REGISTRY: dict[str, TargetDensity] = {}


def register_density(target: TargetDensity) -> TargetDensity:
    if target.name in _REGISTRY:
        raise ValueError(f"density {target.name!r} already registered")
    _REGISTRY[target.name] = target
    return target


def get_density(name: str) -> TargetDensity:
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown density {name!r}; known: {known}") from None


def list_densities() -> list[str]:
    return sorted(_REGISTRY)


for _builder in (
    _signed_mixture_2d,
    _squared_diff_5d,
    _gaussian_well_1d,
    _double_well_1d,
):
    register_density(_builder())
