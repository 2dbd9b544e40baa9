"""Closed-form integrals of Gaussian PSD models over hyper-rectangles.

The product of two centered kernels collapses to a single kernel at the
pair midpoint,

    k_eta(x, x_i) k_eta(x, x_j)
        = k_{eta/2}(x_i, x_j) * k_{2 eta}(x, (x_i + x_j) / 2),

so the integral of the model over a box Q factors into m^2 terms, each a
product of one-dimensional Gaussian integrals expressed through erf.  A
finite box costs exactly 2 * d * m^2 erf evaluations; infinite endpoints
substitute erf(+-inf) = +-1 and are not evaluated or counted.  The (i, j)
and (j, i) terms are identical, so the implementation evaluates each
unique pair once; the erf counter still reports the formula's term count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import erf as _erf

from .boxes import HyperRectangle
from .exceptions import ResourceLimitError
from .models import GaussianPsdModel, RankOneModel

__all__ = [
    "IntegralAccounting",
    "integrate",
    "integrate_boxes",
    "integrate_squared",
    "quartic_gram",
]

# elements per chunk when batching erf over (boxes, pairs, coords)
_CHUNK_ELEMS = 4_000_000


@dataclass
class IntegralAccounting:
    """Counters for the work spent inside box integrals.

    ``integral_evals`` counts box integrals, ``erf_calls`` counts erf
    evaluations at finite arguments.  Both only ever grow.
    """

    integral_evals: int = 0
    erf_calls: int = 0

    def add(self, other: "IntegralAccounting") -> None:
        self.integral_evals += other.integral_evals
        self.erf_calls += other.erf_calls


def _erf_subst(t: NDArray[np.float64]):
    """erf with infinite entries substituted by their limits +-1."""
    finite = np.isfinite(t)
    if finite.all():
        return _erf(t)
    out = np.sign(t)  # fills +-1 at +-inf
    idx = np.nonzero(finite.ravel())[0]
    flat = out.ravel()
    flat[idx] = _erf(t.ravel()[idx])
    return out


def _model_pairs(model):
    if isinstance(model, RankOneModel):
        model = model.to_psd()
    if not isinstance(model, GaussianPsdModel):
        raise TypeError("expected a GaussianPsdModel or RankOneModel")
    mid, w = model._pair_data
    return model, mid, w


def integrate_boxes(
    model,
    lowers,
    uppers,
    acct: IntegralAccounting | None = None,
) -> NDArray[np.float64]:
    """Integral of the model over a batch of boxes.

    ``lowers`` and ``uppers`` are (B, d) corner arrays (infinities
    allowed).  Returns a length-B vector, clamped at zero since roundoff
    can leave residuals of order -1e-12 on a PSD model.
    """
    model, mid, w = _model_pairs(model)
    lowers = np.atleast_2d(np.asarray(lowers, dtype=float))
    uppers = np.atleast_2d(np.asarray(uppers, dtype=float))
    d = model.d
    if lowers.shape != uppers.shape or lowers.shape[1] != d:
        raise ValueError("corner arrays must both be (B, d)")
    if np.any(np.isnan(lowers)) or np.any(np.isnan(uppers)):
        raise ValueError("box corners must not be NaN")
    if np.any(lowers > uppers):
        raise ValueError("need lower <= upper for every box")

    s = np.sqrt(2.0 * model.eta)  # per-coordinate scale of k_{2 eta}
    # (pi/4)^{d/2} * det(diag(2 eta))^{-1/2}
    c = float(np.prod(np.sqrt(np.pi) / (2.0 * s)))

    B = lowers.shape[0]
    n_pairs = mid.shape[0]
    out = np.empty(B)
    step = max(1, _CHUNK_ELEMS // max(1, n_pairs * d))
    for start in range(0, B, step):
        stop = min(B, start + step)
        lo = lowers[start:stop, None, :]  # (b, 1, d)
        hi = uppers[start:stop, None, :]
        t_hi = s * (hi - mid[None, :, :])
        t_lo = s * (lo - mid[None, :, :])
        diff = _erf_subst(t_hi) - _erf_subst(t_lo)
        out[start:stop] = diff.prod(axis=2) @ w
    if acct is not None:
        # The counter reports the closed form's term count: one erf per
        # pair (i, j) per finite bound, even though symmetric duplicates
        # are evaluated once.
        finite_bounds = np.isfinite(lowers).sum() + np.isfinite(uppers).sum()
        acct.erf_calls += int(finite_bounds) * model.m**2
        acct.integral_evals += B
    np.maximum(out, 0.0, out=out)
    return c * out


def integrate(model, box: HyperRectangle, acct: IntegralAccounting | None = None) -> float:
    """Integral of the model over one hyper-rectangle (may be R^d)."""
    if box.dim != model.d:
        raise ValueError("box dimension does not match the model")
    vals = integrate_boxes(model, box.lower[None, :], box.upper[None, :], acct)
    return float(vals[0])


def quartic_gram(
    X,
    eta,
    box: HyperRectangle,
    pair_cap: float = 1e8,
) -> NDArray[np.float64]:
    """Gram tensor of pairwise kernel products over a box.

    Entry (p, q), with p = (i, j) and q = (k, l) flattened row-major,
    equals the integral over the box of

        k_eta(x, x_i) k_eta(x, x_j) k_eta(x, x_k) k_eta(x, x_l).

    Collapsing pairs to midpoints twice leaves a single k_{4 eta} kernel,
    so each entry is again an erf product.  The result is an
    (m^2, m^2) symmetric PSD matrix; for any coefficient matrix A,
    vec(A)^T G vec(A) integrates the squared model.

    Raises ``ResourceLimitError`` when m^4 exceeds ``pair_cap``; at that
    size a Monte Carlo estimate of the squared integral is the sane
    alternative.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    eta = np.asarray(eta, dtype=float)
    m, d = X.shape
    n_pairs = m * m
    if float(n_pairs) ** 2 > pair_cap:
        raise ResourceLimitError(
            "quartic pair tensor needs m^4 = %.3g entries (cap %.3g); "
            "use Monte Carlo integration of the squared model instead"
            % (float(n_pairs) ** 2, pair_cap)
        )
    if box.dim != d:
        raise ValueError("box dimension does not match the centers")

    from .kernels import kernel_matrix

    K_half = kernel_matrix(0.5 * eta, X).ravel()  # (m^2,)
    mid = 0.5 * (X[:, None, :] + X[None, :, :]).reshape(n_pairs, d)
    K_mid = kernel_matrix(eta, mid)  # (m^2, m^2)

    s = np.sqrt(4.0 * eta)
    c = float(np.prod(np.sqrt(np.pi) / (2.0 * s)))
    lo = box.lower
    hi = box.upper

    J = np.empty((n_pairs, n_pairs))
    step = max(1, _CHUNK_ELEMS // max(1, n_pairs * d))
    for start in range(0, n_pairs, step):
        stop = min(n_pairs, start + step)
        centers = 0.5 * (mid[start:stop, None, :] + mid[None, :, :])  # (b, m^2, d)
        diff = _erf_subst(s * (hi - centers)) - _erf_subst(s * (lo - centers))
        J[start:stop] = diff.prod(axis=2)
    G = np.outer(K_half, K_half) * K_mid * (c * J)
    return 0.5 * (G + G.T)


def integrate_squared(model, box: HyperRectangle, pair_cap: float = 1e8) -> float:
    """Integral of f^2 over a box via the quartic closed form.

    Accumulates the m^2 x m^2 bilinear form in row chunks, so memory
    stays bounded even near the pair cap.
    """
    from .kernels import kernel_matrix

    model, mid, w = _model_pairs(model)
    if box.dim != model.d:
        raise ValueError("box dimension does not match the model")
    n_pairs = mid.shape[0]
    if float(n_pairs) ** 2 > pair_cap:
        raise ResourceLimitError(
            "squared integral needs m^4 = %.3g pair products (cap %.3g); "
            "use Monte Carlo integration of the squared model instead"
            % (float(n_pairs) ** 2, pair_cap)
        )
    s = np.sqrt(4.0 * model.eta)
    c = float(np.prod(np.sqrt(np.pi) / (2.0 * s)))
    lo = box.lower
    hi = box.upper
    total = 0.0
    step = max(1, _CHUNK_ELEMS // max(1, n_pairs * model.d))
    for start in range(0, n_pairs, step):
        stop = min(n_pairs, start + step)
        centers = 0.5 * (mid[start:stop, None, :] + mid[None, :, :])
        diff = _erf_subst(s * (hi - centers)) - _erf_subst(s * (lo - centers))
        J = diff.prod(axis=2)  # (b, m^2)
        K_rows = kernel_matrix(model.eta, mid[start:stop], mid)
        total += float(w[start:stop] @ ((K_rows * J) @ w))
    return max(c * total, 0.0)
