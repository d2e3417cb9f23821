"""Quadrature, special functions and transforms shared by the physics modules.

All routines are deterministic: fixed node sets or QUADPACK with fixed
settings, no randomness, no dependence on thread count.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

from .units import HBAR

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "UnconvergedWarning",
    "DEFAULT_SPEC",
    "dawson_D",
    "gauss_legendre",
    "composite_gauss_legendre",
    "quadrature_1d",
    "sphere_average",
    "radial_fourier3",
    "wynn_epsilon",
]


class UnconvergedWarning(RuntimeWarning):
    """A quadrature did not reach its requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for adaptive quadratures."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool


def _flag(result: QuadResult, what: str) -> QuadResult:
    if not result.converged:
        warnings.warn(
            f"{what}: unconverged (value={result.value!r}, error estimate={result.error!r})",
            UnconvergedWarning,
            stacklevel=3,
        )
    return result


# --------------------------------------------------------------------------
# Dawson's integral

_D_SERIES_CUT = 1e-3


def dawson_D(x):
    """D(x) = F(x)/x with F Dawson's integral, D(0) = 1.

    Even in ``x``, monotonically decreasing in ``|x|``, ``D(x) ~ 1/(2 x^2)``
    for large ``|x|``. Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("dawson_D: non-finite argument")
    ax = np.abs(x)
    small = ax < _D_SERIES_CUT
    x2 = ax * ax
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            small,
            1.0 - x2 * (2.0 / 3.0 - x2 * (4.0 / 15.0 - x2 * 8.0 / 105.0)),
            special.dawsn(ax) / np.where(small, 1.0, ax),
        )
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# fixed rules


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def composite_gauss_legendre(edges, n: int):
    """Gauss-Legendre with ``n`` nodes on every panel [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(int(n))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (half[:, None] * x + mid[:, None]).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


# --------------------------------------------------------------------------
# adaptive 1-D quadrature


def quadrature_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    points=None,
) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over [a, b].

    ``b`` may be ``np.inf``; QUADPACK then maps [a, inf) onto (0, 1] with
    x = a + (1 - t)/t before integrating. The returned error estimate is
    QUADPACK's; when it exceeds ``max(abs_tol, rel_tol*|value|)`` or QUADPACK
    reports a problem the result is flagged unconverged and an
    :class:`UnconvergedWarning` is emitted.
    """
    kwargs = dict(
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=int(spec.max_subdivisions),
        full_output=1,
    )
    if points is not None and np.isfinite(b):
        kwargs["points"] = points
    out = integrate.quad(f, a, b, **kwargs)
    value, err = float(out[0]), float(out[1])
    ok = bool(len(out) == 3 and err <= spec.target(value))
    return _flag(QuadResult(value, err, ok), "quadrature_1d")


# --------------------------------------------------------------------------
# averages over the unit sphere


def sphere_average(
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    spec: QuadratureSpec = DEFAULT_SPEC,
    n_start: int = 16,
    n_max: int = 1024,
) -> QuadResult:
    """(1/4 pi) * integral of g(beta, alpha) over the unit sphere.

    Product rule: Gauss-Legendre in cos(beta) times the trapezoid rule in
    alpha (spectrally accurate for smooth periodic integrands). The node
    count is doubled until two successive estimates agree within ``spec``.
    ``g`` must broadcast over arrays of shape (n_beta, 1) and (1, n_alpha).
    """

    def estimate(n):
        c, w = gauss_legendre(-1.0, 1.0, n)
        beta = np.arccos(c)[:, None]
        alpha = (2.0 * np.pi * np.arange(2 * n) / (2 * n))[None, :]
        vals = np.broadcast_to(g(beta, alpha), (n, 2 * n))
        return float(np.sum(w * vals.mean(axis=1)) / 2.0)

    n = int(n_start)
    prev = estimate(n)
    while True:
        n *= 2
        cur = estimate(n)
        err = abs(cur - prev)
        if err <= spec.target(cur) or n >= n_max:
            return _flag(QuadResult(cur, err, bool(err <= spec.target(cur))), "sphere_average")
        prev = cur


# --------------------------------------------------------------------------
# isotropic 3-D Fourier transform


def wynn_epsilon(partial_sums) -> tuple[float, float]:
    """Wynn's epsilon extrapolation of a sequence of partial sums.

    Returns the highest-order even-column estimate and the difference to the
    previous even-column estimate (a crude error indicator).
    """
    s = np.asarray(partial_sums, dtype=float)
    prev = np.zeros(len(s) + 1)
    cur = s.copy()
    best, best_prev = float(cur[-1]), float(cur[-2]) if len(cur) > 1 else float(cur[-1])
    col = 0
    while len(cur) > 1:
        diff = np.diff(cur)
        if np.any(diff == 0.0):
            break
        nxt = prev[1 : len(cur)] + 1.0 / diff
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            best_prev, best = best, float(cur[-1])
    return best, abs(best - best_prev)


def radial_fourier3(
    f: Callable[[np.ndarray], np.ndarray],
    P: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    hbar: float = HBAR,
    scale: float | None = None,
    n_start: int = 32,
    n_max: int = 4096,
) -> QuadResult:
    """3-D Fourier transform of a radial function, evaluated at |P|.

    Computes (2 pi hbar)^-3 * integral d^3R f(|R|) exp(-i P.R/hbar), i.e.
    (1 / (2 pi^2 hbar^2 P)) * integral_0^inf dR R f(R) sin(P R / hbar).

    The R-axis is split at the zeros of sin(P R/hbar); every half period is
    integrated with a fixed Gauss-Legendre rule (subdivided into panels no
    wider than ``scale``/2 when a length scale of ``f`` is given) and the
    alternating sequence of partial sums is accelerated with Wynn's epsilon
    algorithm. The number of half periods is doubled until two accelerated
    estimates agree within ``spec``.
    """
    if not P > 0:
        raise ValueError("radial_fourier3 requires P > 0")
    k = P / hbar
    half = math.pi / k
    panels = 1 if scale is None else max(1, math.ceil(2.0 * half / scale))
    x, w = _leggauss(24)
    unit = (np.arange(panels + 1) / panels)

    def terms(j0, j1):
        j = np.arange(j0, j1)
        edges = (j[:, None] + unit[None, :]) * half
        a, b = edges[:, :-1], edges[:, 1:]
        hl = 0.5 * (b - a)
        R = hl[..., None] * x + (0.5 * (a + b))[..., None]
        vals = R * np.asarray(f(R), dtype=float) * np.sin(k * R)
        return np.sum(hl[..., None] * w * vals, axis=(1, 2))

    pref = 1.0 / (2.0 * math.pi**2 * hbar**2 * P)
    n = int(n_start)
    t = terms(0, n)
    prev = None
    while True:
        sums = np.cumsum(t)
        tail = sums[-min(len(sums), 40):]
        est, _ = wynn_epsilon(tail)
        if prev is not None:
            err = abs(est - prev)
            # scale-free target: f may carry SI magnitudes
            target = spec.rel_tol * abs(est) + spec.abs_tol * np.max(np.abs(sums))
            if err <= target or n >= n_max:
                res = QuadResult(pref * est, pref * err, bool(err <= target))
                return _flag(res, "radial_fourier3")
        prev = est
        t = np.concatenate([t, terms(n, 2 * n)])
        n *= 2
