"""Faber–Schauder expansions on dyadic grids.

Paths are built from triangular coefficient arrays ``theta[m][k]`` (level m
has 2**m entries).  The basis normalization is pinned by the level-n
quadratic-variation identity

    sum over level-n dyadic increments of |dx|**2
        == 2**-n * sum_{m<n} sum_k theta[m][k]**2,

which holds exactly when the midpoint recursion adds
``theta[m][k] * 2**(-m/2) / 2`` at each interval midpoint.  Equivalently the
basis tent is ``e_{m,k}(t) = 2**(-m/2) * max(0, min(2**m t - k, 1 - (2**m t - k)))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ResolutionError, ValidationError
from .grid import Path

__all__ = [
    "SchauderCoefficients",
    "schauder_eval",
    "schauder_eval_direct",
    "takagi_coefficients",
    "counterexample_coefficients",
    "counterexample_burst_levels",
    "level_qv_identity",
    "read_coefficients_json",
    "write_coefficients_json",
]


@dataclass(frozen=True)
class SchauderCoefficients:
    """Triangular coefficient array: ``theta[m]`` has 2**m finite reals."""

    max_level: int
    theta: tuple
    label: str = ""

    def __post_init__(self):
        if self.max_level != len(self.theta):
            raise ValidationError(
                f"max_level {self.max_level} != number of coefficient rows {len(self.theta)}"
            )
        rows = []
        for m, row in enumerate(self.theta):
            arr = np.asarray(row, dtype=np.float64)
            if arr.shape != (1 << m,):
                raise ValidationError(
                    f"coefficient row {m} must have {1 << m} entries, got {arr.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"non-finite coefficient in row {m}")
            arr.setflags(write=False)
            rows.append(arr)
        object.__setattr__(self, "theta", tuple(rows))

    def squared_row_sums(self) -> np.ndarray:
        """``sum_k theta[m][k]**2`` for each level m."""
        return np.array([float(np.dot(row, row)) for row in self.theta])


def schauder_eval(c: SchauderCoefficients, grid_level: int) -> Path:
    """Evaluate the partial-sum path on the level-``grid_level`` grid.

    Uses the midpoint recursion
    ``x((2k+1)/2**(m+1)) = (x(k/2**m) + x((k+1)/2**m)) / 2 + theta[m][k] * 2**(-m/2) / 2``,
    which is exact at dyadic points and costs O(2**grid_level) total.  Levels
    above ``max_level`` have no coefficient term, so the recursion there is
    plain midpoint averaging: the partial sum is piecewise linear between
    level-``max_level`` dyadic points and the averaging reproduces it exactly
    on the finer grid.
    """
    if grid_level < c.max_level:
        raise ResolutionError(
            f"grid level {grid_level} cannot resolve coefficients up to level "
            f"{c.max_level - 1}; need grid_level >= {c.max_level}"
        )
    x = np.zeros((1 << grid_level) + 1)
    for m in range(grid_level):
        stride = 1 << (grid_level - m)
        half = stride >> 1
        mid = 0.5 * (x[0:-1:stride] + x[stride::stride])
        if m < c.max_level:
            mid = mid + c.theta[m] * (2.0 ** (-m / 2.0) * 0.5)
        x[half::stride] = mid
    return Path(grid_level=grid_level, samples=x, label=c.label)


def schauder_eval_direct(c: SchauderCoefficients, grid_level: int) -> Path:
    """Naive tent-by-tent summation; O(max_level * 2**grid_level).

    Retained as an independent oracle for :func:`schauder_eval`; both must
    agree to machine precision.
    """
    if grid_level < c.max_level:
        raise ResolutionError(
            f"grid level {grid_level} cannot resolve coefficients up to level "
            f"{c.max_level - 1}; need grid_level >= {c.max_level}"
        )
    t = np.arange((1 << grid_level) + 1, dtype=np.float64) * 2.0 ** (-grid_level)
    x = np.zeros_like(t)
    for m in range(c.max_level):
        scale = 2.0 ** (-m / 2.0)
        for k in range(1 << m):
            u = (1 << m) * t - k
            tent = np.maximum(0.0, np.minimum(u, 1.0 - u))
            x += c.theta[m][k] * scale * tent
    return Path(grid_level=grid_level, samples=x, label=c.label)


def _sign_stream(signs, m: int, rng) -> np.ndarray:
    width = 1 << m
    if signs == "plus":
        return np.ones(width)
    if signs == "minus":
        return -np.ones(width)
    if signs == "alternating":
        k = np.arange(width)
        return np.where((m + k) % 2 == 0, 1.0, -1.0)
    if signs == "random":
        return rng.choice([-1.0, 1.0], size=width)
    raise ValidationError(
        f"unknown sign source {signs!r}; expected plus, minus, alternating, or random"
    )


def takagi_coefficients(H: float, M: int, signs: str = "plus",
                        seed: int | None = None) -> SchauderCoefficients:
    """Takagi-class coefficients ``theta[m][k] = 2**(m*(1/2 - H)) * s_{m,k}``.

    ``signs`` selects the sign rule: ``plus`` / ``minus`` (constant),
    ``alternating`` (``(-1)**(m+k)``), or ``random`` (seeded +-1 stream).
    The scale factor is folded into the stored coefficients.
    """
    if not 0.0 < H < 1.0:
        raise ValidationError(f"H must lie in (0, 1), got {H}")
    if M < 1:
        raise ValidationError(f"max_level must be >= 1, got {M}")
    rng = np.random.default_rng(seed)
    theta = [2.0 ** (m * (0.5 - H)) * _sign_stream(signs, m, rng) for m in range(M)]
    tag = signs if signs != "random" else f"random(seed={seed})"
    return SchauderCoefficients(max_level=M, theta=tuple(theta),
                                label=f"takagi(H={H}, signs={tag})")


def counterexample_burst_levels(n_max: int) -> list[int]:
    """Levels ``S_n - 1`` (with ``S_n = n(n+1)/2``) carrying nonzero bursts."""
    return [n * (n + 1) // 2 - 1 for n in range(1, n_max + 1)]


def counterexample_coefficients(n_max: int) -> SchauderCoefficients:
    """Coefficients whose quadratic-variation sequence oscillates.

    The rows are zero except at levels ``m = S_n - 1`` (``S_n = n(n+1)/2``),
    where every entry equals ``sqrt(2n - (n-1)/2**(n-1))``.  The level-S_n
    quadratic variation then equals n exactly while the level-(S_n - 1)
    value tends to 0, so the sequence has no limit.
    """
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    max_level = n_max * (n_max + 1) // 2
    theta = [np.zeros(1 << m) for m in range(max_level)]
    for n in range(1, n_max + 1):
        m = n * (n + 1) // 2 - 1
        theta[m] = np.full(1 << m, math.sqrt(2.0 * n - (n - 1) / 2.0 ** (n - 1)))
    return SchauderCoefficients(max_level=max_level, theta=tuple(theta),
                                label=f"qv-oscillation(n_max={n_max})")


def level_qv_identity(c: SchauderCoefficients, n: int) -> float:
    """Closed-form level-n quadratic variation ``2**-n * sum_{m<n} sum_k theta**2``."""
    if n < 0:
        raise ValidationError(f"level must be >= 0, got {n}")
    upto = min(n, c.max_level)
    return 2.0 ** (-n) * float(np.sum(c.squared_row_sums()[:upto]))


def write_coefficients_json(c: SchauderCoefficients, filename) -> None:
    doc = {"max_level": c.max_level,
           "theta": [row.tolist() for row in c.theta],
           "label": c.label}
    with open(filename, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_coefficients_json(filename) -> SchauderCoefficients:
    try:
        with open(filename) as fh:
            doc = json.load(fh)
        return SchauderCoefficients(max_level=int(doc["max_level"]),
                                    theta=tuple(doc["theta"]),
                                    label=str(doc.get("label", "")))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"cannot parse coefficients JSON {filename}: {exc}") from exc
