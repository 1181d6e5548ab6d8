"""Test-path generators: fractional Brownian motion, smooth perturbations,
and convenience wrappers over the Schauder constructions.

All generators are pure functions of their parameters and seed; no global
RNG state is touched.  The seed-to-path map uses numpy's default generator
(PCG64) and is recorded in run metadata, but is not promised bit-stable
across numpy versions or other implementations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import Path, grid_times
from .schauder import (
    counterexample_coefficients,
    schauder_eval,
    takagi_coefficients,
)

__all__ = [
    "GENERATOR_VERSION",
    "GeneratorSpec",
    "fbm_path",
    "smooth_perturbation",
    "smooth_lipschitz_bound",
    "takagi_path",
    "counterexample_path",
    "generate",
]

GENERATOR_VERSION = "1"

_FBM_MAX_LEVEL = 22          # memory guard for the O(N log N) sampler
_FBM_CHOLESKY_MAX_LEVEL = 12  # the O(N^2) fallback is only viable when small
_EIGEN_CLIP = 1e-10           # relative tolerance for benign negative eigenvalues


def _fgn_covariance(H: float, N: int) -> np.ndarray:
    """Autocovariance of unit-spaced fractional Gaussian noise, lags 0..N."""
    k = np.arange(N + 1, dtype=np.float64)
    return 0.5 * (np.abs(k + 1) ** (2 * H) + np.abs(k - 1) ** (2 * H)
                  - 2.0 * np.abs(k) ** (2 * H))


def _fgn_circulant(H: float, N: int, rng: np.random.Generator) -> np.ndarray:
    """Sample N fractional-Gaussian-noise increments by circulant embedding.

    Returns None if the embedding has a negative eigenvalue beyond the
    benign-roundoff tolerance (callers fall back to exact factorization).
    """
    gamma = _fgn_covariance(H, N)
    circ = np.concatenate([gamma, gamma[-2:0:-1]])  # length 2N
    lam = np.fft.fft(circ).real
    floor = -_EIGEN_CLIP * float(lam.max())
    if lam.min() < floor:
        return None
    lam = np.maximum(lam, 0.0)
    w = rng.standard_normal(2 * N)
    spectrum = np.zeros(2 * N, dtype=np.complex128)
    spectrum[0] = np.sqrt(lam[0]) * w[0]
    spectrum[N] = np.sqrt(lam[N]) * w[N]
    half = np.sqrt(lam[1:N] / 2.0)
    spectrum[1:N] = half * (w[1:N] + 1j * w[N + 1:])
    spectrum[N + 1:] = np.conj(spectrum[1:N][::-1])
    return (np.fft.ifft(spectrum).real[:N]) * np.sqrt(2 * N)


def _fgn_cholesky(H: float, N: int, rng: np.random.Generator) -> np.ndarray:
    """Exact-covariance fallback: factorize the dense N x N fGN covariance."""
    gamma = _fgn_covariance(H, N)
    idx = np.abs(np.subtract.outer(np.arange(N), np.arange(N)))
    cov = gamma[idx]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"fractional-noise covariance not positive definite at H={H}, N={N}"
        ) from exc
    return chol @ rng.standard_normal(N)


def fbm_path(H: float, grid_level: int, seed: int, label: str | None = None) -> Path:
    """Fractional Brownian motion on [0, 1] sampled at 2**grid_level + 1 points.

    Increments are exact-in-distribution via circulant embedding of the
    stationary fGN covariance, scaled by ``2**(-grid_level * H)`` so that
    ``Var(B(t) - B(s)) = |t - s|**(2H)`` on the grid.  Deterministic given
    the seed.  If the embedding fails beyond roundoff tolerance, an exact
    Cholesky factorization is used for grids up to level 12; otherwise a
    diagnosable error is raised.
    """
    if not 0.0 < H < 1.0:
        raise ValidationError(f"H must lie in (0, 1), got {H}")
    if not 0 <= grid_level <= _FBM_MAX_LEVEL:
        raise ValidationError(
            f"grid_level must be in [0, {_FBM_MAX_LEVEL}] "
            f"(memory guard), got {grid_level}"
        )
    rng = np.random.default_rng(seed)
    N = 1 << grid_level
    fgn = _fgn_circulant(H, N, rng)
    if fgn is None:
        if grid_level > _FBM_CHOLESKY_MAX_LEVEL:
            raise NumericalError(
                f"circulant embedding failed for H={H} at grid level {grid_level} "
                f"and the exact fallback is limited to level {_FBM_CHOLESKY_MAX_LEVEL}; "
                f"reduce the grid level"
            )
        fgn = _fgn_cholesky(H, N, rng)
    increments = fgn * 2.0 ** (-grid_level * H)
    samples = np.concatenate([[0.0], np.cumsum(increments)])
    return Path(grid_level=grid_level, samples=samples,
                label=label if label is not None else f"fbm(H={H}, seed={seed})")


def smooth_perturbation(kind: str, amplitude: float, grid_level: int,
                        params: dict | None = None) -> Path:
    """A Lipschitz path with vanishing p-th variation for every p > 1.

    ``kind='sine'`` gives ``amplitude * sin(2*pi*freq*t)`` (``freq`` from
    params, default 1); ``kind='poly'`` evaluates the polynomial with
    coefficients ``params['coeffs']`` (constant term first) times
    ``amplitude``.
    """
    params = dict(params or {})
    t = grid_times(grid_level)
    if kind == "sine":
        freq = float(params.get("freq", 1.0))
        samples = amplitude * np.sin(2.0 * np.pi * freq * t)
        label = f"sine(amp={amplitude}, freq={freq})"
    elif kind == "poly":
        coeffs = np.asarray(params.get("coeffs", [0.0, 1.0]), dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValidationError("poly perturbation needs a 1-D coefficient list")
        samples = amplitude * np.polynomial.polynomial.polyval(t, coeffs)
        label = f"poly(amp={amplitude}, coeffs={coeffs.tolist()})"
    else:
        raise ValidationError(f"unknown perturbation kind {kind!r}; expected sine or poly")
    return Path(grid_level=grid_level, samples=samples, label=label)


def smooth_lipschitz_bound(kind: str, amplitude: float, params: dict | None = None) -> float:
    """An explicit Lipschitz constant for :func:`smooth_perturbation` output."""
    params = dict(params or {})
    if kind == "sine":
        freq = float(params.get("freq", 1.0))
        return abs(amplitude) * 2.0 * np.pi * abs(freq)
    if kind == "poly":
        coeffs = np.asarray(params.get("coeffs", [0.0, 1.0]), dtype=np.float64)
        k = np.arange(coeffs.size)
        return abs(amplitude) * float(np.sum(k * np.abs(coeffs)))
    raise ValidationError(f"unknown perturbation kind {kind!r}")


def takagi_path(H: float, grid_level: int, signs: str = "plus",
                seed: int | None = None, max_level: int | None = None) -> Path:
    """Takagi-class path: Schauder coefficients ``2**(m*(1/2-H)) * (+-1)``.

    Coefficient levels run to ``max_level`` (default: the grid level, the
    finest resolvable truncation).
    """
    M = grid_level if max_level is None else max_level
    return schauder_eval(takagi_coefficients(H, M, signs=signs, seed=seed), grid_level)


def counterexample_path(n_max: int, grid_level: int | None = None) -> Path:
    """The oscillating-quadratic-variation path, resolved to ``grid_level``.

    The default grid level ``S_{n_max} = n_max(n_max+1)/2`` is the smallest
    that resolves every coefficient burst.
    """
    coeffs = counterexample_coefficients(n_max)
    L = coeffs.max_level if grid_level is None else grid_level
    return schauder_eval(coeffs, L)


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of a generated path (for manifests and CLI)."""

    kind: str
    grid_level: int
    H: float | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)

    _KINDS = ("fbm", "takagi", "counterexample", "smooth", "custom_schauder")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValidationError(
                f"unknown generator kind {self.kind!r}; expected one of {self._KINDS}"
            )
        if self.kind in ("fbm", "takagi"):
            if self.H is None or not 0.0 < self.H < 1.0:
                raise ValidationError(f"kind {self.kind!r} requires H in (0, 1), got {self.H}")

    def metadata(self) -> dict:
        return {"kind": self.kind, "grid_level": self.grid_level, "H": self.H,
                "seed": self.seed, "params": dict(self.params),
                "generator_version": GENERATOR_VERSION}


def generate(spec: GeneratorSpec) -> Path:
    """Build the path described by ``spec``."""
    if spec.kind == "fbm":
        return fbm_path(spec.H, spec.grid_level, spec.seed if spec.seed is not None else 0)
    if spec.kind == "takagi":
        return takagi_path(spec.H, spec.grid_level,
                           signs=spec.params.get("signs", "plus"), seed=spec.seed,
                           max_level=spec.params.get("max_level"))
    if spec.kind == "counterexample":
        return counterexample_path(int(spec.params.get("n_max", 4)), spec.grid_level)
    if spec.kind == "smooth":
        return smooth_perturbation(spec.params.get("shape", "sine"),
                                   float(spec.params.get("amplitude", 1.0)),
                                   spec.grid_level, spec.params)
    if spec.kind == "custom_schauder":
        from .schauder import read_coefficients_json
        coeffs = read_coefficients_json(spec.params["coeffs_file"])
        return schauder_eval(coeffs, spec.grid_level)
    raise ValidationError(f"unknown generator kind {spec.kind!r}")
