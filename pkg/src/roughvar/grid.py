"""Dyadic grids, partitions, mesh statistics, and oscillation.

A :class:`Path` is a function on [0, 1] sampled at the dyadic grid points
``t_j = j * 2**-L``.  A :class:`Partition` selects a subset of those grid
points (always containing both endpoints) along which variation functionals
are accumulated.  All objects are immutable; operations are pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import FormatError, ResolutionError, ValidationError

__all__ = [
    "Path",
    "Partition",
    "MeshStats",
    "dyadic_partition",
    "mesh_stats",
    "oscillation",
    "grid_times",
    "read_path_csv",
    "read_path_json",
    "write_path_csv",
    "write_path_json",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr)
    out.setflags(write=False)
    return out


def grid_times(grid_level: int) -> np.ndarray:
    """Times ``j * 2**-grid_level`` for j = 0..2**grid_level (exact floats)."""
    return np.arange((1 << grid_level) + 1, dtype=np.float64) * 2.0 ** (-grid_level)


@dataclass(frozen=True)
class Path:
    """A continuous function on [0, 1] restricted to a dyadic grid.

    ``samples[j]`` is the value at ``t_j = j * 2**-grid_level``; the array
    has exactly ``2**grid_level + 1`` entries and contains no NaN/inf.
    """

    grid_level: int
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.grid_level < 0:
            raise ValidationError(f"grid_level must be >= 0, got {self.grid_level}")
        samples = np.asarray(self.samples, dtype=np.float64)
        expected = (1 << self.grid_level) + 1
        if samples.ndim != 1 or samples.size != expected:
            raise ValidationError(
                f"need {expected} samples for grid level {self.grid_level}, "
                f"got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise ValidationError(
                f"non-finite sample at index {bad} (t = {bad * 2.0 ** (-self.grid_level)})"
            )
        object.__setattr__(self, "samples", _readonly(samples))

    @property
    def times(self) -> np.ndarray:
        return grid_times(self.grid_level)

    def relabel(self, label: str) -> "Path":
        return replace(self, label=label)


@dataclass(frozen=True)
class Partition:
    """An increasing set of grid indices from 0 up to the last grid point.

    ``level`` records the dyadic level for partitions built by
    :func:`dyadic_partition`; user-supplied index partitions may carry any
    nonnegative marker.  The right endpoint (``2**L`` for the target grid)
    is checked by the operations that receive the grid level.
    """

    level: int
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 2:
            raise ValidationError("partition needs at least two indices")
        if idx[0] != 0:
            raise ValidationError(f"partition must start at index 0, got {idx[0]}")
        if np.any(np.diff(idx) <= 0):
            raise ValidationError("partition indices must be strictly increasing")
        object.__setattr__(self, "indices", _readonly(idx))

    @property
    def count(self) -> int:
        """Number of partition intervals."""
        return self.indices.size - 1

    def check_grid(self, grid_level: int) -> None:
        last = int(self.indices[-1])
        if last != (1 << grid_level):
            raise ValidationError(
                f"partition ends at index {last}, expected {1 << grid_level} "
                f"for grid level {grid_level}"
            )

    def times(self, grid_level: int) -> np.ndarray:
        self.check_grid(grid_level)
        return self.indices * 2.0 ** (-grid_level)


@dataclass(frozen=True)
class MeshStats:
    """Largest and smallest interval of a partition, and the interval count."""

    mesh: float
    min_mesh: float
    count: int

    def __post_init__(self):
        if not (0.0 < self.min_mesh <= self.mesh <= 1.0):
            raise ValidationError(
                f"mesh statistics out of range: min_mesh={self.min_mesh}, mesh={self.mesh}"
            )


def dyadic_partition(n: int, grid_level: int) -> Partition:
    """The level-``n`` dyadic partition on a level-``grid_level`` grid.

    Indices are ``j * 2**(grid_level - n)`` for j = 0..2**n.
    """
    if n < 0:
        raise ValidationError(f"partition level must be >= 0, got {n}")
    if n > grid_level:
        raise ResolutionError(
            f"dyadic level {n} does not refine into grid level {grid_level}"
        )
    step = 1 << (grid_level - n)
    return Partition(level=n, indices=np.arange(0, (1 << grid_level) + 1, step))


def mesh_stats(part: Partition, grid_level: int) -> MeshStats:
    """Mesh (largest interval), minimal mesh, and interval count of ``part``."""
    part.check_grid(grid_level)
    gaps = np.diff(part.indices) * 2.0 ** (-grid_level)
    return MeshStats(mesh=float(gaps.max()), min_mesh=float(gaps.min()), count=part.count)


def oscillation(x: Path, part: Partition) -> float:
    """Largest within-block fluctuation of ``x`` along ``part``.

    For each partition block the fluctuation is max - min over all grid
    samples in the block, endpoints inclusive; the result is the maximum
    over blocks.  Nonnegative, and at least the largest block increment.
    """
    part.check_grid(x.grid_level)
    s = x.samples
    starts = part.indices[:-1]
    # reduceat spans [indices[j], indices[j+1]); fold the right endpoint in.
    block_max = np.maximum.reduceat(s, starts)
    block_min = np.minimum.reduceat(s, starts)
    block_max = np.maximum(block_max, s[part.indices[1:]])
    block_min = np.minimum(block_min, s[part.indices[1:]])
    return float(np.max(block_max - block_min))


# ---------------------------------------------------------------------------
# Serialization: CSV with header "t,value" (full-precision decimal), or JSON
# with fields {grid_level, samples, label}.
# ---------------------------------------------------------------------------

def write_path_csv(x: Path, filename) -> None:
    data = np.column_stack([x.times, x.samples])
    np.savetxt(filename, data, fmt="%.17g", delimiter=",", header="t,value",
               comments="")


def read_path_csv(filename, label: str | None = None) -> Path:
    try:
        data = np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise FormatError(f"cannot parse path CSV {filename}: {exc}") from exc
    if data.shape[1] != 2:
        raise FormatError(f"path CSV {filename} must have two columns, got {data.shape[1]}")
    n_rows = data.shape[0]
    grid_level = max(n_rows - 1, 1).bit_length() - 1
    if (1 << grid_level) + 1 != n_rows:
        raise FormatError(
            f"path CSV {filename} has {n_rows} rows; expected 2**L + 1 for integer L"
        )
    t = data[:, 0]
    expected_t = grid_times(grid_level)
    if not np.allclose(t, expected_t, rtol=0.0, atol=2.0 ** (-grid_level) * 1e-6):
        raise FormatError(f"path CSV {filename}: time column is not the dyadic grid")
    return Path(grid_level=grid_level, samples=data[:, 1],
                label=label if label is not None else str(filename))


def write_path_json(x: Path, filename) -> None:
    doc = {"grid_level": x.grid_level, "samples": x.samples.tolist(), "label": x.label}
    with open(filename, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_path_json(filename) -> Path:
    try:
        with open(filename) as fh:
            doc = json.load(fh)
        return Path(grid_level=int(doc["grid_level"]),
                    samples=np.asarray(doc["samples"], dtype=np.float64),
                    label=str(doc.get("label", "")))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"cannot parse path JSON {filename}: {exc}") from exc
