"""Critical variation index search and switching-behaviour classification.

For a path with finite nontrivial p-th variation, scaled quadratic variation
at exponent q diverges for q below the critical index and vanishes above it.
:func:`classify_index` reads off that behaviour at a single q;
:func:`critical_index_search` bisects on it to localize the critical index
``p_bar`` (and ``hurst_est = 1/p_bar``).  Paths that break the trichotomy
(oscillating or inconclusive probes, non-monotone classifications) abort
honestly with the probe evidence attached rather than forcing an index.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._util import parallel_map
from .errors import BracketError, InconclusiveError, ValidationError
from .grid import Path, dyadic_partition
from .variation import (
    ClassificationThresholds,
    LimitReport,
    PVarSource,
    limit_diagnostics,
    scaled_qv,
)

__all__ = [
    "ProbeRecord",
    "RoughnessReport",
    "default_levels",
    "classify_index",
    "classification_sweep",
    "critical_index_search",
]

# Rank order used for the monotone-classification check: diverging below the
# critical index, finite_positive at it, vanishing above.
_RANK = {"diverging": 0, "finite_positive": 1, "vanishing": 2}


@dataclass(frozen=True)
class ProbeRecord:
    """One q-probe: classification plus its per-level terminal values."""

    q: float
    classification: str
    terminal_values: tuple
    trend_slope: float

    def to_dict(self) -> dict:
        return {"q": self.q, "classification": self.classification,
                "terminal_values": list(self.terminal_values),
                "trend_slope": self.trend_slope}


@dataclass(frozen=True)
class RoughnessReport:
    """Result of a critical-index search.

    ``p_bar_est`` is the last finite_positive probe when one was seen,
    otherwise the final bracket midpoint; it always lies inside ``bracket``.
    ``hurst_est = 1/p_bar_est`` definitionally.  ``per_q`` lists every probe
    (endpoints included) sorted by q.
    """

    p_bar_est: float
    bracket: tuple
    hurst_est: float
    per_q: tuple
    levels_used: tuple
    src_mode: str
    iters: int

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo <= self.p_bar_est <= hi:
            raise ValidationError(
                f"p_bar_est {self.p_bar_est} outside bracket ({lo}, {hi})"
            )

    def to_dict(self) -> dict:
        return {"p_bar_est": self.p_bar_est, "bracket": list(self.bracket),
                "hurst_est": self.hurst_est,
                "per_q": [rec.to_dict() for rec in self.per_q],
                "levels_used": list(self.levels_used),
                "src_mode": self.src_mode, "iters": self.iters}


def default_levels(x: Path) -> range:
    """Dyadic levels 6 .. grid_level - 2 (top two held back as the proxy)."""
    return range(6, x.grid_level - 1)


def _check_levels(x: Path, levels) -> list:
    lv = [int(n) for n in levels]
    if len(lv) < 3:
        raise ValidationError(f"need at least 3 levels, got {len(lv)}")
    if any(n < 0 or n > x.grid_level for n in lv):
        raise ValidationError(f"levels must lie in [0, {x.grid_level}]")
    return lv


class _ProbeEngine:
    """Shared per-(q, level) terminal cache for a fixed path/levels/source.

    The weight source uses the q-th variation, so a finest-level source must
    be rebuilt for every probe q; analytic and self_level sources are
    q-independent and shared.
    """

    def __init__(self, x: Path, levels, src: PVarSource | None,
                 thresholds: ClassificationThresholds | None = None):
        self.x = x
        self.levels = _check_levels(x, levels)
        self.src = src or PVarSource()
        self.thresholds = thresholds
        self._finest: dict[float, PVarSource] = {}
        self._terminals: dict[tuple, float] = {}

    def _src_for(self, q: float) -> PVarSource:
        if self.src.mode != "finest_level":
            return self.src
        got = self._finest.get(q)
        if got is None:
            got = self.src.materialized(self.x, q) if self.src.finest_profile is None \
                else self.src
            self._finest[q] = got
        return got

    def terminal(self, q: float, n: int) -> float:
        key = (q, n)
        got = self._terminals.get(key)
        if got is None:
            part = dyadic_partition(n, self.x.grid_level)
            got = scaled_qv(self.x, part, q, self._src_for(q)).terminal
            self._terminals[key] = got
        return got

    def probe(self, q: float) -> LimitReport:
        if q <= 0:
            raise ValidationError(f"q must be > 0, got {q}")
        vals = [self.terminal(q, n) for n in self.levels]
        return limit_diagnostics(vals, window=len(self.levels),
                                 levels=self.levels, thresholds=self.thresholds)

    def record(self, q: float) -> ProbeRecord:
        rep = self.probe(q)
        return ProbeRecord(q=float(q), classification=rep.classification,
                           terminal_values=rep.terminal_values,
                           trend_slope=rep.trend_slope)


def classify_index(x: Path, levels, q: float,
                   src: PVarSource | None = None,
                   thresholds: ClassificationThresholds | None = None) -> str:
    """Classify scaled-QV terminals at exponent q across the given levels."""
    return _ProbeEngine(x, levels, src, thresholds).probe(q).classification


def classification_sweep(x: Path, levels, qs,
                         src: PVarSource | None = None,
                         thresholds: ClassificationThresholds | None = None) -> list:
    """Probe several exponents concurrently; records sorted by q."""
    engine = _ProbeEngine(x, levels, src, thresholds)
    records = parallel_map(engine.record, qs)
    return sorted(records, key=lambda rec: rec.q)


def _check_monotone(records) -> None:
    ordered = sorted(records, key=lambda rec: rec.q)
    ranks = [_RANK[rec.classification] for rec in ordered]
    if any(b < a for a, b in zip(ranks, ranks[1:])):
        raise InconclusiveError(
            "probe classifications are not monotone in q; switching behaviour "
            "does not hold on this path/level set",
            evidence=[rec.to_dict() for rec in ordered],
        )


def critical_index_search(x: Path, levels=None, p_range=(1.2, 4.0),
                          iters: int = 12, src: PVarSource | None = None,
                          thresholds: ClassificationThresholds | None = None
                          ) -> RoughnessReport:
    """Bisect for the critical variation index within ``p_range``.

    Requires the low endpoint to classify diverging and the high endpoint
    vanishing (bracket error otherwise, with both endpoint records attached).
    Diverging probes move the bracket floor up and vanishing probes move the
    ceiling down; a finite_positive probe sits at the critical index up to
    window bias, so its own trend slope decides the side (positive = still
    below).  Final bracket width is (p_max - p_min) * 2**-iters.
    """
    p_min, p_max = float(p_range[0]), float(p_range[1])
    if not p_min < p_max:
        raise ValidationError(f"need p_min < p_max, got {p_range}")
    if p_min <= 0:
        raise ValidationError(f"p_range must be positive, got {p_range}")
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    lv = _check_levels(x, levels if levels is not None else default_levels(x))
    engine = _ProbeEngine(x, lv, src, thresholds)

    seen: dict[float, ProbeRecord] = {}

    def probe(q: float) -> ProbeRecord:
        rec = engine.record(q)
        seen[rec.q] = rec
        if rec.classification not in _RANK:
            raise InconclusiveError(
                f"probe at q={q:g} classified {rec.classification}; "
                "no critical index can be bracketed",
                evidence=[r.to_dict() for r in sorted(seen.values(),
                                                      key=lambda r: r.q)],
            )
        return rec

    low_rec, high_rec = parallel_map(engine.record, [p_min, p_max])
    seen[low_rec.q], seen[high_rec.q] = low_rec, high_rec
    if low_rec.classification != "diverging" or high_rec.classification != "vanishing":
        raise BracketError(
            f"range ({p_min:g}, {p_max:g}) does not bracket a critical index: "
            f"low endpoint is {low_rec.classification}, "
            f"high endpoint is {high_rec.classification}",
            evidence=[low_rec.to_dict(), high_rec.to_dict()],
        )

    lo, hi = p_min, p_max
    last_fp = None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        rec = probe(mid)
        if rec.classification == "diverging":
            lo = mid
        elif rec.classification == "vanishing":
            hi = mid
        else:
            last_fp = rec.q
            if rec.trend_slope > 0.0:
                lo = mid
            else:
                hi = mid
        _check_monotone(seen.values())

    p_bar = last_fp if last_fp is not None else 0.5 * (lo + hi)
    per_q = tuple(sorted(seen.values(), key=lambda rec: rec.q))
    return RoughnessReport(p_bar_est=float(p_bar), bracket=(lo, hi),
                           hurst_est=1.0 / float(p_bar), per_q=per_q,
                           levels_used=tuple(lv), src_mode=engine.src.mode,
                           iters=int(iters))
