"""Convergent bounds on the achievable rate of the three-level decoder.

The mutual information of the message triple is a supermartingale of the
polarization process and F(D) = p - 4 sqrt(pm) is a submartingale with
F(1,0,0) = 1 and F(0,1,0) = 0, so the level averages

    U_n = mean over all 2^n sign paths of I(D_path)
    L_n = mean over all 2^n sign paths of F(D_path)

bracket the maximum achievable rate and converge to it.  The averages are
computed by exact level doubling with no state merging, so they are stable
across platforms to well below the reported precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .channels import (
    BAWGN,
    BEC,
    BSC,
    TripleDensity,
    _error_rate_arrays,
    _mutual_info_arrays,
    binary_entropy,
)
from .density_evolution import _minus_arrays, _plus_arrays

ENUMERATION_CEILING = 22

CURVE_FAMILIES = ("bec", "bsc", "bawgn", "universal")


def lower_functional(d: TripleDensity) -> float:
    """The submartingale functional F(D) = p - 4 sqrt(pm)."""
    return d.p - 4.0 * math.sqrt(d.p * d.m)


def _lower_functional_arrays(p, e, m):
    return p - 4.0 * np.sqrt(p * m)


def bhattacharyya_step_check(d: TripleDensity) -> tuple[bool, bool]:
    """Whether Z(D-) <= 2 Z(D) and Z(D+) <= 2 Z(D)^(3/2) hold for ``d``.

    Both inequalities drive the block-error exponent; each is reported with
    a -1e-12 slack so exact equalities pass.
    """
    from .channels import triple_stats
    from .density_evolution import triple_minus, triple_plus

    z = triple_stats(d)[1]
    z_minus = triple_stats(triple_minus(d))[1]
    z_plus = triple_stats(triple_plus(d))[1]
    holds_minus = z_minus <= 2.0 * z + 1e-12
    holds_plus = z_plus <= 2.0 * z**1.5 + 1e-12
    return holds_minus, holds_plus


@dataclass(frozen=True)
class BoundsSeries:
    """Lower/upper bound sequences L_0..L_n and U_0..U_n."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1 or lower.size == 0:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if np.any(np.diff(lower) < -1e-12):
            raise ValueError("lower bounds must be non-decreasing")
        if np.any(np.diff(upper) > 1e-12):
            raise ValueError("upper bounds must be non-increasing")
        if np.any(lower > upper + 1e-12):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_max(self) -> int:
        return self.lower.size - 1

    def csv_rows(self):
        yield "n,L_n,U_n"
        for j in range(self.lower.size):
            yield f"{j},{self.lower[j]:.10g},{self.upper[j]:.10g}"


def _level_means(p0, e0, m0, n_max: int, *,
                 skip_to_last: bool = False) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (L_j, U_j) per level for a batch of starting triples.

    States are (batch, 2^j) arrays expanded by exact doubling.  With
    ``skip_to_last`` the functionals are only evaluated at level ``n_max``
    (the yields before it are (None, None)), which roughly halves the work.
    """
    p = np.atleast_1d(np.asarray(p0, dtype=float))[:, None]
    e = np.atleast_1d(np.asarray(e0, dtype=float))[:, None]
    m = np.atleast_1d(np.asarray(m0, dtype=float))[:, None]
    for j in range(n_max + 1):
        if skip_to_last and j < n_max:
            yield None, None
        else:
            yield (_lower_functional_arrays(p, e, m).mean(axis=1),
                   _mutual_info_arrays(p, e, m).mean(axis=1))
        if j == n_max:
            break
        p, e, m = _double_level(p, e, m)


def _double_level(p, e, m):
    """One polarization level: children of every state, minus block first.

    The shared monomials are computed once and written straight into the
    doubled arrays; child order within a level is irrelevant to the means.
    """
    batch, width = p.shape
    p2 = p * p
    m2 = m * m
    pm2 = p * m
    pm2 *= 2.0
    new_p = np.empty((batch, 2 * width))
    new_e = np.empty((batch, 2 * width))
    new_m = np.empty((batch, 2 * width))
    # check (minus) children
    np.add(p2, m2, out=new_p[:, :width])
    new_m[:, :width] = pm2
    np.subtract(1.0, new_p[:, :width], out=new_e[:, :width])
    new_e[:, :width] -= pm2
    # variable (plus) children
    pe2 = p * e
    pe2 *= 2.0
    np.add(p2, pe2, out=new_p[:, width:])
    em2 = e * m
    em2 *= 2.0
    np.add(m2, em2, out=new_m[:, width:])
    np.subtract(1.0, new_p[:, width:], out=new_e[:, width:])
    new_e[:, width:] -= new_m[:, width:]
    np.maximum(new_e, 0.0, out=new_e)
    return new_p, new_e, new_m


def bounds_series(d0: TripleDensity, n_max: int, *,
                  ceiling: int = ENUMERATION_CEILING) -> BoundsSeries:
    """Exact L_0..L_n_max and U_0..U_n_max for the starting triple ``d0``."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if n_max > ceiling:
        raise ValueError(
            f"n_max={n_max} exceeds the enumeration ceiling {ceiling}; "
            "use bounds_series_mc for deeper levels")
    lower = np.empty(n_max + 1)
    upper = np.empty(n_max + 1)
    for j, (lo, up) in enumerate(_level_means(d0.p, d0.e, d0.m, n_max)):
        lower[j] = lo[0]
        upper[j] = up[0]
    return BoundsSeries(lower=lower, upper=upper)


def bracket_capacity(d0: TripleDensity, tol: float, n_ceiling: int = ENUMERATION_CEILING
                     ) -> tuple[float, float, int]:
    """Bracket the achievable rate to width ``tol`` if reachable.

    Returns (lower, upper, n_used) at the smallest level whose gap is at
    most ``tol``, or the bracket at ``n_ceiling`` when the gap never closes
    within the ceiling (reported, not an error).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    lower = upper = None
    for j, (lo, up) in enumerate(_level_means(d0.p, d0.e, d0.m, n_ceiling)):
        lower, upper = float(lo[0]), float(up[0])
        if upper - lower <= tol:
            return lower, upper, j
    return lower, upper, n_ceiling


class McBounds(NamedTuple):
    lower: float
    upper: float
    lower_radius: float
    upper_radius: float


def bounds_series_mc(d0: TripleDensity, n: int, samples: int, seed: int) -> McBounds:
    """Monte Carlo estimate of (L_n, U_n) from uniformly drawn sign paths.

    Unbiased sample means with 95% normal-approximation radii; intended for
    levels beyond the enumeration ceiling.
    """
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    rng = np.random.default_rng(seed)
    p = np.full(samples, d0.p)
    e = np.full(samples, d0.e)
    m = np.full(samples, d0.m)
    for _ in range(n):
        take_plus = rng.integers(0, 2, size=samples).astype(bool)
        pm, em, mm = _minus_arrays(p, e, m)
        pp, ep, mp = _plus_arrays(p, e, m)
        p = np.where(take_plus, pp, pm)
        e = np.where(take_plus, ep, em)
        m = np.where(take_plus, mp, mm)
    f = _lower_functional_arrays(p, e, m)
    i = _mutual_info_arrays(p, e, m)
    z95 = 1.959963984540054
    scale = z95 / math.sqrt(samples)
    return McBounds(lower=float(f.mean()), upper=float(i.mean()),
                    lower_radius=float(f.std(ddof=1) * scale),
                    upper_radius=float(i.std(ddof=1) * scale))


# ---------------------------------------------------------------------------
# universal bound and capacity curves

_UNIVERSAL_CHUNK = 4  # starting triples expanded together; bounds peak memory


def _constraint_family(capacity: float, e_grid: int) -> tuple[np.ndarray, ...]:
    """Triples with error rate pinned at (1 - capacity)/2, swept over e."""
    err = (1.0 - capacity) / 2.0
    es = np.linspace(0.0, 2.0 * err, e_grid)
    ps = 1.0 - err - es / 2.0
    ms = np.maximum(err - es / 2.0, 0.0)
    return ps, es, ms


def _final_means(p0, e0, m0, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo = up = None
    for lo, up in _level_means(p0, e0, m0, n, skip_to_last=True):
        pass
    return lo, up


def _universal_bracket(capacity: float, e_grid: int, n: int) -> tuple[float, float]:
    """(min_e L_n, min_e U_n) over the pinned-error-rate family."""
    ps, es, ms = _constraint_family(capacity, e_grid)
    best_lower = math.inf
    best_upper = math.inf
    for start in range(0, ps.size, _UNIVERSAL_CHUNK):
        sl = slice(start, start + _UNIVERSAL_CHUNK)
        lo, up = _final_means(ps[sl], es[sl], ms[sl], n)
        best_lower = min(best_lower, float(lo.min()))
        best_upper = min(best_upper, float(up.min()))
    return best_lower, best_upper


def universal_lower_bound(capacity: float, e_grid: int, n: int) -> float:
    """Channel-independent lower bound on the achievable rate at ``capacity``.

    Every channel of capacity I has error rate at most (1 - I)/2, so the
    infimum of the achievable rate over triples with that exact error rate
    lower-bounds every such channel; L_n lower-bounds each member.  Clamped
    at 0 since rates are nonnegative.
    """
    if not (0.0 <= capacity <= 1.0):
        raise ValueError(f"capacity must be in [0, 1], got {capacity}")
    if e_grid < 1:
        raise ValueError("e_grid must be at least 1")
    lower, _ = _universal_bracket(capacity, e_grid, n)
    return max(lower, 0.0)


def _bsc_for_capacity(target: float) -> BSC:
    if target >= 1.0 - 1e-12:
        return BSC(0.0)
    if target <= 1e-12:
        return BSC(0.5)
    eps = brentq(lambda x: (1.0 - binary_entropy(x)) - target, 1e-15, 0.5,
                 xtol=1e-15, rtol=8.9e-16)
    return BSC(eps)


def _bawgn_for_capacity(target: float) -> BAWGN:
    lo, hi = 0.05, 60.0
    probe = BAWGN(lo).capacity()
    if target >= probe:
        return BAWGN(lo)
    sigma = brentq(lambda s: BAWGN(s).capacity() - target, lo, hi, xtol=1e-9)
    return BAWGN(sigma)


def _capacity_grid(points: int, cap_min: float, cap_max: float) -> np.ndarray:
    if points < 1:
        raise ValueError("points must be at least 1")
    if points == 1:
        return np.array([cap_max])
    return np.linspace(cap_min, cap_max, points)


def curve(family: str, points: int, n: int, *, cap_min: float = 0.01,
          cap_max: float = 0.99, e_grid: int = 33) -> list[tuple[float, float, float]]:
    """Rows (capacity, lower, upper) of the achievable-rate curve.

    ``family`` selects the channel family swept over a uniform capacity
    grid: the erasure family (where the three-level decoder is exact, so
    lower = upper = capacity), the binary symmetric family, the
    binary-input AWGN family, or the channel-independent universal bound.
    Family parameters are solved to each grid capacity by root bracketing
    to 1e-9.  Rates are nonnegative, so emitted lower bounds are clamped
    at zero.
    """
    if family not in CURVE_FAMILIES:
        raise ValueError(f"family must be one of {CURVE_FAMILIES}, got {family!r}")
    rows = []
    for cap in _capacity_grid(points, cap_min, cap_max):
        cap = float(cap)
        if family == "universal":
            lo, up = _universal_bracket(cap, e_grid, n)
            rows.append((cap, max(lo, 0.0), up))
            continue
        if family == "bec":
            ch = BEC(1.0 - cap)
        elif family == "bsc":
            ch = _bsc_for_capacity(cap)
        else:
            ch = _bawgn_for_capacity(cap)
        d0 = ch.triple()
        lo, up = _final_means(d0.p, d0.e, d0.m, n)
        rows.append((cap, max(float(lo[0]), 0.0), float(up[0])))
    return rows
