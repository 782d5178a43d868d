"""Density evolution through the polar computation trees.

For the three-level decoder the message law is a triple (p, e, m) and both
tree transforms have closed forms; for a general uniform quantizer the law
is a finite mass function over the quantizer alphabet and the transforms are
exact push-forwards computed by enumerating all |Q|^2 input pairs.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .channels import LlrDensity, TripleDensity
from .codec import check_llrs
from .quantizer import QuantizerSpec, levels, quantize_index


class ResourceCeilingError(RuntimeError):
    """Requested synthesis exceeds the configured work budget."""


# ---------------------------------------------------------------------------
# three-level transforms

def _plus_arrays(p, e, m):
    """Variable-node transform of i.i.d. triples, vectorized."""
    pp = p * p + 2.0 * p * e
    mp = m * m + 2.0 * e * m
    # erasure mass by complement: equals e**2 + 2pm exactly and keeps
    # p + e + m pinned at 1 through deep recursions
    ep = np.maximum(1.0 - pp - mp, 0.0)
    return pp, ep, mp


def _minus_arrays(p, e, m):
    """Check-node transform of i.i.d. triples, vectorized."""
    pm = p * p + m * m
    mm = 2.0 * p * m
    # complement of 1 - (1-e)**2, see _plus_arrays
    em = np.maximum(1.0 - pm - mm, 0.0)
    return pm, em, mm


def triple_plus(d: TripleDensity) -> TripleDensity:
    """Law of the variable-node output for two i.i.d. copies of ``d``.

    (p, e, m) -> (p^2 + 2pe, e^2 + 2pm, m^2 + 2em)
    """
    p, e, m = _plus_arrays(d.p, d.e, d.m)
    return TripleDensity(float(p), float(e), float(m))


def triple_minus(d: TripleDensity) -> TripleDensity:
    """Law of the check-node output for two i.i.d. copies of ``d``.

    (p, e, m) -> (p^2 + m^2, 1 - (1-e)^2, 2pm)
    """
    p, e, m = _minus_arrays(d.p, d.e, d.m)
    return TripleDensity(float(p), float(e), float(m))


def evolve_triple(d0: TripleDensity, path) -> TripleDensity:
    """Fold the transforms along a tree path b1..bn, level 1 first.

    bj = 1 selects the variable (plus) transform, bj = 0 the check (minus)
    transform.
    """
    d = d0
    for b in path:
        d = triple_plus(d) if b else triple_minus(d)
    return d


# ---------------------------------------------------------------------------
# finite-alphabet transforms

def _density_vector(d: LlrDensity, spec: QuantizerSpec) -> np.ndarray:
    """Mass vector of ``d`` indexed by the alphabet of ``spec``.

    Raises if any atom with positive mass lies outside the alphabet.
    """
    grid = levels(spec)
    vec = np.zeros(spec.n_levels)
    idx = np.searchsorted(grid, d.alphabet)
    ok = (idx < grid.size) & (grid[np.minimum(idx, grid.size - 1)] == d.alphabet)
    if np.any(~ok & (d.probs > 0.0)):
        raise ValueError("density has mass outside the quantizer alphabet")
    np.add.at(vec, idx[ok], d.probs[ok])
    return vec


@functools.lru_cache(maxsize=8)
def _check_index_table(spec: QuantizerSpec) -> np.ndarray:
    """Quantized-level index of the check combine for every level pair."""
    grid = levels(spec)
    a = grid[:, None] * np.ones_like(grid)[None, :]
    b = np.ones_like(grid)[:, None] * grid[None, :]
    return quantize_index(spec, check_llrs(a, b)).astype(np.int32)


def de_var(d1: LlrDensity, d2: LlrDensity, spec: QuantizerSpec) -> LlrDensity:
    """Law of Q(X + Y) for independent X ~ d1, Y ~ d2 on the alphabet of ``spec``.

    Sums of alphabet levels are again multiples of delta, so this is a
    discrete convolution whose tails fold onto the saturation levels.
    """
    v1 = _density_vector(d1, spec)
    v2 = _density_vector(d2, spec)
    conv = np.convolve(v1, v2)  # index k holds mass of sum (k - 2K) * delta
    k = spec.half_levels
    out = conv[k:3 * k + 1].copy()
    out[0] += conv[:k].sum()
    out[-1] += conv[3 * k + 1:].sum()
    return LlrDensity(levels(spec), out)


def de_check(d1: LlrDensity, d2: LlrDensity, spec: QuantizerSpec) -> LlrDensity:
    """Law of Q(2 atanh(tanh(X/2) tanh(Y/2))) by full pair enumeration."""
    v1 = _density_vector(d1, spec)
    v2 = _density_vector(d2, spec)
    table = _check_index_table(spec)
    mass = np.bincount(table.ravel(), weights=np.outer(v1, v2).ravel(),
                       minlength=spec.n_levels)
    return LlrDensity(levels(spec), mass)


def _de_var_vec(rows: np.ndarray, spec: QuantizerSpec) -> np.ndarray:
    k = spec.half_levels
    out = np.empty_like(rows)
    for i in range(rows.shape[0]):
        conv = np.convolve(rows[i], rows[i])
        out[i] = conv[k:3 * k + 1]
        out[i, 0] += conv[:k].sum()
        out[i, -1] += conv[3 * k + 1:].sum()
    return out


def _de_check_vec(rows: np.ndarray, spec: QuantizerSpec) -> np.ndarray:
    table = _check_index_table(spec).ravel()
    out = np.empty_like(rows)
    for i in range(rows.shape[0]):
        outer = np.outer(rows[i], rows[i]).ravel()
        out[i] = np.bincount(table, weights=outer, minlength=spec.n_levels)
    return out


# ---------------------------------------------------------------------------
# synthesized families

@dataclass
class SynthesizedFamily:
    """Root-message laws of all N = 2**n tree channels, in index order.

    ``kind`` is "triple" (rows of (p, e, m)) or "quantized" (rows of masses
    over ``alphabet``).
    """

    n: int
    kind: str
    data: np.ndarray
    alphabet: np.ndarray | None = None

    @property
    def block_length(self) -> int:
        return 1 << self.n

    def density(self, i: int):
        if self.kind == "triple":
            p, e, m = self.data[i]
            return TripleDensity(float(p), float(e), float(m))
        return LlrDensity(self.alphabet, self.data[i])

    def error_probs(self) -> np.ndarray:
        """Pr(root < 0) + Pr(root = 0)/2 for every index."""
        if self.kind == "triple":
            return self.data[:, 2] + 0.5 * self.data[:, 1]
        neg = self.alphabet < 0.0
        zero = self.alphabet == 0.0
        return self.data[:, neg].sum(axis=1) + 0.5 * self.data[:, zero].sum(axis=1)

    def csv_rows(self):
        """Rows (index, p_err[, p, e, m]) with 10 significant digits."""
        perr = self.error_probs()
        if self.kind == "triple":
            yield "index,p_err,p,e,m"
            for i in range(self.block_length):
                p, e, m = self.data[i]
                yield f"{i},{perr[i]:.10g},{p:.10g},{e:.10g},{m:.10g}"
        else:
            yield "index,p_err"
            for i in range(self.block_length):
                yield f"{i},{perr[i]:.10g}"


def synthesize_triples(d0: TripleDensity, n: int) -> SynthesizedFamily:
    """Evolve the three-level law to all N tree channels by level doubling."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = np.array([d0.p])
    e = np.array([d0.e])
    m = np.array([d0.m])
    for _ in range(n):
        pm, em, mm = _minus_arrays(p, e, m)
        pp, ep, mp = _plus_arrays(p, e, m)
        p = _interleave(pm, pp)
        e = _interleave(em, ep)
        m = _interleave(mm, mp)
    return SynthesizedFamily(n=n, kind="triple", data=np.stack([p, e, m], axis=1))


def _interleave(minus_part, plus_part):
    out = np.empty(2 * minus_part.size)
    out[0::2] = minus_part  # appended path bit 0: check level
    out[1::2] = plus_part
    return out


def synthesize(d0: LlrDensity, n: int, spec: QuantizerSpec, *,
               op_budget: float = 1e12) -> SynthesizedFamily:
    """Finite-alphabet density evolution to all N tree channels.

    ``d0`` must already be supported on the alphabet of ``spec`` (quantize it
    first).  Work grows as |Q|^2 N, guarded by ``op_budget`` against
    accidental |Q|^2 N log N blowups.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    cost = float(spec.n_levels) ** 2 * (1 << n) * max(n, 1)
    if cost > op_budget:
        raise ResourceCeilingError(
            f"|Q|^2 N log N = {cost:.3g} exceeds the budget {op_budget:.3g}; "
            "use a coarser quantizer, a smaller n, or raise op_budget")
    rows = _density_vector(d0, spec)[None, :]
    for _ in range(n):
        checks = _de_check_vec(rows, spec)
        vars_ = _de_var_vec(rows, spec)
        nxt = np.empty((2 * rows.shape[0], rows.shape[1]))
        nxt[0::2] = checks
        nxt[1::2] = vars_
        rows = nxt
    return SynthesizedFamily(n=n, kind="quantized", data=rows, alphabet=levels(spec))


def bit_error_prob(density) -> float:
    """Pr(message < 0) + Pr(message = 0)/2 for a root-message law."""
    if isinstance(density, TripleDensity):
        return density.m + 0.5 * density.e
    return density.error_prob()


def choose_info_set(family: SynthesizedFamily, k: int) -> np.ndarray:
    """The ``k`` indices with the smallest error probability, ascending.

    Ties are broken toward the smaller index so constructions are
    reproducible.
    """
    if not (0 <= k <= family.block_length):
        raise ValueError(f"k must be in [0, {family.block_length}], got {k}")
    order = np.argsort(family.error_probs(), kind="stable")
    return np.sort(order[:k])


def rate_for_union_bound(family: SynthesizedFamily, target: float) -> int:
    """Largest k whose k best indices have summed error probability <= target."""
    perr = np.sort(family.error_probs())
    return int(np.searchsorted(np.cumsum(perr), target, side="right"))


def gallager_trajectory(q0: float, path) -> np.ndarray:
    """Single-bit (Gallager) decoder state along a tree path.

    The state is the message error probability: a check level maps
    q -> 2q(1-q) and a variable level leaves q unchanged (two-input majority
    with a fair-coin tie equals q algebraically).  The trajectory never
    decreases, which is why this decoder has threshold zero.
    """
    if not (0.0 <= q0 <= 0.5):
        raise ValueError(f"q0 must be in [0, 1/2], got {q0}")
    out = np.empty(len(path) + 1)
    out[0] = q = q0
    for j, b in enumerate(path, start=1):
        if not b:
            q = 2.0 * q * (1.0 - q)
        out[j] = q
    return out
