"""Polar encoder and successive-cancellation decoders.

The generator matrix is the n-th Kronecker power of [[1,0],[1,1]] with rows
in natural order (no bit-reversal).  For bit index i with binary expansion
b1..bn (b1 most significant), the decision statistic is produced by a depth-n
computation tree whose level j applies a check combine when bj = 0 and a
variable combine when bj = 1; level 1 acts directly on the channel LLRs.

Three decoders share that control flow and differ only in the node algebra:

* ``sc_decode``          exact LLR arithmetic (tanh rule), saturating infinities
* ``quantized_sc_decode`` every node output passed through a uniform quantizer
* ``erasure_sc_decode``   the three-symbol algebra on {-inf, 0, +inf}

A decoder draws one fair tie-break coin per bit index up front, so two
decoders fed the same generator state consume identical randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import INF
from .quantizer import QuantizerSpec, quantize


@dataclass(frozen=True)
class PolarCode:
    """Block exponent ``n`` (N = 2**n) plus the information index set."""

    n: int
    info_set: frozenset = field(default_factory=frozenset)
    frozen_value: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"block exponent must be nonnegative, got {self.n}")
        info = frozenset(int(i) for i in self.info_set)
        if any(i < 0 or i >= self.block_length for i in info):
            raise ValueError("information index out of range")
        if self.frozen_value != 0:
            raise ValueError("frozen bits are fixed to 0")
        object.__setattr__(self, "info_set", info)

    @property
    def block_length(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return len(self.info_set) / self.block_length

    def info_indices(self) -> np.ndarray:
        return np.array(sorted(self.info_set), dtype=np.int64)

    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.block_length, dtype=bool)
        if self.info_set:
            mask[self.info_indices()] = True
        return mask


def index_to_path(i: int, n: int) -> tuple[int, ...]:
    """Binary expansion b1..bn of ``i``, most significant bit first."""
    if not (0 <= i < (1 << n)):
        raise ValueError(f"index {i} out of range for n={n}")
    return tuple((i >> (n - 1 - j)) & 1 for j in range(n))


def encode(u, n: int | None = None) -> np.ndarray:
    """Multiply ``u`` by the polar generator matrix over GF(2).

    Accepts a batch in the leading axes; the codeword axis is the last one.
    The butterfly recursion applies the 2x2 kernel along every bit axis,
    which is an O(N log N) evaluation of u @ G.
    """
    x = np.array(u, dtype=np.uint8) & 1
    size = x.shape[-1]
    if n is None:
        n = int(size).bit_length() - 1
    if size != (1 << n):
        raise ValueError(f"input length {size} is not 2**{n}")
    half = 1
    while half < size:
        step = 2 * half
        for start in range(0, size, step):
            x[..., start:start + half] ^= x[..., start + half:start + step]
        half = step
    return x


# ---------------------------------------------------------------------------
# node algebras


def check_llrs(a, b):
    """Exact check combine 2*atanh(tanh(a/2)*tanh(b/2)), batched and safe.

    Evaluated as sign(a)sign(b)min(|a|,|b|) plus the two log1p correction
    terms, which is the same function written without overflow; infinities
    follow their analytic limits and zero absorbs.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    base = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    finite = np.isfinite(a) & np.isfinite(b) & (a != 0.0) & (b != 0.0)
    if np.any(finite):
        af = a[finite]
        bf = b[finite]
        corr = np.log1p(np.exp(-np.abs(af + bf))) - np.log1p(np.exp(-np.abs(af - bf)))
        out = base
        out[finite] += corr
        return out
    return base


def var_llrs(a, b, flip):
    """Variable combine b + (-1)**flip * a with inf + (-inf) = 0."""
    s = np.where(flip, -np.asarray(a, dtype=float), a)
    with np.errstate(invalid="ignore"):  # opposite infinities cancel to 0
        out = np.asarray(b, dtype=float) + s
    bad = np.isnan(out)
    if np.any(bad):
        out = np.where(bad, 0.0, out)
    return out


def _check_signs(a, b):
    return a * b


def _var_signs(a, b, flip):
    s = np.where(flip, -a, a)
    return np.sign(b + s).astype(np.int8)


# ---------------------------------------------------------------------------
# batched successive cancellation


def _sc_batch(llrs, code: PolarCode, tie_bits, *, spec: QuantizerSpec | None = None,
              signs: bool = False, genie: bool = False):
    """Run SC decoding on a (trials, N) batch.

    Returns (u_hat, roots, errors): hard decisions, root decision statistics
    and, in genie mode, the per-index would-be-error indicators under the
    all-zero transmission with prior decisions forced correct.
    """
    llrs = np.ascontiguousarray(llrs)
    batch, size = llrs.shape
    if size != code.block_length:
        raise ValueError(f"expected {code.block_length} channel values, got {size}")
    if tie_bits.shape != (batch, size):
        raise ValueError("tie_bits must match the LLR batch shape")

    if signs:
        fcheck, fvar = _check_signs, _var_signs
    elif spec is not None:
        fcheck = lambda a, b: quantize(spec, check_llrs(a, b))
        fvar = lambda a, b, flip: quantize(spec, var_llrs(a, b, flip))
    else:
        fcheck, fvar = check_llrs, var_llrs

    info_mask = code.info_mask()
    u_hat = np.zeros((batch, size), dtype=np.uint8)
    roots = np.empty((batch, size), dtype=llrs.dtype)
    errors = np.zeros((batch, size), dtype=bool) if genie else None

    def descend(block, base):
        width = block.shape[1]
        if width == 1:
            i = base
            stat = block[:, 0]
            roots[:, i] = stat
            hard = (stat < 0) | ((stat == 0) & (tie_bits[:, i] == 1))
            if genie:
                errors[:, i] = hard
                return u_hat[:, i:i + 1]  # stays 0: prior decisions forced correct
            if info_mask[i]:
                u_hat[:, i] = hard
            return u_hat[:, i:i + 1]
        half = width // 2
        a = block[:, :half]
        b = block[:, half:]
        x_left = descend(fcheck(a, b), base)
        x_right = descend(fvar(a, b, x_left.astype(bool)), base + half)
        return np.concatenate([x_left ^ x_right, x_right], axis=1)

    descend(llrs, 0)
    return u_hat, roots, errors


def _draw_tie_bits(rng, batch, size):
    return rng.integers(0, 2, size=(batch, size), dtype=np.uint8)


def sc_decode(llrs, code: PolarCode, rng: np.random.Generator):
    """Exact successive-cancellation decoding of one word.

    Frozen indices are forced to 0; information indices take the sign of the
    root statistic, an exact zero being resolved by a fair coin from ``rng``.
    Returns the decision vector and the per-index root statistics.
    """
    llrs = np.asarray(llrs, dtype=float).reshape(1, -1)
    tie = _draw_tie_bits(rng, 1, llrs.shape[1])
    u_hat, roots, _ = _sc_batch(llrs, code, tie)
    return u_hat[0], roots[0]


def quantized_sc_decode(llrs, code: PolarCode, spec: QuantizerSpec,
                        rng: np.random.Generator):
    """SC decoding with every computation output quantized by ``spec``.

    Raw channel LLRs are quantized on entry, so pre-quantized input passes
    through unchanged.
    """
    llrs = quantize(spec, np.asarray(llrs, dtype=float)).reshape(1, -1)
    tie = _draw_tie_bits(rng, 1, llrs.shape[1])
    u_hat, roots, _ = _sc_batch(llrs, code, tie, spec=spec)
    return u_hat[0], roots[0]


def erasure_sc_decode(signs, code: PolarCode, rng: np.random.Generator):
    """SC decoding over the three-symbol algebra {-inf, 0, +inf}.

    Check nodes multiply signs (0 absorbs), variable nodes use saturating
    addition where opposite infinities cancel.  Inputs must already be
    sign-quantized.
    """
    signs = np.asarray(signs, dtype=float).reshape(1, -1)
    valid = (signs == 0.0) | (signs == INF) | (signs == -INF)
    if not np.all(valid):
        raise ValueError("erasure decoder inputs must lie in {-inf, 0, +inf}")
    compact = np.sign(signs).astype(np.int8)
    tie = _draw_tie_bits(rng, 1, signs.shape[1])
    u_hat, _, _ = _sc_batch(compact, code, tie, signs=True)
    return u_hat[0]
