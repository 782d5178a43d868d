"""Seeded Monte Carlo estimation of block and per-index error rates.

Randomness contract: trial t draws its channel observations and its
tie-break coins from the stream seeded by SeedSequence(seed, spawn_key=(t,)),
so any worker can regenerate any trial independently and results do not
depend on how trials are split across workers.  Trials are aggregated with
integer counters in fixed chunk order, which keeps reports bit-identical
for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelModel
from .codec import PolarCode, _sc_batch, encode
from .density_evolution import SynthesizedFamily
from .quantizer import QuantizerSpec, SignQuantizer, quantize, sign_quantize

_Z95 = 1.959963984540054
_CHUNK = 4096  # fixed, so chunked results never depend on worker count


@dataclass
class TrialReport:
    """Outcome of a seeded simulation run."""

    decoder: str
    trials: int
    block_errors: int
    bler: float
    ci95: float
    seed: int
    per_index_errors: np.ndarray | None = field(default=None, repr=False)

    @property
    def per_index_rates(self) -> np.ndarray | None:
        if self.per_index_errors is None:
            return None
        return self.per_index_errors / self.trials

    def csv_row(self, channel: ChannelModel, code: PolarCode) -> str:
        return (f"{self.decoder},{channel.spec_string()},{code.n},"
                f"{code.rate:.10g},{self.trials},{self.seed},"
                f"{self.block_errors},{self.bler:.10g},{self.ci95:.10g}")


TRIAL_CSV_HEADER = "decoder,channel,n,rate,trials,seed,block_errors,bler,ci95"


def _normalize_decoder(decoder):
    """Map a decoder tag to (label, spec-or-None, signs flag)."""
    if decoder == "exact":
        return "exact", None, False
    if decoder == "erasure" or isinstance(decoder, SignQuantizer):
        return "erasure", None, True
    if isinstance(decoder, QuantizerSpec):
        return decoder.spec_string(), decoder, False
    raise ValueError(
        f"decoder must be 'exact', 'erasure' or a QuantizerSpec, got {decoder!r}")


def _trial_stream(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _run_chunk(code, channel, spec, signs, seed, start, stop, genie,
               random_messages=False):
    size = code.block_length
    batch = stop - start
    llrs = np.empty((batch, size))
    ties = np.empty((batch, size), dtype=np.uint8)
    messages = None
    if random_messages:
        messages = np.zeros((batch, size), dtype=np.uint8)
    info = code.info_indices()
    for row, trial in enumerate(range(start, stop)):
        rng = _trial_stream(seed, trial)
        llrs[row] = channel.sample_llr(rng, size=size)
        ties[row] = rng.integers(0, 2, size=size, dtype=np.uint8)
        if random_messages and info.size:
            messages[row, info] = rng.integers(0, 2, size=info.size, dtype=np.uint8)
    if random_messages:
        # by channel symmetry a transmitted 1 mirrors the all-zero LLR law
        llrs *= 1.0 - 2.0 * encode(messages)
    if signs:
        inputs = np.sign(sign_quantize(llrs)).astype(np.int8)
    elif spec is not None:
        inputs = quantize(spec, llrs)
    else:
        inputs = llrs
    u_hat, _, errors = _sc_batch(inputs, code, ties, spec=spec, signs=signs,
                                 genie=genie)
    if genie:
        wrong = errors[:, info].any(axis=1) if info.size else np.zeros(batch, bool)
        return int(wrong.sum()), errors.sum(axis=0).astype(np.int64)
    reference = messages if random_messages else 0
    wrong = ((u_hat != reference)[:, info].any(axis=1) if info.size
             else np.zeros(batch, bool))
    return int(wrong.sum()), None


def _ci95(block_errors: int, trials: int) -> float:
    # one pseudo-error floors the radius when no errors were observed
    p = max(block_errors, 1) / trials
    return _Z95 * math.sqrt(p * (1.0 - p) / trials)


def _simulate(code, channel, decoder, trials, seed, genie, threads,
              random_messages=False):
    if trials < 1:
        raise ValueError("trials must be at least 1")
    label, spec, signs = _normalize_decoder(decoder)
    chunks = [(start, min(start + _CHUNK, trials)) for start in range(0, trials, _CHUNK)]

    def work(bounds):
        return _run_chunk(code, channel, spec, signs, seed, bounds[0], bounds[1],
                          genie, random_messages=random_messages)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]

    block_errors = sum(r[0] for r in results)
    per_index = None
    if genie:
        per_index = np.zeros(code.block_length, dtype=np.int64)
        for _, counts in results:
            per_index += counts
    return TrialReport(
        decoder=label,
        trials=trials,
        block_errors=block_errors,
        bler=block_errors / trials,
        ci95=_ci95(block_errors, trials),
        seed=seed,
        per_index_errors=per_index,
    )


def simulate_block_error(code: PolarCode, channel: ChannelModel, decoder,
                         trials: int, seed: int, *, threads: int = 1,
                         random_messages: bool = False) -> TrialReport:
    """Estimate the block-error rate of ``decoder`` on ``channel``.

    Transmits the all-zero codeword (the code is linear, the channel and the
    decoders symmetric, so this is lossless) and counts a block error
    whenever any information bit is decided wrong.  The erasure decoder's
    inputs are sign-quantized and the uniform quantizer is applied for a
    QuantizerSpec decoder automatically.

    ``random_messages`` encodes a random word per trial and flips the LLR
    signs accordingly; it exists as a symmetry sanity check and is not used
    by any golden test.
    """
    return _simulate(code, channel, decoder, trials, seed, genie=False,
                     threads=threads, random_messages=random_messages)


def genie_bit_errors(code: PolarCode, channel: ChannelModel, decoder,
                     trials: int, seed: int, *, threads: int = 1) -> TrialReport:
    """Per-index error rates with all prior decisions forced correct.

    Every index is evaluated (frozen or not); the report carries the error
    counts per index, with ``per_index_rates`` the empirical genie-aided
    error probabilities, and block statistics over the information set.
    """
    return _simulate(code, channel, decoder, trials, seed, genie=True,
                     threads=threads)


def union_bound(family: SynthesizedFamily, info_set) -> float:
    """Sum of the per-index error probabilities over ``info_set``.

    Upper-bounds the genie-aided block-error probability of the code using
    those indices.
    """
    idx = np.asarray(sorted(int(i) for i in info_set), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    if idx[0] < 0 or idx[-1] >= family.block_length:
        raise ValueError("information index out of range")
    return float(family.error_probs()[idx].sum())
