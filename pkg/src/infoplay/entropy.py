"""Shannon information measures on discrete distributions and LLR blocks.

Conventions shared by every module in this package:

* Log-likelihood ratios (LLRs) are natural-log, ``ln P(bit=0)/P(bit=1)``,
  so a positive LLR favors bit 0 (BPSK symbol +1).
* LLR magnitudes are clamped to ``LLR_CLAMP`` (50 natural-log units);
  beyond that the bit probabilities are indistinguishable from 0/1 in
  double precision.
* Entropies and plug-in mutual information are reported in bits.
  LLR-based information measures are normalized to [0, 1].
* ``0 log 0 = 0`` everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ValidationError

LLR_CLAMP = 50.0

_LN2 = np.log(2.0)
_PROB_SUM_TOL = 1e-9


def _seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int-like seed or a pre-spawned SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _as_bits(x) -> np.ndarray:
    bits = np.asarray(x)
    if bits.ndim != 1:
        raise ValidationError("bit vector must be one-dimensional")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValidationError("bit vector entries must be 0 or 1")
    return bits.astype(np.int8)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """A probability mass function over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("distribution must be a non-empty 1-D vector")
        if not np.isfinite(p).all() or (p < 0).any():
            raise ValidationError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > _PROB_SUM_TOL:
            raise ValidationError(
                f"probabilities must sum to 1 within {_PROB_SUM_TOL}, got {p.sum()!r}"
            )
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True, eq=False)
class JointCounts:
    """Empirical co-occurrence counts of two discrete variables.

    Rows index the first variable, columns the second.  Labels are
    optional and purely descriptive.
    """

    counts: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.size == 0:
            raise ValidationError("counts must be a non-empty 2-D table")
        if not np.issubdtype(c.dtype, np.integer):
            rounded = np.rint(c)
            if not np.isfinite(c).all() or (np.abs(c - rounded) > 0).any():
                raise ValidationError("counts must be integers")
            c = rounded.astype(np.int64)
        if (c < 0).any():
            raise ValidationError("counts must be non-negative")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def transpose(self) -> "JointCounts":
        return JointCounts(self.counts.T, self.col_labels, self.row_labels)


@dataclass(frozen=True, eq=False)
class LlrBlock:
    """A block of LLRs together with the ground-truth bits they refer to.

    LLRs are clamped to ``±LLR_CLAMP`` on construction.
    """

    llrs: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        llrs = np.clip(np.asarray(self.llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP)
        truth = _as_bits(self.truth)
        if llrs.ndim != 1 or llrs.size != truth.size:
            raise ValidationError("llrs and truth must be 1-D vectors of equal length")
        if not np.isfinite(llrs).all():
            raise ValidationError("llrs must be finite (NaN not representable)")
        object.__setattr__(self, "llrs", llrs)
        object.__setattr__(self, "truth", truth)

    def __len__(self) -> int:
        return self.llrs.size


@dataclass(frozen=True)
class MutualInfo:
    """A mutual-information value tagged with its unit.

    ``bits`` is unbounded above (by the alphabet), ``normalized`` lives in
    [0, 1].  Downstream comparisons require matching units.
    """

    value: float
    unit: str

    def __post_init__(self):
        if self.unit not in ("bits", "normalized"):
            raise ValidationError(f"unknown MI unit {self.unit!r}")
        if not np.isfinite(self.value) or self.value < -1e-12:
            raise ValidationError("MI value must be finite and non-negative")
        if self.unit == "normalized" and self.value > 1.0 + 1e-12:
            raise ValidationError("normalized MI must not exceed 1")
        object.__setattr__(self, "value", float(max(self.value, 0.0)))


def shannon_entropy(dist) -> float:
    """Entropy in bits of a discrete distribution (0 log 0 = 0)."""
    if not isinstance(dist, DiscreteDistribution):
        dist = DiscreteDistribution(np.asarray(dist, dtype=float))
    p = dist.probs[dist.probs > 0]
    return float(max(-(p * np.log2(p)).sum(), 0.0))


def binary_entropy(p: float) -> float:
    """H_b(p) in bits; symmetric around p = 1/2."""
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"p must lie in [0, 1], got {p!r}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def mutual_information_plugin(joint, correction: str | None = None) -> MutualInfo:
    """Plug-in (maximum-likelihood) mutual information of a count table, in bits.

    ``correction="miller_madow"`` adds the first-order Miller-Madow bias
    correction; the default is the uncorrected ML estimate so results stay
    comparable to closed forms at large sample sizes.
    """
    if not isinstance(joint, JointCounts):
        joint = JointCounts(np.asarray(joint))
    n = joint.total
    if n < 1:
        raise ValidationError("joint counts are empty: total count must be >= 1")
    p = joint.counts / n
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    outer = np.outer(px, py)
    info = float((p[nz] * np.log2(p[nz] / outer[nz])).sum())
    if correction == "miller_madow":
        m_x = int((px > 0).sum())
        m_y = int((py > 0).sum())
        m_xy = int(nz.sum())
        info += ((m_x - 1) + (m_y - 1) - (m_xy - 1)) / (2.0 * n * _LN2)
    elif correction is not None:
        raise ValidationError(f"unknown correction {correction!r}")
    return MutualInfo(max(info, 0.0), "bits")


def _llr_information(llrs: np.ndarray, truth: np.ndarray) -> float:
    # ergodic estimator: I = 1 - E[log2(1 + exp(-x*L))], x = +1 for bit 0
    x = 1.0 - 2.0 * truth
    terms = np.logaddexp(0.0, -x * llrs) / _LN2
    return float(min(max(1.0 - terms.mean(), 0.0), 1.0))


def mi_from_llrs(block: LlrBlock) -> MutualInfo:
    """Normalized information content of an LLR block, via the ergodic
    (time-average) estimator over the known transmitted bits."""
    if len(block) == 0:
        raise ValidationError("LLR block is empty")
    return MutualInfo(_llr_information(block.llrs, block.truth), "normalized")


_LEGGAUSS_NODES, _LEGGAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gaussian_softplus_expectation(mu: float, sigma: float, panels: int) -> float:
    # E[ln(1 + e^-L)] for L ~ N(mu, sigma^2), composite Gauss-Legendre
    # over mu +- 10 sigma (tail mass beyond that is ~1e-22 of the value)
    edges = np.linspace(mu - 10.0 * sigma, mu + 10.0 * sigma, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    centers = edges[:-1] + half
    nodes = centers[:, None] + half * _LEGGAUSS_NODES[None, :]
    pdf = np.exp(-((nodes - mu) ** 2) / (2.0 * sigma * sigma)) / (
        sigma * np.sqrt(2.0 * np.pi)
    )
    vals = pdf * np.logaddexp(0.0, -nodes)
    return float((vals @ _LEGGAUSS_WEIGHTS).sum() * half)


def j_function(sigma: float) -> float:
    """Information content J(sigma) of consistent-Gaussian LLRs N(sigma^2/2, sigma^2).

    Computed by adaptive panel-doubling Gaussian quadrature over +-10
    sigma, so the value is self-validating (no polynomial fit involved).
    Strictly increasing, J(0) = 0, J(sigma) -> 1.
    """
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma!r}")
    if sigma == 0.0:
        return 0.0
    mu = sigma * sigma / 2.0
    val = prev = None
    for panels in (8, 16, 32, 64, 128, 256):
        val = 1.0 - _gaussian_softplus_expectation(mu, sigma, panels) / _LN2
        if prev is not None and abs(val - prev) < 1e-13:
            break
        prev = val
    return float(min(max(val, 0.0), 1.0))


def j_inverse(i: float) -> float:
    """The sigma with J(sigma) = i, by bracketed root search (|J - i| <= 1e-8)."""
    if not (0.0 <= i < 1.0):
        raise ValidationError(f"i must lie in [0, 1) (sigma is unbounded at 1), got {i!r}")
    if i == 0.0:
        return 0.0
    hi = 1.0
    while j_function(hi) < i:
        hi *= 2.0
        if hi > 256.0:  # J(256) is 1 to double precision; unreachable for i < 1
            raise ValidationError(f"no finite sigma reaches J(sigma) = {i!r}")
    return float(optimize.brentq(lambda s: j_function(s) - i, 0.0, hi, xtol=1e-13))


def sample_consistent_gaussian_apriori(truth, ia: float, seed) -> LlrBlock:
    """Synthesize a-priori LLRs with information content ``ia`` for the given bits.

    Draws L = (sigma^2/2) x + N(0, sigma^2) with sigma = J^-1(ia) and
    x = +1 for bit 0 / -1 for bit 1; deterministic for a fixed seed.
    """
    bits = _as_bits(truth)
    if not (0.0 <= ia < 1.0):
        raise ValidationError(f"ia must lie in [0, 1), got {ia!r}")
    sigma = j_inverse(ia)
    rng = np.random.default_rng(seed)
    x = 1.0 - 2.0 * bits
    llrs = (sigma * sigma / 2.0) * x + rng.normal(0.0, sigma, size=bits.size)
    return LlrBlock(llrs, bits)
