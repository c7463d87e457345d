"""Random sampling primitives with reproducible splittable streams.

All randomness in the package flows through RngStream, a value object
keyed by (master_seed, stream_id).  Identical keys reproduce identical
sample sequences bit for bit; distinct stream ids give statistically
independent streams.  Trials of the Monte-Carlo estimators are keyed by
stream id, which makes per-trial work order-independent and lets thread
counts change throughput without changing results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from gaussian_ramsey.analytic import std_normal_cdf, std_normal_pdf


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the origin of this stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))

    def offset(self, k: int) -> "RngStream":
        """The stream k slots further along the same master seed."""
        return RngStream(self.master_seed, self.stream_id + k)


def as_generator(stream: RngStream | np.random.Generator) -> np.random.Generator:
    """Accept either a stream value or a live generator.

    A stream value always yields a generator at its origin; a generator is
    used as-is (and advances), which is how multi-draw trials thread one
    source through several sampling calls.
    """
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


@dataclass(frozen=True)
class TruncatedSpec:
    """One-sided truncation of N(0, 1/d).

    cutoff is in standard-deviation units: side "lower" conditions on
    X >= cutoff/sqrt(d), side "upper" on X <= cutoff/sqrt(d).  A lower
    truncation allows cutoff = -inf (no truncation) and an upper one
    cutoff = +inf; the opposite infinities would condition on a null event
    and are rejected.
    """

    cutoff: float
    side: str
    d: int

    def __post_init__(self) -> None:
        if self.side not in ("lower", "upper"):
            raise ValueError(f"side must be 'lower' or 'upper', got {self.side!r}")
        if self.d < 1:
            raise ValueError(f"variance parameter d must be >= 1, got {self.d}")
        if math.isnan(self.cutoff):
            raise ValueError("cutoff must not be NaN")
        if (self.side == "lower" and self.cutoff == math.inf) or (
            self.side == "upper" and self.cutoff == -math.inf
        ):
            raise ValueError("conditioning event has probability zero")


def sample_normal(stream, variance: float = 1.0, size=None):
    """Draw N(0, variance); scalar when size is None."""
    if variance <= 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    gen = as_generator(stream)
    out = gen.standard_normal(size) * math.sqrt(variance)
    return float(out) if size is None else out


def sample_chi(freedom: int, stream, size=None):
    """Draw sqrt(chi-square with `freedom` degrees of freedom)."""
    if freedom < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {freedom}")
    gen = as_generator(stream)
    out = np.sqrt(gen.chisquare(freedom, size=size))
    return float(out) if size is None else out


def sample_truncated(spec: TruncatedSpec, stream, size=None):
    """Exact one-sided truncated N(0, 1/d) draws via the inverse cdf.

    The conditioned uniform range is mapped through the standard normal
    quantile function, so deep truncations cost the same as shallow ones
    and every draw satisfies the side constraint by construction.
    """
    gen = as_generator(stream)
    u = 1.0 - gen.random(size)  # in (0, 1], keeps the quantile finite
    if spec.side == "lower":
        z = -ndtri(u * ndtr(-spec.cutoff))
    else:
        z = ndtri(u * ndtr(spec.cutoff))
    out = z / math.sqrt(spec.d)
    return float(out) if size is None else out


def truncated_mean(spec: TruncatedSpec) -> float:
    """Closed-form expectation of the one-sided truncated N(0, 1/d).

    lower: +phi(b) / ((1 - Phi(b)) sqrt(d));  upper: -phi(b) / (Phi(b) sqrt(d)).
    """
    b = spec.cutoff
    if math.isinf(b):
        # only the non-degenerate infinities reach here: no truncation
        return 0.0
    root_d = math.sqrt(spec.d)
    if spec.side == "lower":
        # 1 - Phi(b) as Phi(-b): exact by symmetry, no cancellation at large b
        return std_normal_pdf(b) / (std_normal_cdf(-b) * root_d)
    return -std_normal_pdf(b) / (std_normal_cdf(b) * root_d)
