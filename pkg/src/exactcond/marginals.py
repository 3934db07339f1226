"""Distribution building blocks and the counted uniform source.

Every sampler in this package draws randomness exclusively through
:class:`CountingRng`, which hands out uniforms from a single seeded stream
and counts each one consumed.  The number of uniform(0,1) draws is the cost
unit reported by the benchmarking layer, so sampling routines here are
written directly in terms of uniforms rather than delegating to library
variate generators:

* discrete marginals consume exactly one uniform per variate (inversion),
* Exponential and UniformReal consume one uniform per variate,
* Normal and AbsWeightedGaussian consume exactly two,
* Beta uses a two-gamma construction whose draw count is random; only
  totals are meaningful for it.

Each discrete marginal exposes ``pmf``, ``max_pmf`` (argmax and value, the
smaller argmax on ties) and ``sample``.  Each continuous marginal exposes
``pdf``, ``sup_pdf`` and ``sample``.  Both kinds expose ``in_support``,
used by the completion solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import UnboundedDensity

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, index: int) -> int:
    """Mix a base seed with a worker index into an independent 64-bit seed.

    SplitMix64 finalizer applied to seed + (index+1) * golden-ratio-odd.
    Used to shard work across parallel workers deterministically.
    """
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class CountingRng:
    """Seeded uniform(0,1) source that counts every draw.

    The stream is a PCG64 double sequence; the j-th uniform consumed is
    always the j-th double of the stream regardless of whether it was
    requested through ``uniform`` or ``uniforms``, so a run is reproduced
    exactly by replaying the same seed and call pattern.  ``calls`` is the
    number of uniforms consumed so far.
    """

    _BLOCK = 4096

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self._buf = np.empty(0)
        self._pos = 0
        self.calls = 0

    def uniform(self) -> float:
        if self._pos >= self._buf.shape[0]:
            self._buf = self._gen.random(self._BLOCK)
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        self.calls += 1
        return float(v)

    def uniforms(self, count: int) -> np.ndarray:
        """Vector of ``count`` uniforms, in stream order."""
        out = np.empty(count)
        have = self._buf.shape[0] - self._pos
        take = min(have, count)
        if take > 0:
            out[:take] = self._buf[self._pos:self._pos + take]
            self._pos += take
        if count > take:
            out[take:] = self._gen.random(count - take)
        self.calls += count
        return out


def _standard_normal(rng: CountingRng) -> float:
    # Box-Muller, two uniforms, spare discarded to keep draw counts fixed.
    u1 = rng.uniform()
    u2 = rng.uniform()
    r = math.sqrt(-2.0 * math.log1p(-u1))
    return r * math.cos(2.0 * math.pi * u2)


def _gamma_variate(shape: float, rng: CountingRng) -> float:
    # Marsaglia-Tsang for shape >= 1, boosted by U^(1/shape) below 1.
    if shape < 1.0:
        return _gamma_variate(shape + 1.0, rng) * rng.uniform() ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _standard_normal(rng)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.uniform()
        if u == 0.0:
            continue
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            return d * v


class DiscreteMarginal:
    """Common surface of the integer-valued marginals."""

    def pmf(self, k: int) -> float:
        raise NotImplementedError

    def max_pmf(self) -> tuple[int, float]:
        """Mode and its mass; the smaller argmax on ties."""
        raise NotImplementedError

    def sample(self, rng: CountingRng) -> int:
        raise NotImplementedError

    def support_bounds(self) -> tuple[int, int | None]:
        """Inclusive lower and upper bound of the support; None if unbounded."""
        raise NotImplementedError

    def in_support(self, k: int) -> bool:
        lo, hi = self.support_bounds()
        return k >= lo and (hi is None or k <= hi)

    def support_iter(self) -> Iterator[int]:
        lo, hi = self.support_bounds()
        k = lo
        while hi is None or k <= hi:
            yield k
            k += 1


class ContinuousMarginal:
    """Common surface of the real-valued marginals."""

    def pdf(self, y: float) -> float:
        raise NotImplementedError

    def sup_pdf(self) -> float:
        raise NotImplementedError

    def sample(self, rng: CountingRng) -> float:
        raise NotImplementedError

    def in_support(self, y: float) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Geometric(DiscreteMarginal):
    """P(k) = ratio^k (1 - ratio) on k = 0, 1, 2, ..."""

    ratio: float

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"geometric ratio must lie in (0,1), got {self.ratio}")

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return self.ratio ** k * (1.0 - self.ratio)

    def max_pmf(self) -> tuple[int, float]:
        return 0, 1.0 - self.ratio

    def sample(self, rng: CountingRng) -> int:
        # closed-form inversion of the geometric cdf, one uniform
        u = rng.uniform()
        return int(math.log1p(-u) // math.log(self.ratio))

    def support_bounds(self) -> tuple[int, int | None]:
        return 0, None


@dataclass(frozen=True)
class Poisson(DiscreteMarginal):
    """P(k) = e^-rate rate^k / k!.  rate = 0 degenerates to the point mass at 0.

    Rates up to a few hundred are sampled by one-uniform cdf inversion; a
    larger rate is split into independent halves (the split count depends
    only on the rate, so draw counts stay deterministic).
    """

    rate: float

    _SCAN_LIMIT = 600.0

    def __post_init__(self):
        if self.rate < 0.0 or not math.isfinite(self.rate):
            raise ValueError(f"poisson rate must be finite and >= 0, got {self.rate}")

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        if self.rate == 0.0:
            return 1.0 if k == 0 else 0.0
        return math.exp(k * math.log(self.rate) - self.rate - math.lgamma(k + 1))

    def max_pmf(self) -> tuple[int, float]:
        k = max(0, math.ceil(self.rate) - 1)
        return k, self.pmf(k)

    def sample(self, rng: CountingRng) -> int:
        if self.rate <= self._SCAN_LIMIT:
            return self._scan(self.rate, rng)
        pieces = 1 << math.ceil(math.log2(self.rate / self._SCAN_LIMIT))
        part = self.rate / pieces
        return sum(self._scan(part, rng) for _ in range(pieces))

    @staticmethod
    def _scan(rate: float, rng: CountingRng) -> int:
        u = rng.uniform()
        k = 0
        p = math.exp(-rate)
        cdf = p
        while u > cdf:
            if p == 0.0:
                break  # cdf saturated in float; tail mass below resolution
            k += 1
            p *= rate / k
            cdf += p
        return k

    def support_bounds(self) -> tuple[int, int | None]:
        if self.rate == 0.0:
            return 0, 0
        return 0, None


@dataclass(frozen=True)
class Bernoulli(DiscreteMarginal):
    """P(1) = success, P(0) = 1 - success."""

    success: float

    def __post_init__(self):
        if not 0.0 < self.success < 1.0:
            raise ValueError(f"bernoulli success must lie in (0,1), got {self.success}")

    def pmf(self, k: int) -> float:
        if k == 1:
            return self.success
        if k == 0:
            return 1.0 - self.success
        return 0.0

    def max_pmf(self) -> tuple[int, float]:
        if self.success > 0.5:
            return 1, self.success
        return 0, 1.0 - self.success

    def sample(self, rng: CountingRng) -> int:
        return 0 if rng.uniform() < 1.0 - self.success else 1

    def support_bounds(self) -> tuple[int, int | None]:
        return 0, 1


@dataclass(frozen=True)
class Binomial(DiscreteMarginal):
    """Binomial(trials, success) on k = 0..trials."""

    trials: int
    success: float

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"binomial needs >= 1 trial, got {self.trials}")
        if not 0.0 < self.success < 1.0:
            raise ValueError(f"binomial success must lie in (0,1), got {self.success}")

    def pmf(self, k: int) -> float:
        m, p = self.trials, self.success
        if k < 0 or k > m:
            return 0.0
        log_p = (
            math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)
            + k * math.log(p) + (m - k) * math.log1p(-p)
        )
        return math.exp(log_p)

    def max_pmf(self) -> tuple[int, float]:
        edge = (self.trials + 1) * self.success
        k = math.floor(edge)
        if k == edge and k >= 1:
            k -= 1  # tie with k-1; report the smaller argmax
        k = min(max(k, 0), self.trials)
        return k, self.pmf(k)

    def sample(self, rng: CountingRng) -> int:
        u = rng.uniform()
        m, p = self.trials, self.success
        q = p / (1.0 - p)
        mass = (1.0 - p) ** m
        cdf = mass
        k = 0
        while u > cdf and k < m:
            mass *= q * (m - k) / (k + 1)
            k += 1
            cdf += mass
        return k

    def support_bounds(self) -> tuple[int, int | None]:
        return 0, self.trials


@dataclass(frozen=True)
class NegativeBinomial(DiscreteMarginal):
    """P(k) = C(blocks+k-1, k) (1-ratio)^blocks ratio^k on k >= 0.

    Counts failures before the blocks-th success; mode floor((blocks-1)
    ratio / (1-ratio)).
    """

    blocks: int
    ratio: float

    def __post_init__(self):
        if self.blocks < 1:
            raise ValueError(f"negative binomial needs >= 1 block, got {self.blocks}")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"negative binomial ratio must lie in (0,1), got {self.ratio}")

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        m, x = self.blocks, self.ratio
        log_p = (
            math.lgamma(m + k) - math.lgamma(k + 1) - math.lgamma(m)
            + m * math.log1p(-x) + k * math.log(x)
        )
        return math.exp(log_p)

    def max_pmf(self) -> tuple[int, float]:
        edge = (self.blocks - 1) * self.ratio / (1.0 - self.ratio)
        k = math.floor(edge)
        if k == edge and k >= 1:
            k -= 1
        return k, self.pmf(k)

    def sample(self, rng: CountingRng) -> int:
        u = rng.uniform()
        m, x = self.blocks, self.ratio
        mass = math.exp(m * math.log1p(-x))
        cdf = mass
        k = 0
        while u > cdf:
            if mass == 0.0:
                break
            mass *= x * (m + k) / (k + 1)
            k += 1
            cdf += mass
        return k

    def support_bounds(self) -> tuple[int, int | None]:
        return 0, None


@dataclass(frozen=True)
class UniformInt(DiscreteMarginal):
    """Uniform on the integers lo..hi inclusive."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"empty integer range [{self.lo}, {self.hi}]")

    def pmf(self, k: int) -> float:
        if self.lo <= k <= self.hi:
            return 1.0 / (self.hi - self.lo + 1)
        return 0.0

    def max_pmf(self) -> tuple[int, float]:
        return self.lo, 1.0 / (self.hi - self.lo + 1)

    def sample(self, rng: CountingRng) -> int:
        span = self.hi - self.lo + 1
        k = self.lo + int(rng.uniform() * span)
        return min(k, self.hi)

    def support_bounds(self) -> tuple[int, int | None]:
        return self.lo, self.hi


@dataclass(frozen=True)
class SignedUnit(DiscreteMarginal):
    """Uniform on {-1, +1}."""

    def pmf(self, k: int) -> float:
        return 0.5 if k in (-1, 1) else 0.0

    def max_pmf(self) -> tuple[int, float]:
        return -1, 0.5

    def sample(self, rng: CountingRng) -> int:
        return -1 if rng.uniform() < 0.5 else 1

    def support_bounds(self) -> tuple[int, int | None]:
        return -1, 1

    def in_support(self, k: int) -> bool:
        return k == -1 or k == 1

    def support_iter(self) -> Iterator[int]:
        yield -1
        yield 1


@dataclass(frozen=True)
class UniformReal(ContinuousMarginal):
    """Uniform density on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError(f"empty real interval [{self.lo}, {self.hi}]")

    def pdf(self, y: float) -> float:
        if self.lo <= y <= self.hi:
            return 1.0 / (self.hi - self.lo)
        return 0.0

    def sup_pdf(self) -> float:
        return 1.0 / (self.hi - self.lo)

    def sample(self, rng: CountingRng) -> float:
        return self.lo + (self.hi - self.lo) * rng.uniform()

    def in_support(self, y: float) -> bool:
        return self.lo <= y <= self.hi


@dataclass(frozen=True)
class Exponential(ContinuousMarginal):
    """Density rate e^(-rate y) on y >= 0."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate}")

    def pdf(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        return self.rate * math.exp(-self.rate * y)

    def sup_pdf(self) -> float:
        return self.rate

    def sample(self, rng: CountingRng) -> float:
        return -math.log1p(-rng.uniform()) / self.rate

    def in_support(self, y: float) -> bool:
        return y >= 0.0


@dataclass(frozen=True)
class Beta(ContinuousMarginal):
    """Beta(alpha, beta) on (0, 1).

    sup_pdf is the density value at the interior mode
    (alpha-1)/(alpha+beta-2) and exists only for alpha >= 1, beta >= 1
    (the density is unbounded otherwise).  Sampling uses the two-gamma
    construction G1/(G1+G2), so its uniform consumption is random.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError(f"beta parameters must be > 0, got ({self.alpha}, {self.beta})")

    def _log_norm(self) -> float:
        return math.lgamma(self.alpha + self.beta) - math.lgamma(self.alpha) - math.lgamma(self.beta)

    def pdf(self, y: float) -> float:
        a, b = self.alpha, self.beta
        if y < 0.0 or y > 1.0:
            return 0.0
        if y == 0.0:
            if a > 1.0:
                return 0.0
            return math.exp(self._log_norm()) if a == 1.0 else math.inf
        if y == 1.0:
            if b > 1.0:
                return 0.0
            return math.exp(self._log_norm()) if b == 1.0 else math.inf
        return math.exp(self._log_norm() + (a - 1.0) * math.log(y) + (b - 1.0) * math.log1p(-y))

    def sup_pdf(self) -> float:
        a, b = self.alpha, self.beta
        if a < 1.0 or b < 1.0:
            raise UnboundedDensity(f"Beta({a}, {b}) density is unbounded")
        if a == 1.0 and b == 1.0:
            return 1.0
        mode = (a - 1.0) / (a + b - 2.0)
        return self.pdf(mode)

    def sample(self, rng: CountingRng) -> float:
        g1 = _gamma_variate(self.alpha, rng)
        g2 = _gamma_variate(self.beta, rng)
        return g1 / (g1 + g2)

    def in_support(self, y: float) -> bool:
        return 0.0 < y < 1.0


@dataclass(frozen=True)
class Normal(ContinuousMarginal):
    """Gaussian with the given mean and variance; two uniforms per draw."""

    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance > 0.0:
            raise ValueError(f"normal variance must be > 0, got {self.variance}")

    def pdf(self, y: float) -> float:
        z = (y - self.mean) ** 2 / (2.0 * self.variance)
        return math.exp(-z) / math.sqrt(2.0 * math.pi * self.variance)

    def sup_pdf(self) -> float:
        return 1.0 / math.sqrt(2.0 * math.pi * self.variance)

    def sample(self, rng: CountingRng) -> float:
        return self.mean + math.sqrt(self.variance) * _standard_normal(rng)

    def in_support(self, y: float) -> bool:
        return True


@dataclass(frozen=True)
class AbsWeightedGaussian(ContinuousMarginal):
    """Density |y| e^(-y^2) on the line.

    The square of a draw is Exponential(1), which makes this the natural
    coordinate law for sphere-surface conditioning: sample sqrt(Exp(1))
    and attach a fair sign (two uniforms total).
    """

    def pdf(self, y: float) -> float:
        return abs(y) * math.exp(-y * y)

    def sup_pdf(self) -> float:
        # |y| e^(-y^2) peaks at |y| = 1/sqrt(2)
        return math.exp(-0.5) / math.sqrt(2.0)

    def sample(self, rng: CountingRng) -> float:
        mag = math.sqrt(-math.log1p(-rng.uniform()))
        return mag if rng.uniform() < 0.5 else -mag

    def in_support(self, y: float) -> bool:
        return True
