"""Main terms, error envelopes, and constant recovery for the summatory layer.

The closed-form main terms live here next to the machinery that certifies
them numerically: an error envelope divides |exact - main| by the claimed
error scale and reports the normalized ratios, and a deterministic
least-squares fit recovers the coefficients of x * (a3 ln^3 x + a2 ln^2 x +
a1 ln x + a0) from exact mean-square data.  The leading coefficient of the
divisor mean square is 1/pi^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .tables import DEFAULT_MEMORY_CAP, MOBIUS, sieve
from .summatory import (
    d4_summatory,
    divisor_summatory_hyperbola,
    dk_summatory_recursive,
    isqrt_exact,
    mean_square_summatory,
)

__all__ = [
    "CLAIMS",
    "EULER_GAMMA",
    "INV_PI_SQUARED",
    "SIX_OVER_PI_SQUARED",
    "AsymptoticModel",
    "ConditioningError",
    "EnvelopeReport",
    "EnvelopeSample",
    "FitReport",
    "divisor_main",
    "envelope",
    "fit_log_poly",
    "geometric_samples",
    "harmonic_log_main",
    "harmonic_log_sum",
    "harmonic_log_sums",
    "mean_square_main",
    "mobius_tail",
]

# Fixed to >= 16 significant digits; never derived at runtime.
EULER_GAMMA = 0.5772156649015329
INV_PI_SQUARED = 1.0 / math.pi**2
SIX_OVER_PI_SQUARED = 6.0 / math.pi**2

_HARMONIC_KS = (0, 1, 2)
_CHUNK = 1 << 20
# Largest isqrt(x) for which the Mobius tail is accumulated in Fractions;
# beyond it, exact 128-bit fixed point (error < isqrt(x) * 2^-128, far below
# one double ulp) keeps the cost linear.
_EXACT_RATIONAL_TERMS = 4096
_CONDITION_LIMIT = 1e13


class ConditioningError(ValueError):
    """The fit basis is rank deficient or too ill-conditioned to solve."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class AsymptoticModel:
    """Coefficients of x * (a3 ln^3 x + a2 ln^2 x + a1 ln x + a0)."""

    a3: float
    a2: float
    a1: float
    a0: float

    def evaluate(self, x: float) -> float:
        if x < 1:
            raise ValueError(f"model domain is x >= 1, got {x}")
        lg = math.log(x)
        return x * (((self.a3 * lg + self.a2) * lg + self.a1) * lg + self.a0)

    def scaled(self, c: float) -> "AsymptoticModel":
        return AsymptoticModel(c * self.a3, c * self.a2, c * self.a1, c * self.a0)


# ---------------------------------------------------------------------------
# Closed-form main terms
# ---------------------------------------------------------------------------


def harmonic_log_main(x: float, k: int) -> float:
    """Main term of sum_{n<=x} ln^k(n)/n, namely ln^(k+1)(x) / (k+1)."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return math.log(x) ** (k + 1) / (k + 1)


def divisor_main(x: float, refined: bool = False) -> float:
    """Main term of the divisor summatory: x ln x, or x ln x + (2*gamma - 1)x
    when the refined secondary term is requested."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    main = x * math.log(x)
    if refined:
        main += (2.0 * EULER_GAMMA - 1.0) * x
    return main


def mean_square_main(x: float) -> float:
    """Leading term of the divisor mean square: x ln^3(x) / pi^2."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    return INV_PI_SQUARED * x * math.log(x) ** 3


# ---------------------------------------------------------------------------
# Harmonic log-power partial sums (exact summation, compensated)
# ---------------------------------------------------------------------------


class _CompensatedSum:
    """Neumaier-compensated running sum of doubles."""

    __slots__ = ("total", "compensation")

    def __init__(self) -> None:
        self.total = 0.0
        self.compensation = 0.0

    def add(self, v: float) -> None:
        t = self.total + v
        if abs(self.total) >= abs(v):
            self.compensation += (self.total - t) + v
        else:
            self.compensation += (v - t) + self.total
        self.total = t

    def value(self) -> float:
        return self.total + self.compensation


def _harmonic_terms(lo: int, hi: int, k: int) -> np.ndarray:
    ns = np.arange(lo, hi + 1, dtype=np.float64)
    if k == 0:
        return 1.0 / ns
    logs = np.log(ns)
    if k == 1:
        return logs / ns
    return logs * logs / ns


def harmonic_log_sums(xs: Sequence[int], k: int) -> list[float]:
    """Partial sums sum_{n<=x} ln^k(n)/n at several cut points in one sweep.

    Terms are produced in chunks summed pairwise, and the chunk totals are
    combined with Neumaier compensation, so the result carries far more
    correct digits than the slow convergence of the sum ever exposes.
    """
    if k not in _HARMONIC_KS:
        raise ValueError(f"k must be one of {_HARMONIC_KS}, got {k}")
    floors = []
    for x in xs:
        if x < 1:
            raise ValueError(f"x must be >= 1, got {x}")
        floors.append(int(x))
    order = sorted(range(len(floors)), key=lambda i: floors[i])
    out = [0.0] * len(floors)
    acc = _CompensatedSum()
    prev = 0
    for i in order:
        cut = floors[i]
        for lo in range(prev + 1, cut + 1, _CHUNK):
            hi = min(lo + _CHUNK - 1, cut)
            acc.add(float(np.sum(_harmonic_terms(lo, hi, k))))
        prev = cut
        out[i] = acc.value()
    return out


def harmonic_log_sum(x: float, k: int) -> float:
    """Exact partial sum sum_{n<=x} ln^k(n)/n in compensated double
    precision, for k in {0, 1, 2}."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    return harmonic_log_sums([int(x)], k)[0]


# ---------------------------------------------------------------------------
# Mobius reciprocal-square tail
# ---------------------------------------------------------------------------


def mobius_tail(
    x: int, *, memory_cap: int = DEFAULT_MEMORY_CAP
) -> tuple[float, float]:
    """(partial, limit) for sum_{delta<=isqrt(x)} mu(delta)/delta^2.

    The partial sum is accumulated exactly (rationals up to a few thousand
    terms, 128-bit fixed point beyond) and rounded once at the end; the
    limit is 6/pi^2, the reciprocal of zeta(2).
    """
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    root = isqrt_exact(x)
    mu = sieve(MOBIUS, root, memory_cap=memory_cap).values
    if root <= _EXACT_RATIONAL_TERMS:
        acc = Fraction(0)
        for delta in range(1, root + 1):
            m = int(mu[delta - 1])
            if m:
                acc += Fraction(m, delta * delta)
        partial = float(acc)
    else:
        scale = 1 << 128
        total = 0
        for delta in range(1, root + 1):
            m = int(mu[delta - 1])
            if m:
                total += m * (scale // (delta * delta))
        partial = float(Fraction(total, scale))
    return partial, SIX_OVER_PI_SQUARED


# ---------------------------------------------------------------------------
# Error envelopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnvelopeSample:
    x: int
    exact: int | float
    main: float
    normalizer: float
    ratio: float


@dataclass(frozen=True)
class EnvelopeReport:
    """Normalized error ratios |exact - main| / normalizer over sampled x.

    ``trend`` lists (decade, max ratio) pairs; a bounded, non-growing trend
    is the numerical witness that the error stays within the claimed scale.
    """

    claim: str
    samples: list[EnvelopeSample]
    sup_ratio: float
    trend: list[tuple[int, float]]
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "claim": self.claim,
            "samples": [
                {
                    "x": s.x,
                    "exact": str(s.exact) if isinstance(s.exact, int) else s.exact,
                    "main": s.main,
                    "normalizer": s.normalizer,
                    "ratio": s.ratio,
                }
                for s in self.samples
            ],
            "sup_ratio": self.sup_ratio,
            "trend": [{"decade": d, "max_ratio": r} for d, r in self.trend],
            "rejected": [{"x": x, "reason": why} for x, why in self.rejected],
        }

    def csv_rows(self) -> list[list[str]]:
        from .serialize import format_float

        rows = [["claim", "x", "exact", "main", "normalizer", "ratio"]]
        for s in self.samples:
            exact = str(s.exact) if isinstance(s.exact, int) else format_float(s.exact)
            rows.append(
                [
                    self.claim,
                    str(s.x),
                    exact,
                    format_float(s.main),
                    format_float(s.normalizer),
                    format_float(s.ratio),
                ]
            )
        return rows


@dataclass(frozen=True)
class _Claim:
    token: str
    description: str
    exact: Callable[[int], int | float]
    main: Callable[[int], float]
    normalizer: Callable[[int], float]


def _claim_registry() -> dict[str, _Claim]:
    claims = {
        "eq4": _Claim(
            "eq4",
            "divisor summatory vs x ln x, error scale x",
            lambda x: divisor_summatory_hyperbola(x).value,
            lambda x: divisor_main(x),
            lambda x: float(x),
        ),
        "d3": _Claim(
            "d3",
            "triple divisor summatory vs (1/2) x ln^2 x, error scale x ln x",
            lambda x: dk_summatory_recursive(3, x).value,
            lambda x: 0.5 * x * math.log(x) ** 2,
            lambda x: x * math.log(x),
        ),
        "d4": _Claim(
            "d4",
            "quadruple divisor summatory vs (1/6) x ln^3 x, error scale x ln^2 x",
            lambda x: d4_summatory(x).value,
            lambda x: x * math.log(x) ** 3 / 6.0,
            lambda x: x * math.log(x) ** 2,
        ),
        "s": _Claim(
            "s",
            "divisor mean square vs x ln^3 x / pi^2, error scale x ln^2 x",
            lambda x: mean_square_summatory(x).value,
            mean_square_main,
            lambda x: x * math.log(x) ** 2,
        ),
        "mobius": _Claim(
            "mobius",
            "mobius reciprocal-square partial sum vs 6/pi^2, error scale x^(-1/2)",
            lambda x: mobius_tail(x)[0],
            lambda x: SIX_OVER_PI_SQUARED,
            lambda x: x**-0.5,
        ),
    }
    for k in _HARMONIC_KS:
        claims[f"eq3:{k}"] = _Claim(
            f"eq3:{k}",
            f"harmonic ln^{k} partial sum vs ln^{k + 1}(x)/{k + 1}, error scale 1",
            None,  # batched separately
            lambda x, k=k: harmonic_log_main(x, k),
            lambda x: 1.0,
        )
    return claims


CLAIMS = _claim_registry()


def _decade(x: int) -> int:
    return len(str(x)) - 1


def envelope(claim: str, x_samples: Sequence[int]) -> EnvelopeReport:
    """Evaluate one error-envelope claim at the given sample points.

    Samples where the normalizer vanishes are rejected individually and
    reported with a diagnostic; everything else contributes a ratio
    |exact - main| / normalizer.  Samples are processed in ascending order.
    """
    if claim not in CLAIMS:
        raise ValueError(f"unknown envelope claim {claim!r}")
    if len(x_samples) < 2:
        raise ValueError("an envelope needs at least 2 sample points")
    spec = CLAIMS[claim]
    xs = sorted(int(x) for x in x_samples)
    for x in xs:
        if x < 1:
            raise ValueError(f"sample points must be >= 1, got {x}")
    accepted: list[int] = []
    rejected: list[tuple[int, str]] = []
    for x in xs:
        norm = spec.normalizer(x)
        if norm <= 0.0:
            rejected.append((x, f"normalizer {norm} is not positive at x={x}"))
        else:
            accepted.append(x)
    if claim.startswith("eq3:"):
        k = int(claim.split(":")[1])
        exacts: list[int | float] = harmonic_log_sums(accepted, k)
    else:
        exacts = [spec.exact(x) for x in accepted]
    samples = []
    for x, exact in zip(accepted, exacts):
        main = spec.main(x)
        norm = spec.normalizer(x)
        ratio = abs(float(exact) - main) / norm
        samples.append(
            EnvelopeSample(x=x, exact=exact, main=main, normalizer=norm, ratio=ratio)
        )
    if not samples:
        raise ValueError(f"no usable samples for claim {claim!r}")
    sup = max(s.ratio for s in samples)
    by_decade: dict[int, float] = {}
    for s in samples:
        d = _decade(s.x)
        by_decade[d] = max(by_decade.get(d, 0.0), s.ratio)
    trend = sorted(by_decade.items())
    return EnvelopeReport(
        claim=claim, samples=samples, sup_ratio=sup, trend=trend, rejected=rejected
    )


# ---------------------------------------------------------------------------
# Least-squares recovery of the log-polynomial coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitReport:
    """Outcome of fitting exact mean-square samples to the cubic log model."""

    model: AsymptoticModel
    x_min: int
    x_max: int
    count: int
    residuals: list[float]
    max_abs_residual: float
    condition: float

    def to_json_dict(self) -> dict:
        return {
            "model": {
                "a3": self.model.a3,
                "a2": self.model.a2,
                "a1": self.model.a1,
                "a0": self.model.a0,
            },
            "x_min": self.x_min,
            "x_max": self.x_max,
            "count": self.count,
            "residuals": self.residuals,
            "max_abs_residual": self.max_abs_residual,
            "condition": self.condition,
        }

    def csv_rows(self) -> list[list[str]]:
        from .serialize import format_float

        rows = [["coefficient", "value"]]
        for name in ("a3", "a2", "a1", "a0"):
            rows.append([name, format_float(getattr(self.model, name))])
        rows.append(["max_abs_residual", format_float(self.max_abs_residual)])
        rows.append(["condition", format_float(self.condition)])
        return rows


def fit_log_poly(samples: Sequence[tuple[int, int]]) -> FitReport:
    """Least-squares coefficients of x * (a3 ln^3 x + ... + a0) from exact
    (x, S(x)) samples.

    Fits S(x)/x against powers of ln x centered at their sample mean (the raw
    power basis over several decades is nearly collinear), then maps the
    coefficients back.  The normal equations are accumulated with exact
    rounding, which makes the solve deterministic and invariant under
    duplicating the sample set.
    """
    if len(samples) < 8:
        raise ValueError(f"need at least 8 samples, got {len(samples)}")
    xs = [int(x) for x, _ in samples]
    values = [v for _, v in samples]
    for x in xs:
        if x < 2:
            raise ValueError(f"fit samples need x >= 2, got {x}")
    x_min, x_max = min(xs), max(xs)
    if math.log10(x_max / x_min) < 3 - 1e-9:
        raise ValueError(
            f"samples span {math.log10(x_max / x_min):.2f} decades; need >= 3"
        )
    weights: dict[tuple[int, int], int] = {}
    for pair in zip(xs, values):
        weights[pair] = weights.get(pair, 0) + 1
    points = [(x, v / x, w) for (x, v), w in weights.items()]
    logs = [math.log(x) for x, _, _ in points]
    wsum = math.fsum(w for _, _, w in points)
    center = math.fsum(w * lg for (_, _, w), lg in zip(points, logs)) / wsum
    zs = [lg - center for lg in logs]
    power_sums = [
        math.fsum(w * z**t for (_, _, w), z in zip(points, zs))
        for t in range(7)
    ]
    gram = np.array(
        [[power_sums[a + b] for b in range(4)] for a in range(4)], dtype=np.float64
    )
    rhs = np.array(
        [
            math.fsum(w * y * z**a for (_, y, w), z in zip(points, zs))
            for a in range(4)
        ],
        dtype=np.float64,
    )
    condition = float(np.sqrt(np.linalg.cond(gram)))
    if not np.isfinite(condition) or condition > _CONDITION_LIMIT:
        raise ConditioningError(
            f"centered log-power basis is too ill-conditioned "
            f"(condition {condition:.3e})",
            condition,
        )
    try:
        c0, c1, c2, c3 = (float(v) for v in np.linalg.solve(gram, rhs))
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            f"normal equations are singular: {exc}", float("inf")
        ) from exc
    model = AsymptoticModel(
        a3=c3,
        a2=c2 - 3.0 * c3 * center,
        a1=c1 - 2.0 * c2 * center + 3.0 * c3 * center**2,
        a0=c0 - c1 * center + c2 * center**2 - c3 * center**3,
    )
    residuals = []
    for x, v in zip(xs, values):
        z = math.log(x) - center
        fitted = ((c3 * z + c2) * z + c1) * z + c0
        residuals.append(v / x - fitted)
    return FitReport(
        model=model,
        x_min=x_min,
        x_max=x_max,
        count=len(samples),
        residuals=residuals,
        max_abs_residual=max(abs(r) for r in residuals),
        condition=condition,
    )


def geometric_samples(x_min: int, x_max: int, points: int) -> list[int]:
    """`points` integers geometrically spaced from x_min to x_max, ascending,
    deduplicated after rounding."""
    if points < 2:
        raise ValueError(f"need at least 2 points, got {points}")
    if x_min < 1 or x_max <= x_min:
        raise ValueError("need 1 <= x_min < x_max")
    ratio = (x_max / x_min) ** (1.0 / (points - 1))
    out = []
    for i in range(points):
        x = round(x_min * ratio**i)
        x = min(max(x, x_min), x_max)
        if not out or x > out[-1]:
            out.append(x)
    if out[-1] != x_max:
        out.append(x_max)
    return out
