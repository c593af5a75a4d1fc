"""Loss distributions on a bounded damage scale and the risk-averse order on them.

A loss is either categorical (masses over ordered severity ranks), a Gaussian
kernel density estimate built from rank observations, a deterministic value, or
a finite mixture of these.  Two losses are ranked by which one makes extreme
damage more likely: continuous losses through the lexicographic order on their
derivative sequences ((-1)^k f^(k)(a)) at the risk acceptance threshold a,
categorical losses through their mass vectors read from the most severe rank
down.  The smaller element under this order is the preferred one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT_PI = math.sqrt(math.pi)

#: Absolute tolerance under which two compared coefficients count as tied.
#: Exact float equality is brittle because derivative magnitudes grow quickly
#: with the order k.
TIE_TOLERANCE = 1e-12

#: Default number of derivative orders (beyond the density itself) used when
#: comparing smooth losses.  Decisions usually resolve at order zero already.
DEFAULT_DEPTH = 4


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskScale:
    """Ordered severity categories; category i carries the numeric rank i+1."""

    categories: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        if len(self.categories) < 2:
            raise ValueError("a risk scale needs at least 2 categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("risk scale categories must be unique")

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.categories) + 1))

    @property
    def top_rank(self) -> int:
        return len(self.categories)

    def rank_of(self, category: str) -> int:
        try:
            return self.categories.index(category) + 1
        except ValueError:
            raise ValueError(
                f"unknown category {category!r} (scale: {', '.join(self.categories)})"
            ) from None


@dataclass(frozen=True)
class CategoricalLoss:
    """Probability mass per rank of a :class:`RiskScale`."""

    scale: RiskScale
    mass: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mass", tuple(float(m) for m in self.mass))
        if len(self.mass) != len(self.scale.categories):
            raise ValueError("mass vector length must match the scale")
        if any(m < 0.0 or m > 1.0 for m in self.mass):
            raise ValueError("masses must lie in [0, 1]")
        if abs(sum(self.mass) - 1.0) > 1e-9:
            raise ValueError(f"masses must sum to 1, got {sum(self.mass)!r}")


@dataclass(frozen=True)
class EmpiricalSample:
    """Raw loss observations, each at least 1, in the order they were given."""

    points: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        if not self.points:
            raise ValueError("empty sample")
        if any(p < 1.0 for p in self.points):
            raise ValueError("loss observations must be >= 1")

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class KdeLoss:
    """Gaussian kernel density over a sample, compared at the cutoff point.

    The cutoff is the risk acceptance threshold: the evaluation point for the
    derivative sequence and the boundary of the zero-day region.  The density
    itself is never renormalized after truncation; the order is decided on the
    raw mixture derivatives at the cutoff.
    """

    sample: EmpiricalSample
    bandwidth: float
    cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "cutoff", float(self.cutoff))
        if not self.bandwidth > 0.0:
            raise ValueError("bandwidth must be positive")
        if not self.cutoff > 1.0:
            raise ValueError("cutoff must exceed 1")

    @classmethod
    def from_points(cls, points, bandwidth=None, cutoff=None) -> "KdeLoss":
        """Build from raw observations; Silverman bandwidth and the sample
        maximum as cutoff unless overridden."""
        sample = points if isinstance(points, EmpiricalSample) else EmpiricalSample(tuple(points))
        if bandwidth is None:
            bandwidth = silverman_bandwidth(sample)
        if cutoff is None:
            cutoff = max(sample.points)
        return cls(sample=sample, bandwidth=bandwidth, cutoff=cutoff)


@dataclass(frozen=True)
class DeterministicLoss:
    """A certain loss of a fixed size."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if self.value < 1.0:
            raise ValueError("deterministic loss must be >= 1")


@dataclass(frozen=True)
class MixtureLoss:
    """Convex combination of losses; closed form for equilibrium payoffs and
    multi-goal scalarization (the mixture CDF is the weighted CDF sum)."""

    components: tuple[tuple[float, "Loss"], ...]

    def __post_init__(self):
        comps = tuple((float(w), loss) for w, loss in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0.0 for w, _ in comps):
            raise ValueError("mixture weights must be non-negative")
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")


Loss = Union[CategoricalLoss, KdeLoss, DeterministicLoss, MixtureLoss]


@dataclass(frozen=True)
class DerivativeSequence:
    """Finite vector y_k = (-1)^k f^(k)(a), the comparable fingerprint of a
    smooth loss density at cutoff a."""

    coefficients: tuple[float, ...]
    cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "cutoff", float(self.cutoff))
        if not self.coefficients:
            raise ValueError("a derivative sequence needs at least one coefficient")

    @property
    def depth(self) -> int:
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class Ordering:
    """Outcome of a preference comparison.

    ``depth`` is the index of the deciding coefficient for strict verdicts and
    the depth at which the comparison was exhausted for ties.
    """

    relation: str  # "less" | "greater" | "tie"
    depth: int

    def __post_init__(self):
        if self.relation not in ("less", "greater", "tie"):
            raise ValueError(f"bad relation {self.relation!r}")

    @classmethod
    def less(cls, depth: int) -> "Ordering":
        return cls("less", depth)

    @classmethod
    def greater(cls, depth: int) -> "Ordering":
        return cls("greater", depth)

    @classmethod
    def tie(cls, depth: int) -> "Ordering":
        return cls("tie", depth)

    @property
    def is_less(self) -> bool:
        return self.relation == "less"

    @property
    def is_greater(self) -> bool:
        return self.relation == "greater"

    @property
    def is_tie(self) -> bool:
        return self.relation == "tie"

    def flipped(self) -> "Ordering":
        if self.is_tie:
            return self
        return Ordering("less" if self.is_greater else "greater", self.depth)


# ---------------------------------------------------------------------------
# kernel density machinery
# ---------------------------------------------------------------------------


def silverman_bandwidth(sample) -> float:
    """Rule-of-thumb bandwidth 0.9 * lo * n^(-1/5).

    lo is the first nonzero of min(sd, IQR/1.34), sd, |x_1|, 1, with the
    sample standard deviation on n-1 denominator and linearly interpolated
    quantiles, mirroring the zero-spread fallback chain of the reference
    rule of thumb.
    """
    points = sample.points if isinstance(sample, EmpiricalSample) else tuple(map(float, sample))
    n = len(points)
    if n < 2:
        raise ValueError("bandwidth estimation needs at least 2 data points")
    sd = float(np.std(points, ddof=1))
    iqr = _quantile(points, 0.75) - _quantile(points, 0.25)
    lo = 0.0
    for candidate in (min(sd, iqr / 1.34), sd, abs(points[0]), 1.0):
        if candidate != 0.0:
            lo = candidate
            break
    return 0.9 * lo * n ** (-0.2)


def _quantile(points, p):
    # linear interpolation on sorted data (the common "type 7" convention)
    xs = sorted(points)
    pos = (len(xs) - 1) * p
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])


def hermite(k: int, x):
    """Physicists' Hermite polynomial H_k(x).

    Recurrence H_{k+1} = 2x H_k - 2k H_{k-1} with H_0 = 1, H_1 = 2x.  Accepts
    scalars or numpy arrays.
    """
    if k < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=float)
    previous = np.zeros_like(x)
    current = np.ones_like(x)
    for j in range(k):
        previous, current = current, 2.0 * x * current - 2.0 * j * previous
    if current.ndim == 0:
        return float(current)
    return current


def kde_density(kde: KdeLoss, x):
    """Gaussian mixture density (1/(N h)) sum_k K((x_k - x)/h) at x."""
    pts = np.asarray(kde.sample.points)
    x = np.asarray(x, dtype=float)
    u = (x[..., None] - pts) / kde.bandwidth
    val = np.sum(np.exp(-0.5 * u * u), axis=-1) / (len(pts) * kde.bandwidth * SQRT_2PI)
    if val.ndim == 0:
        return float(val)
    return val


def kde_derivative(kde: KdeLoss, k: int, x) -> float:
    """k-th derivative of the mixture density in closed form.

    f^(k)(x) = (1/(N sqrt(pi))) ((-1)^k / (h sqrt 2)^(k+1))
               * sum_j H_k((x - x_j)/(h sqrt 2)) exp(-(x - x_j)^2 / (2 h^2)).

    Order 0 coincides with :func:`kde_density`.
    """
    if k < 0:
        raise ValueError("order must be non-negative")
    pts = np.asarray(kde.sample.points)
    h = kde.bandwidth
    x = np.asarray(x, dtype=float)
    diff = x[..., None] - pts
    scaled = diff / (h * math.sqrt(2.0))
    total = np.sum(hermite(k, scaled) * np.exp(-(diff * diff) / (2.0 * h * h)), axis=-1)
    val = ((-1.0) ** k / (len(pts) * SQRT_PI * (h * math.sqrt(2.0)) ** (k + 1))) * total
    if val.ndim == 0:
        return float(val)
    return val


def derivative_sequence(kde: KdeLoss, depth: int) -> DerivativeSequence:
    """Coefficients y_k = (-1)^k f^(k)(a) at the cutoff a, for k = 0..depth."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    coeffs = tuple(
        (-1.0) ** k * kde_derivative(kde, k, kde.cutoff) for k in range(depth + 1)
    )
    return DerivativeSequence(coefficients=coeffs, cutoff=kde.cutoff)


def upper_tail_mass(kde: KdeLoss, threshold: float) -> float:
    """Probability that the untruncated mixture exceeds ``threshold``."""
    pts = np.asarray(kde.sample.points)
    return float(np.mean(1.0 - ndtr((threshold - pts) / kde.bandwidth)))


def zero_day_mass(kde: KdeLoss) -> float:
    """Mass the smoothed loss puts above every observed value.

    This is the model's implicit account of unforeseen exploits: the heavier
    the expert assessments, the fatter this tail.
    """
    return upper_tail_mass(kde, max(kde.sample.points))


# ---------------------------------------------------------------------------
# distribution functionals used across the package
# ---------------------------------------------------------------------------


def cdf(loss: Loss, x: float) -> float:
    """Distribution function value Pr(L <= x); untruncated for KDE losses."""
    if isinstance(loss, CategoricalLoss):
        return float(sum(m for m, r in zip(loss.mass, loss.scale.ranks) if r <= x))
    if isinstance(loss, KdeLoss):
        pts = np.asarray(loss.sample.points)
        return float(np.mean(ndtr((x - pts) / loss.bandwidth)))
    if isinstance(loss, DeterministicLoss):
        return 1.0 if x >= loss.value else 0.0
    if isinstance(loss, MixtureLoss):
        return float(sum(w * cdf(c, x) for w, c in loss.components))
    raise TypeError(f"not a loss: {loss!r}")


def density(loss: Loss, x):
    """Density of a smooth loss; undefined for point masses."""
    if isinstance(loss, KdeLoss):
        return kde_density(loss, x)
    if isinstance(loss, MixtureLoss):
        parts = [w * np.asarray(density(c, x), dtype=float) for w, c in loss.components]
        total = sum(parts)
        return float(total) if np.ndim(total) == 0 else total
    raise TypeError(f"{type(loss).__name__} has no density")


def moment(loss: Loss, n: int) -> float:
    """E(L^n): exact for categorical and deterministic losses, adaptive
    quadrature of x^n f(x) over [1, cutoff] for KDE losses.

    Serves as the independent oracle for the moment-sequence definition of
    the preference order.
    """
    if n < 1:
        raise ValueError("moment order must be >= 1")
    if isinstance(loss, CategoricalLoss):
        return float(sum(m * float(r) ** n for m, r in zip(loss.mass, loss.scale.ranks)))
    if isinstance(loss, DeterministicLoss):
        return loss.value ** n
    if isinstance(loss, KdeLoss):
        val, _ = quad(
            lambda x: x ** n * kde_density(loss, x),
            1.0,
            loss.cutoff,
            epsabs=1e-10,
            limit=200,
        )
        return float(val)
    if isinstance(loss, MixtureLoss):
        return float(sum(w * moment(c, n) for w, c in loss.components))
    raise TypeError(f"not a loss: {loss!r}")


def support_upper(loss: Loss) -> float:
    """Upper end of the loss's support: the cutoff for KDE losses, the highest
    rank with positive mass for categorical ones."""
    if isinstance(loss, CategoricalLoss):
        positive = [r for m, r in zip(loss.mass, loss.scale.ranks) if m > 0.0]
        return float(max(positive))
    if isinstance(loss, KdeLoss):
        return loss.cutoff
    if isinstance(loss, DeterministicLoss):
        return loss.value
    if isinstance(loss, MixtureLoss):
        return max(support_upper(c) for w, c in loss.components if w > 0.0)
    raise TypeError(f"not a loss: {loss!r}")


# ---------------------------------------------------------------------------
# the preference order
# ---------------------------------------------------------------------------


def _lex_compare(a, b, tolerance=TIE_TOLERANCE) -> Ordering:
    for k, (x, y) in enumerate(zip(a, b)):
        if abs(x - y) <= tolerance:
            continue
        return Ordering.less(k) if x < y else Ordering.greater(k)
    return Ordering.tie(len(a) - 1)


def compare_lex(seq_a: DerivativeSequence, seq_b: DerivativeSequence) -> Ordering:
    """Lexicographic comparison of two derivative sequences.

    "less" means the first loss is preferred (its high-loss tail is lighter).
    Requires equal cutoff and depth.
    """
    from .errors import ComparisonError

    if seq_a.cutoff != seq_b.cutoff:
        raise ComparisonError(
            f"sequences evaluated at different cutoffs ({seq_a.cutoff} vs {seq_b.cutoff})"
        )
    if seq_a.depth != seq_b.depth:
        raise ComparisonError(
            f"sequences of different depth ({seq_a.depth} vs {seq_b.depth})"
        )
    return _lex_compare(seq_a.coefficients, seq_b.coefficients)


def compare_categorical(a: CategoricalLoss, b: CategoricalLoss) -> Ordering:
    """Compare mass vectors in descending rank order: the action with the
    higher likelihood of extreme damage is the worse ("greater") one."""
    from .errors import ComparisonError

    if a.scale != b.scale:
        raise ComparisonError("categorical losses live on different scales")
    return _lex_compare(a.mass[::-1], b.mass[::-1])


def _degenerate_value(loss: Loss):
    """The point a degenerate loss sits on, or None if it is spread out."""
    if isinstance(loss, DeterministicLoss):
        return loss.value
    if isinstance(loss, CategoricalLoss):
        positive = [r for m, r in zip(loss.mass, loss.scale.ranks) if m > 0.0]
        if len(positive) == 1:
            return float(positive[0])
    if isinstance(loss, MixtureLoss):
        values = set()
        for w, comp in loss.components:
            if w == 0.0:
                continue
            v = _degenerate_value(comp)
            if v is None:
                return None
            values.add(v)
        if len(values) == 1:
            return values.pop()
    return None


def compare_det_vs_random(c: float, loss) -> Ordering:
    """Rank a certain loss c against a spread-out one.

    With b the upper end of the random loss's support: the constant wins
    ("less") exactly when c < b; at c >= b the random loss is preferred since
    it admits smaller damage than the guaranteed c.  Degenerate inputs reduce
    to comparing two constants.
    """
    c = float(c)
    if c < 1.0:
        raise ValueError("deterministic loss must be >= 1")
    value = _degenerate_value(loss)
    if value is not None:
        return _lex_compare((c,), (value,))
    b = support_upper(loss)
    return Ordering.less(0) if c < b else Ordering.greater(0)


def compare_losses(a: Loss, b: Loss, depth: int = DEFAULT_DEPTH) -> Ordering:
    """Rank any two comparable losses; "less" marks the preferred one.

    Categorical losses compare on a shared scale, smoothed losses on a shared
    cutoff through their derivative sequences, deterministic values against
    either through the support rule.  Categorical-versus-smooth is rejected.
    """
    from .errors import ComparisonError

    ka, kb = _loss_kind(a), _loss_kind(b)
    if ka == "deterministic" and kb == "deterministic":
        va, vb = _degenerate_value(a), _degenerate_value(b)
        if va is not None and vb is not None:
            return _lex_compare((va,), (vb,))
        if va is not None:
            return compare_det_vs_random(va, b)
        if vb is not None:
            return compare_det_vs_random(vb, a).flipped()
        raise ComparisonError(
            "mixtures of distinct point masses need smoothing before comparison"
        )
    if ka == "deterministic":
        va = _degenerate_value(a)
        if va is None:
            raise ComparisonError(
                "mixtures of distinct point masses need smoothing before comparison"
            )
        return compare_det_vs_random(va, b)
    if kb == "deterministic":
        vb = _degenerate_value(b)
        if vb is None:
            raise ComparisonError(
                "mixtures of distinct point masses need smoothing before comparison"
            )
        return compare_det_vs_random(vb, a).flipped()
    if ka != kb:
        raise ComparisonError(f"cannot compare a {ka} loss with a {kb} loss")
    if ka == "categorical":
        return _lex_compare(_categorical_mass(a)[::-1], _categorical_mass(b)[::-1])
    cutoff_a, cutoff_b = _density_cutoff(a), _density_cutoff(b)
    if cutoff_a != cutoff_b:
        raise ComparisonError(
            f"smooth losses with different cutoffs ({cutoff_a} vs {cutoff_b})"
        )
    return _lex_compare(
        density_coefficients(a, depth, cutoff_a),
        density_coefficients(b, depth, cutoff_b),
    )


def select_best(losses, depth: int = DEFAULT_DEPTH) -> int:
    """Index of the preferred (minimal) loss; ties keep the earliest index."""
    losses = list(losses)
    if not losses:
        raise ValueError("empty list of losses")
    best = 0
    for i in range(1, len(losses)):
        if compare_losses(losses[i], losses[best], depth).is_less:
            best = i
    return best


# ---------------------------------------------------------------------------
# kind dispatch helpers (shared with the game engine)
# ---------------------------------------------------------------------------


def _loss_kind(loss: Loss) -> str:
    if isinstance(loss, CategoricalLoss):
        return "categorical"
    if isinstance(loss, KdeLoss):
        return "density"
    if isinstance(loss, DeterministicLoss):
        return "deterministic"
    if isinstance(loss, MixtureLoss):
        kinds = {_loss_kind(c) for _, c in loss.components}
        kinds.discard("deterministic")
        if not kinds:
            return "deterministic"
        if len(kinds) > 1:
            raise TypeError("mixture blends categorical and smooth components")
        return kinds.pop()
    raise TypeError(f"not a loss: {loss!r}")


def _categorical_mass(loss: Loss) -> tuple[float, ...]:
    """Mass vector of a categorical loss or categorical mixture."""
    if isinstance(loss, CategoricalLoss):
        return loss.mass
    if isinstance(loss, MixtureLoss):
        parts = [np.asarray(_categorical_mass(c)) * w for w, c in loss.components]
        return tuple(float(v) for v in sum(parts))
    raise TypeError(f"{type(loss).__name__} is not categorical")


def _categorical_scale(loss: Loss) -> RiskScale:
    if isinstance(loss, CategoricalLoss):
        return loss.scale
    if isinstance(loss, MixtureLoss):
        scales = {_categorical_scale(c) for _, c in loss.components}
        if len(scales) != 1:
            raise ValueError("mixture components live on different scales")
        return scales.pop()
    raise TypeError(f"{type(loss).__name__} is not categorical")


def _density_cutoff(loss: Loss) -> float:
    if isinstance(loss, KdeLoss):
        return loss.cutoff
    if isinstance(loss, MixtureLoss):
        cutoffs = {
            _density_cutoff(c)
            for _, c in loss.components
            if not isinstance(c, DeterministicLoss)
        }
        if len(cutoffs) != 1:
            raise ValueError("mixture components carry inconsistent cutoffs")
        return cutoffs.pop()
    raise TypeError(f"{type(loss).__name__} has no cutoff")


def density_coefficients(
    loss: Loss, depth: int, cutoff: float, smoothing_bandwidth: float | None = None
) -> tuple[float, ...]:
    """Derivative-sequence coefficients of a smooth loss at ``cutoff``.

    Mixtures combine linearly (differentiation is linear).  Deterministic
    losses are smoothed into a single Gaussian kernel first; the bandwidth for
    that must be supplied by the caller.
    """
    if isinstance(loss, KdeLoss):
        if loss.cutoff != cutoff:
            raise ValueError("loss cutoff differs from the requested evaluation point")
        return derivative_sequence(loss, depth).coefficients
    if isinstance(loss, DeterministicLoss):
        if smoothing_bandwidth is None:
            raise ValueError("deterministic loss needs a smoothing bandwidth")
        smoothed = KdeLoss(
            sample=EmpiricalSample((loss.value,)),
            bandwidth=smoothing_bandwidth,
            cutoff=cutoff,
        )
        return derivative_sequence(smoothed, depth).coefficients
    if isinstance(loss, MixtureLoss):
        total = np.zeros(depth + 1)
        for w, c in loss.components:
            total += w * np.asarray(
                density_coefficients(c, depth, cutoff, smoothing_bandwidth)
            )
        return tuple(float(v) for v in total)
    raise TypeError(f"{type(loss).__name__} has no density coefficients")
