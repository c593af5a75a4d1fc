"""Zero-sum matrix games whose payoffs are whole loss distributions.

The defender picks rows and wants the outcome distribution as preferable as
possible; the attacker picks columns and wants the opposite.  Each game is
flattened into a stack of real matrices (one layer per derivative order, or
per severity rank for categorical games) on which fictitious play runs with
lexicographic row/column selection: layer 0 decides, deeper layers only break
ties.  The resulting mixed strategies approximate a lexicographic equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EncodingRangeError
from .losses import (
    DEFAULT_DEPTH,
    CategoricalLoss,
    DerivativeSequence,
    DeterministicLoss,
    EmpiricalSample,
    KdeLoss,
    Loss,
    MixtureLoss,
    RiskScale,
    _categorical_mass,
    _categorical_scale,
    _loss_kind,
    cdf,
    density_coefficients,
    moment,
    zero_day_mass,
)

#: Pseudo-count with which each player's belief about the opponent is seeded
#: (every opponent action "has been played" this often before the first
#: iteration).  Keeps early best responses hedged against the whole action set
#: instead of chasing the first moves; play frequencies never include these
#: phantom plays, and the seed washes out as iterations grow.
DEFAULT_PRIOR_WEIGHT = 2.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameMatrix:
    """n defenses (rows) against m attacks (columns), one loss per scenario."""

    defenses: tuple[str, ...]
    attacks: tuple[str, ...]
    cells: tuple[tuple[Loss, ...], ...]
    cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "defenses", tuple(str(d) for d in self.defenses))
        object.__setattr__(self, "attacks", tuple(str(a) for a in self.attacks))
        object.__setattr__(self, "cells", tuple(tuple(row) for row in self.cells))
        object.__setattr__(self, "cutoff", float(self.cutoff))
        n, m = len(self.defenses), len(self.attacks)
        if n < 1 or m < 1:
            raise ValueError("a game needs at least one defense and one attack")
        if len(self.cells) != n or any(len(row) != m for row in self.cells):
            raise ValueError("cell matrix shape does not match the action sets")
        kind = self.kind  # raises on mixed cell kinds
        if kind == "categorical":
            scales = {_categorical_scale(c) for row in self.cells for c in row}
            if len(scales) != 1:
                raise ValueError("categorical cells must share one risk scale")
        else:
            for row in self.cells:
                for cell in row:
                    _check_cell_cutoff(cell, self.cutoff)

    @property
    def kind(self) -> str:
        """"categorical" or "density"; mixing the two is rejected."""
        kinds = set()
        for row in self.cells:
            for cell in row:
                try:
                    kinds.add(_loss_kind(cell))
                except TypeError as exc:
                    raise ValueError(str(exc)) from None
        if kinds <= {"categorical"}:
            return "categorical"
        if kinds <= {"density", "deterministic"}:
            return "density"
        raise ValueError("game mixes categorical and smoothed cells")

    @property
    def scale(self) -> Optional[RiskScale]:
        if self.kind != "categorical":
            return None
        return _categorical_scale(self.cells[0][0])

    def with_cutoff(self, cutoff: float) -> "GameMatrix":
        """Same game with every smoothed cell re-anchored at a new threshold."""
        if self.kind == "categorical":
            raise ValueError("cutoff override only applies to smoothed games")
        cells = tuple(
            tuple(_reanchor(cell, float(cutoff)) for cell in row) for row in self.cells
        )
        return GameMatrix(self.defenses, self.attacks, cells, float(cutoff))


def _check_cell_cutoff(cell: Loss, cutoff: float) -> None:
    if isinstance(cell, KdeLoss):
        if cell.cutoff != cutoff:
            raise ValueError(
                f"cell cutoff {cell.cutoff} differs from game cutoff {cutoff}"
            )
    elif isinstance(cell, MixtureLoss):
        for _, comp in cell.components:
            _check_cell_cutoff(comp, cutoff)


def _reanchor(cell: Loss, cutoff: float) -> Loss:
    if isinstance(cell, KdeLoss):
        return KdeLoss(sample=cell.sample, bandwidth=cell.bandwidth, cutoff=cutoff)
    if isinstance(cell, MixtureLoss):
        return MixtureLoss(tuple((w, _reanchor(c, cutoff)) for w, c in cell.components))
    return cell


@dataclass(frozen=True)
class MatrixStack:
    """Real matrices A_0..A_K; layer k holds each cell's k-th sequence entry
    (for categorical games: the mass on the (k+1)-th highest rank)."""

    layers: tuple[np.ndarray, ...]

    def __post_init__(self):
        frozen = []
        shape = None
        for layer in self.layers:
            arr = np.array(layer, dtype=float)
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ValueError("all stack layers must have the same shape")
            arr.setflags(write=False)
            frozen.append(arr)
        if not frozen:
            raise ValueError("a stack needs at least one layer")
        object.__setattr__(self, "layers", tuple(frozen))

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.layers[0].shape


@dataclass(frozen=True)
class StrategyProfile:
    """Mixed strategies: p over defenses, q over attacks."""

    p: tuple[float, ...]
    q: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        for vec, name in ((self.p, "p"), (self.q, "q")):
            if not vec:
                raise ValueError(f"{name} must be non-empty")
            if any(v < 0.0 for v in vec):
                raise ValueError(f"{name} has negative entries")
            if abs(sum(vec) - 1.0) > 1e-9:
                raise ValueError(f"{name} must sum to 1, got {sum(vec)!r}")


@dataclass(frozen=True)
class EquilibriumReport:
    """Solved game: optimal randomized defense plus the risk figures of the
    equilibrium outcome distribution."""

    profile: StrategyProfile
    value_distribution: Loss
    expected_risk: float
    variance: float
    zero_day_mass: float
    iterations: int
    depth_used: int


@dataclass(frozen=True)
class MultiGame:
    """Several goal games over identical action sets, with tradeoff weights."""

    goals: tuple[GameMatrix, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "goals", tuple(self.goals))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.goals:
            raise ValueError("a multi-goal game needs at least one goal")
        if len(self.goals) != len(self.weights):
            raise ValueError("one weight per goal required")
        if any(not 0.0 < w <= 1.0 for w in self.weights):
            raise ValueError("weights must lie in (0, 1]")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        first = self.goals[0]
        for goal in self.goals[1:]:
            if goal.defenses != first.defenses or goal.attacks != first.attacks:
                raise ValueError("all goals must share the same action sets")
            if goal.cutoff != first.cutoff:
                raise ValueError("all goals must share one cutoff (common support)")
            if goal.kind != first.kind:
                raise ValueError("all goals must hold the same kind of losses")
            if goal.kind == "categorical" and goal.scale != first.scale:
                raise ValueError("all goals must share one risk scale")


# ---------------------------------------------------------------------------
# mixtures and stacks
# ---------------------------------------------------------------------------


def mix_distribution(game: GameMatrix, profile: StrategyProfile, r: float) -> float:
    """CDF of the outcome under mixed play: F(p,q)(r) = sum F_ij(r) p_i q_j."""
    p, q = profile.p, profile.q
    if len(p) != len(game.defenses) or len(q) != len(game.attacks):
        raise ValueError("profile dimensions do not match the game")
    total = 0.0
    for i, pi in enumerate(p):
        if pi == 0.0:
            continue
        for j, qj in enumerate(q):
            if qj == 0.0:
                continue
            total += pi * qj * cdf(game.cells[i][j], r)
    return total


def mixture_value(game: GameMatrix, profile: StrategyProfile) -> Loss:
    """The outcome distribution F(p, q) as a loss object.

    Categorical games stay categorical (masses mix linearly); smoothed games
    become an explicit mixture of the played cells.
    """
    p, q = profile.p, profile.q
    if len(p) != len(game.defenses) or len(q) != len(game.attacks):
        raise ValueError("profile dimensions do not match the game")
    weighted = [
        (pi * qj, game.cells[i][j])
        for i, pi in enumerate(p)
        for j, qj in enumerate(q)
        if pi * qj > 0.0
    ]
    if game.kind == "categorical":
        mass = np.zeros(len(game.scale.categories))
        for w, cell in weighted:
            mass += w * np.asarray(_categorical_mass(cell))
        mass /= mass.sum()
        return CategoricalLoss(scale=game.scale, mass=tuple(float(v) for v in mass))
    if len(weighted) == 1:
        return weighted[0][1]
    total = sum(w for w, _ in weighted)
    return MixtureLoss(tuple((w / total, cell) for w, cell in weighted))


def _smoothing_bandwidth(game: GameMatrix) -> Optional[float]:
    """Narrowest kernel bandwidth present in the game; None if there is none."""

    def widths(loss: Loss):
        if isinstance(loss, KdeLoss):
            yield loss.bandwidth
        elif isinstance(loss, MixtureLoss):
            for _, comp in loss.components:
                yield from widths(comp)

    found = [w for row in game.cells for cell in row for w in widths(cell)]
    return min(found) if found else None


def _smooth_loss(loss: Loss, bandwidth: Optional[float], cutoff: float) -> Loss:
    if isinstance(loss, DeterministicLoss):
        # A certain loss enters the smoothed game as a single narrow kernel;
        # with no kernels around, fall back to the rule-of-thumb width of a
        # one-point sample.
        h = bandwidth if bandwidth is not None else 0.9 * abs(loss.value)
        return KdeLoss(
            sample=EmpiricalSample((loss.value,)), bandwidth=h, cutoff=cutoff
        )
    if isinstance(loss, MixtureLoss):
        return MixtureLoss(
            tuple((w, _smooth_loss(c, bandwidth, cutoff)) for w, c in loss.components)
        )
    return loss


def smooth_deterministic(game: GameMatrix) -> GameMatrix:
    """Replace point-mass cells of a smoothed game by narrow kernels so that
    every cell has a derivative sequence."""
    if game.kind == "categorical":
        return game
    h = _smoothing_bandwidth(game)
    cells = tuple(
        tuple(_smooth_loss(cell, h, game.cutoff) for cell in row) for row in game.cells
    )
    return GameMatrix(game.defenses, game.attacks, cells, game.cutoff)


def build_stack(game: GameMatrix, depth: int = DEFAULT_DEPTH) -> MatrixStack:
    """Layered real representation of the game.

    Smoothed games: layer k holds (-1)^k f_ij^(k)(a).  Categorical games:
    layer k holds the mass on the (k+1)-th highest rank, with the depth capped
    at (number of categories - 1).
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    n, m = len(game.defenses), len(game.attacks)
    if game.kind == "categorical":
        n_cat = len(game.scale.categories)
        effective = min(depth, n_cat - 1)
        layers = np.zeros((effective + 1, n, m))
        for i in range(n):
            for j in range(m):
                mass = _categorical_mass(game.cells[i][j])
                for k in range(effective + 1):
                    layers[k, i, j] = mass[n_cat - 1 - k]
        return MatrixStack(layers=tuple(layers))
    game = smooth_deterministic(game)
    layers = np.zeros((depth + 1, n, m))
    for i in range(n):
        for j in range(m):
            coeffs = density_coefficients(game.cells[i][j], depth, game.cutoff)
            layers[:, i, j] = coeffs
    return MatrixStack(layers=tuple(layers))


# ---------------------------------------------------------------------------
# fictitious play
# ---------------------------------------------------------------------------


def _lex_argmin(rows: np.ndarray) -> int:
    candidates = np.arange(rows.shape[0])
    for layer in range(rows.shape[1]):
        col = rows[candidates, layer]
        candidates = candidates[col == col.min()]
        if candidates.size == 1:
            break
    return int(candidates[0])


def _lex_argmax(rows: np.ndarray) -> int:
    candidates = np.arange(rows.shape[0])
    for layer in range(rows.shape[1]):
        col = rows[candidates, layer]
        candidates = candidates[col == col.max()]
        if candidates.size == 1:
            break
    return int(candidates[0])


def _fp_single_layer(layer: np.ndarray, iterations: int, prior: float):
    # scalar payoffs: plain floats beat numpy dispatch by a wide margin here
    n, m = layer.shape
    rows = [[float(v) for v in layer[i]] for i in range(n)]
    cols = [[float(layer[i][j]) for i in range(n)] for j in range(m)]
    attacker = [prior * sum(col) for col in cols]
    defender = [prior * sum(row) for row in rows]
    row_counts = [0] * n
    col_counts = [0] * m
    for _ in range(iterations):
        i = min(range(n), key=defender.__getitem__)
        j = max(range(m), key=attacker.__getitem__)
        row_counts[i] += 1
        col_counts[j] += 1
        row = rows[i]
        for jj in range(m):
            attacker[jj] += row[jj]
        col = cols[j]
        for ii in range(n):
            defender[ii] += col[ii]
    return row_counts, col_counts


def _fp_stacked(stack: np.ndarray, iterations: int, prior: float):
    n, m, _ = stack.shape
    attacker = prior * stack.sum(axis=0)  # (m, layers)
    defender = prior * stack.sum(axis=1)  # (n, layers)
    row_counts = np.zeros(n, dtype=int)
    col_counts = np.zeros(m, dtype=int)
    for _ in range(iterations):
        i = _lex_argmin(defender)
        j = _lex_argmax(attacker)
        row_counts[i] += 1
        col_counts[j] += 1
        attacker += stack[i]
        defender += stack[:, j]
    return row_counts.tolist(), col_counts.tolist()


def fictitious_play(
    stack: MatrixStack, iterations: int, prior_weight: float = DEFAULT_PRIOR_WEIGHT
) -> StrategyProfile:
    """Best-response dynamics on the stacked game; returns play frequencies.

    Both players track the cumulative payoff vector of each of their pure
    strategies against everything the opponent has played, seeded with
    ``prior_weight`` phantom plays of every opponent action.  Each iteration
    the defender takes the lexicographically minimal row, the attacker the
    maximal column (ties to the lowest index), simultaneously.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if prior_weight < 0.0:
        raise ValueError("prior weight must be non-negative")
    if len(stack.layers) == 1:
        row_counts, col_counts = _fp_single_layer(
            stack.layers[0], iterations, prior_weight
        )
    else:
        cube = np.stack(stack.layers, axis=-1)  # (n, m, layers)
        row_counts, col_counts = _fp_stacked(cube, iterations, prior_weight)
    return StrategyProfile(
        p=tuple(c / iterations for c in row_counts),
        q=tuple(c / iterations for c in col_counts),
    )


def stack_value(stack: MatrixStack, profile: StrategyProfile) -> tuple[float, ...]:
    """Per-layer mixed value p^T A_k q of a profile on the stack."""
    p = np.asarray(profile.p)
    q = np.asarray(profile.q)
    return tuple(float(p @ layer @ q) for layer in stack.layers)


def _lex_lt(a, b) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False


def saddle_check(
    game: GameMatrix,
    profile: StrategyProfile,
    depth: int = DEFAULT_DEPTH,
    layer_tolerance: float = 1e-3,
) -> bool:
    """Approximate equilibrium certificate.

    True when no pure defense deviation lexicographically beats the profile
    value lowered by ``layer_tolerance`` per layer, and no pure attack
    deviation beats it raised by the same amount.
    """
    stack = build_stack(game, depth)
    p = np.asarray(profile.p)
    q = np.asarray(profile.q)
    cube = np.stack(stack.layers, axis=-1)  # (n, m, layers)
    value = np.einsum("i,ijl,j->l", p, cube, q)
    for i in range(cube.shape[0]):
        deviation = q @ cube[i]
        if _lex_lt(deviation, value - layer_tolerance):
            return False
    for j in range(cube.shape[1]):
        deviation = p @ cube[:, j]
        if _lex_lt(value + layer_tolerance, deviation):
            return False
    return True


# ---------------------------------------------------------------------------
# solving and reporting
# ---------------------------------------------------------------------------


def _zero_day(loss: Loss) -> float:
    if isinstance(loss, KdeLoss):
        return zero_day_mass(loss)
    if isinstance(loss, MixtureLoss):
        return float(sum(w * _zero_day(c) for w, c in loss.components))
    return 0.0  # categorical and point masses never exceed their observations


def solve(
    game: GameMatrix,
    iterations: int = 1000,
    depth: int = DEFAULT_DEPTH,
    cutoff: Optional[float] = None,
    prior_weight: float = DEFAULT_PRIOR_WEIGHT,
) -> EquilibriumReport:
    """Solve the game: stack, fictitious play, and the equilibrium outcome.

    Point-mass cells of smoothed games are widened into narrow kernels first
    so that the stack, the value mixture, and the zero-day figure all describe
    the same smoothed game.
    """
    if cutoff is not None:
        game = game.with_cutoff(cutoff)
    if game.kind == "density":
        game = smooth_deterministic(game)
    stack = build_stack(game, depth)
    profile = fictitious_play(stack, iterations, prior_weight)
    value = mixture_value(game, profile)
    expected_risk = moment(value, 1)
    variance = moment(value, 2) - expected_risk**2
    zero_day = 0.0
    for i, pi in enumerate(profile.p):
        for j, qj in enumerate(profile.q):
            if pi * qj > 0.0:
                zero_day += pi * qj * _zero_day(game.cells[i][j])
    return EquilibriumReport(
        profile=profile,
        value_distribution=value,
        expected_risk=float(expected_risk),
        variance=float(variance),
        zero_day_mass=float(zero_day),
        iterations=iterations,
        depth_used=stack.depth,
    )


def scalarize(multi: MultiGame) -> GameMatrix:
    """Collapse goal games into one via the weighted pointwise CDF combination
    (for sample-backed cells this is exactly the weighted mixture)."""
    if len(multi.goals) == 1:
        return multi.goals[0]
    first = multi.goals[0]
    n, m = len(first.defenses), len(first.attacks)
    cells = []
    for i in range(n):
        row = []
        for j in range(m):
            parts = tuple(
                (w, goal.cells[i][j]) for w, goal in zip(multi.weights, multi.goals)
            )
            if all(cell == parts[0][1] for _, cell in parts):
                # goals agree on this scenario; keep the cell bit-exact
                row.append(parts[0][1])
            elif first.kind == "categorical":
                mass = np.zeros(len(first.scale.categories))
                for w, cell in parts:
                    mass += w * np.asarray(_categorical_mass(cell))
                row.append(
                    CategoricalLoss(
                        scale=first.scale, mass=tuple(float(v) for v in mass)
                    )
                )
            else:
                row.append(MixtureLoss(parts))
        cells.append(tuple(row))
    return GameMatrix(first.defenses, first.attacks, tuple(cells), first.cutoff)


# ---------------------------------------------------------------------------
# scalar encoding of derivative sequences
# ---------------------------------------------------------------------------


def encode_scalar(seq: DerivativeSequence, int_digits: int, frac_bits: int) -> float:
    """Pack a sequence into one real whose numeric order is the lexicographic
    order of the rounded coefficient vectors.

    Each coefficient is offset by 2^(int_digits-1) (so negative values order
    correctly), rounded to ``frac_bits`` binary places, and the fixed-width
    blocks are concatenated behind the binary point in ascending index order.
    """
    if int_digits < 1 or frac_bits < 0:
        raise ValueError("need at least one integer digit and non-negative fraction bits")
    width = int_digits + frac_bits
    blocks = seq.depth + 1
    if blocks * width > 52:
        raise EncodingRangeError(
            f"{blocks} blocks of {width} bits exceed exact float precision"
        )
    offset = 2.0 ** (int_digits - 1)
    packed = 0
    for k, y in enumerate(seq.coefficients):
        shifted = y + offset
        block = round(shifted * 2.0**frac_bits)
        if not 0 <= block < 2**width:
            raise EncodingRangeError(
                f"coefficient {y!r} at index {k} overflows "
                f"{int_digits}.{frac_bits} fixed-width encoding"
            )
        packed = (packed << width) | block
    return packed / 2.0 ** (blocks * width)
