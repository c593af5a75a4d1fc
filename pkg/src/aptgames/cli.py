"""Command-line front end: enumerate attack paths, solve survey games, and
compare loss files.  Reports are JSON, deterministic byte-for-byte for
identical inputs (fixed ordering, floats at 12 significant digits)."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import games, graphs, losses, survey
from .errors import ParseError

OUT_DIR_ENV = "APTGAMES_OUT_DIR"
GRID_POINTS = 512


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _round_floats(obj):
    """Round every float to 12 significant digits for stable output."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(_round_floats(doc), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if not path.is_absolute():
        base = os.environ.get(OUT_DIR_ENV)
        if base:
            path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# loss documents (for the compare command)
# ---------------------------------------------------------------------------


def parse_loss(text: str, cutoff_override: float | None = None):
    """Read a loss document: categorical, kde, or deterministic."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}", location=f"line {exc.lineno}") from None
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ParseError("loss document needs a 'kind' field")
    kind = doc["kind"]
    if kind == "deterministic":
        if "value" not in doc:
            raise ParseError("missing field", location="value")
        return losses.DeterministicLoss(value=float(doc["value"]))
    if kind == "categorical":
        for field in ("scale", "mass"):
            if field not in doc:
                raise ParseError("missing field", location=field)
        scale = losses.RiskScale(categories=tuple(doc["scale"]))
        return losses.CategoricalLoss(scale=scale, mass=tuple(doc["mass"]))
    if kind == "kde":
        if "points" not in doc:
            raise ParseError("missing field", location="points")
        cutoff = cutoff_override if cutoff_override is not None else doc.get("cutoff")
        return losses.KdeLoss.from_points(
            doc["points"], bandwidth=doc.get("bandwidth"), cutoff=cutoff
        )
    raise ParseError(f"unknown loss kind {kind!r}", location="kind")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_paths(args) -> int:
    graph = graphs.parse_graph(_read(args.graph))
    enum = graphs.enumerate_paths(graph, cap=args.cap)
    doc = {
        "graph": {"root": graph.root, "goal": graph.goal},
        "count": len(enum.paths),
        "truncated": enum.truncated,
        "cap": args.cap,
        "paths": [
            {"nodes": list(p.nodes), "labels": [graph.label_of(n) for n in p.nodes]}
            for p in enum.paths
        ],
    }
    _emit(doc, args.out)
    return 0


def _mixture_bandwidths(loss):
    if isinstance(loss, losses.KdeLoss):
        yield loss.bandwidth
    elif isinstance(loss, losses.MixtureLoss):
        for _, comp in loss.components:
            yield from _mixture_bandwidths(comp)


def _value_distribution_doc(value, cutoff: float) -> dict:
    if isinstance(value, losses.CategoricalLoss):
        return {
            "kind": "categorical",
            "categories": list(value.scale.categories),
            "ranks": list(value.scale.ranks),
            "mass": list(value.mass),
            "zero_day_boundary": cutoff,
        }
    widths = list(_mixture_bandwidths(value))
    hi = cutoff + 3.0 * (max(widths) if widths else 0.0)
    xs = np.linspace(1.0, hi, GRID_POINTS)
    ys = np.asarray(losses.density(value, xs), dtype=float)
    return {
        "kind": "density",
        "grid": {"x": [float(v) for v in xs], "density": [float(v) for v in ys]},
        "zero_day_boundary": cutoff,
    }


def cmd_solve(args) -> int:
    weights = _parse_weights(args.weights, len(args.surveys))
    parsed = [survey.parse_survey(_read(path)) for path in args.surveys]
    if len(parsed) == 1:
        game = survey.build_game(parsed[0], bandwidth=args.bandwidth, cutoff=args.cutoff)
    else:
        # goals must share one support: anchor every goal at the global worst case
        cutoff = args.cutoff
        if cutoff is None:
            cutoff = max(survey.default_cutoff(s) for s in parsed)
        built = tuple(
            survey.build_game(s, bandwidth=args.bandwidth, cutoff=cutoff)
            for s in parsed
        )
        game = games.scalarize(games.MultiGame(goals=built, weights=weights))
    report = games.solve(game, iterations=args.iterations, depth=args.depth)
    doc = {
        "config": {
            "surveys": list(args.surveys),
            "iterations": args.iterations,
            "depth": args.depth,
            "cutoff": args.cutoff,
            "bandwidth": args.bandwidth,
            "weights": list(weights) if args.weights is not None else None,
            "cap": None,
        },
        "defenses": list(game.defenses),
        "attacks": list(game.attacks),
        "profile": {"p": list(report.profile.p), "q": list(report.profile.q)},
        "expected_risk": report.expected_risk,
        "variance": report.variance,
        "zero_day_mass": report.zero_day_mass,
        "iterations": report.iterations,
        "depth_used": report.depth_used,
        "cutoff": game.cutoff,
        "value_distribution": _value_distribution_doc(
            report.value_distribution, game.cutoff
        ),
    }
    _emit(doc, args.out)
    return 0


def cmd_compare(args) -> int:
    loss_a = parse_loss(_read(args.loss_a), cutoff_override=args.cutoff)
    loss_b = parse_loss(_read(args.loss_b), cutoff_override=args.cutoff)
    verdict = losses.compare_losses(loss_a, loss_b, depth=args.depth)
    doc = {
        "verdict": verdict.relation,
        "preferred": {"less": "A", "greater": "B", "tie": None}[verdict.relation],
        "decided_at": None if verdict.is_tie else verdict.depth,
        "tie_depth": verdict.depth if verdict.is_tie else None,
        "depth": args.depth,
    }
    for label, loss in (("a", loss_a), ("b", loss_b)):
        entry: dict = {"kind": type(loss).__name__}
        if isinstance(loss, losses.KdeLoss):
            seq = losses.derivative_sequence(loss, args.depth)
            entry["cutoff"] = loss.cutoff
            entry["bandwidth"] = loss.bandwidth
            entry["derivative_sequence"] = list(seq.coefficients)
        elif isinstance(loss, losses.CategoricalLoss):
            entry["mass_descending_rank"] = list(loss.mass[::-1])
        else:
            entry["value"] = loss.value
        doc[label] = entry
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_weights(raw: str | None, goals: int) -> tuple[float, ...]:
    if raw is None:
        if goals == 1:
            return (1.0,)
        raise ValueError("multiple surveys need --weights")
    weights = tuple(float(w) for w in raw.split(","))
    if len(weights) != goals:
        raise ValueError(f"{goals} survey(s) but {len(weights)} weight(s)")
    return weights


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aptgames",
        description="Risk-averse defense policies from attack graphs and expert surveys.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_paths = sub.add_parser("paths", help="enumerate root-to-goal attack paths")
    p_paths.add_argument("graph", help="graph document (JSON)")
    p_paths.add_argument("--cap", type=int, default=10_000, help="path count cap")
    p_paths.add_argument("--out", default=None, help="report path (default: stdout)")
    p_paths.set_defaults(func=cmd_paths)

    p_solve = sub.add_parser("solve", help="solve the game built from survey(s)")
    p_solve.add_argument("surveys", nargs="+", help="survey document(s) (JSON)")
    p_solve.add_argument("--iterations", type=int, default=1000)
    p_solve.add_argument("--depth", type=int, default=losses.DEFAULT_DEPTH)
    p_solve.add_argument("--cutoff", type=float, default=None,
                         help="risk acceptance threshold (default: worst assessment)")
    p_solve.add_argument("--bandwidth", type=float, default=None,
                         help="kernel bandwidth override (default: Silverman per cell)")
    p_solve.add_argument("--weights", default=None,
                         help="comma-separated goal weights for multi-goal runs")
    p_solve.add_argument("--out", default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_cmp = sub.add_parser("compare", help="rank two loss documents")
    p_cmp.add_argument("loss_a")
    p_cmp.add_argument("loss_b")
    p_cmp.add_argument("--depth", type=int, default=losses.DEFAULT_DEPTH)
    p_cmp.add_argument("--cutoff", type=float, default=None,
                       help="common cutoff override for kde losses")
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
