"""Expert risk surveys and their compilation into a playable game.

Experts rate each defense-versus-attack scenario on an ordered category scale
(silence allowed).  Ratings become numeric ranks, each scenario's rank sample
becomes a kernel density cell, and the shared cutoff defaults to the most
pessimistic assessment anywhere in the game.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional

from .errors import ParseError
from .games import GameMatrix
from .losses import (
    DeterministicLoss,
    EmpiricalSample,
    KdeLoss,
    RiskScale,
    silverman_bandwidth,
)


@dataclass(frozen=True)
class SurveyRating:
    defense: str
    attack: str
    expert: str
    rating: str

    def __post_init__(self):
        for field in ("defense", "attack", "expert", "rating"):
            object.__setattr__(self, field, str(getattr(self, field)))


@dataclass(frozen=True)
class ExpertSurvey:
    """Sparse per-scenario, per-expert categorical ratings."""

    scale: RiskScale
    defenses: tuple[str, ...]
    attacks: tuple[str, ...]
    ratings: tuple[SurveyRating, ...]

    def __post_init__(self):
        object.__setattr__(self, "defenses", tuple(str(d) for d in self.defenses))
        object.__setattr__(self, "attacks", tuple(str(a) for a in self.attacks))
        object.__setattr__(self, "ratings", tuple(self.ratings))
        if len(set(self.defenses)) != len(self.defenses):
            raise ValueError("defense labels must be unique")
        if len(set(self.attacks)) != len(self.attacks):
            raise ValueError("attack labels must be unique")
        seen = set()
        for r in self.ratings:
            if r.defense not in self.defenses:
                raise ValueError(f"rating references unknown defense {r.defense!r}")
            if r.attack not in self.attacks:
                raise ValueError(f"rating references unknown attack {r.attack!r}")
            self.scale.rank_of(r.rating)  # raises on unknown category
            key = (r.defense, r.attack, r.expert)
            if key in seen:
                raise ValueError(f"duplicate rating for {key!r}")
            seen.add(key)

    def cell_ratings(self, defense: str, attack: str) -> tuple[str, ...]:
        """Categories uttered for one scenario, in document order."""
        return tuple(
            r.rating
            for r in self.ratings
            if r.defense == defense and r.attack == attack
        )


def parse_survey(text: str) -> ExpertSurvey:
    """Read a survey document.

    Expected fields: scale (ordered category labels), defenses, attacks, and
    ratings as a list of {defense, attack, expert, rating}.  Scenarios an
    expert was silent on are simply absent.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}", location=f"line {exc.lineno}") from None
    if not isinstance(doc, dict):
        raise ParseError("survey document must be a JSON object")
    for field in ("scale", "defenses", "attacks", "ratings"):
        if field not in doc:
            raise ParseError("missing field", location=field)
    if not isinstance(doc["scale"], list) or len(doc["scale"]) < 2:
        raise ParseError("scale must list at least 2 categories", location="scale")
    scale = RiskScale(categories=tuple(doc["scale"]))
    ratings = []
    for idx, entry in enumerate(doc["ratings"]):
        where = f"ratings[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError("rating must be an object", location=where)
        for key in ("defense", "attack", "expert", "rating"):
            if key not in entry:
                raise ParseError(f"missing {key!r}", location=where)
        if entry["rating"] not in scale.categories:
            raise ParseError(
                f"unknown rating {entry['rating']!r} "
                f"(scale: {', '.join(scale.categories)})",
                location=where,
            )
        ratings.append(
            SurveyRating(
                defense=entry["defense"],
                attack=entry["attack"],
                expert=entry["expert"],
                rating=entry["rating"],
            )
        )
    try:
        return ExpertSurvey(
            scale=scale,
            defenses=tuple(doc["defenses"]),
            attacks=tuple(doc["attacks"]),
            ratings=tuple(ratings),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def serialize_survey(survey: ExpertSurvey) -> str:
    """Inverse of :func:`parse_survey`; preserves the rating set exactly."""
    doc = {
        "scale": list(survey.scale.categories),
        "defenses": list(survey.defenses),
        "attacks": list(survey.attacks),
        "ratings": [
            {
                "defense": r.defense,
                "attack": r.attack,
                "expert": r.expert,
                "rating": r.rating,
            }
            for r in survey.ratings
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _rank_samples(survey: ExpertSurvey) -> dict[tuple[str, str], tuple[float, ...]]:
    return {
        (d, a): tuple(
            float(survey.scale.rank_of(c)) for c in survey.cell_ratings(d, a)
        )
        for d in survey.defenses
        for a in survey.attacks
    }


def default_cutoff(survey: ExpertSurvey) -> float:
    """The survey's most pessimistic value: the worst rating uttered anywhere,
    or the top rank where a scenario is empty (pessimistic default)."""
    top = float(survey.scale.top_rank)
    return max(
        max(pts) if pts else top for pts in _rank_samples(survey).values()
    )


def build_game(
    survey: ExpertSurvey,
    bandwidth: Optional[float] = None,
    cutoff: Optional[float] = None,
) -> GameMatrix:
    """Compile the survey into a game matrix.

    Every scenario's ratings map to ranks and become a kernel density with a
    Silverman bandwidth (unless overridden).  Scenarios nobody rated get a
    pessimistic point mass at the top rank; single-rating scenarios degrade to
    a point mass at that rank since the bandwidth rule needs two points.  The
    game cutoff defaults to the most pessimistic value present in any cell.
    """
    samples = _rank_samples(survey)
    top = float(survey.scale.top_rank)
    if cutoff is None:
        cutoff = default_cutoff(survey)
        if not cutoff > 1.0:
            raise ValueError(
                "every rating sits at the lowest rank, so the default cutoff "
                "is 1; pass an explicit cutoff above 1"
            )
    if not cutoff > 1.0:
        raise ValueError(f"game cutoff must exceed 1, got {cutoff!r}")
    cells = []
    for d in survey.defenses:
        row = []
        for a in survey.attacks:
            pts = samples[(d, a)]
            if not pts:
                row.append(DeterministicLoss(value=top))
            elif len(pts) == 1:
                warnings.warn(
                    f"scenario ({d!r}, {a!r}) has a single rating; "
                    "using a point mass instead of a density",
                    stacklevel=2,
                )
                row.append(DeterministicLoss(value=pts[0]))
            else:
                sample = EmpiricalSample(points=pts)
                h = bandwidth if bandwidth is not None else silverman_bandwidth(sample)
                row.append(KdeLoss(sample=sample, bandwidth=h, cutoff=cutoff))
        cells.append(tuple(row))
    return GameMatrix(
        defenses=survey.defenses,
        attacks=survey.attacks,
        cells=tuple(cells),
        cutoff=cutoff,
    )
