"""Shared fixtures: the six-expert survey, the example attack graph, and the
distance-to-risk band table."""

from __future__ import annotations

import json

import pytest

from aptgames import build_game, parse_graph, parse_survey

# Ratings of residual risk after mitigation, six experts, sparse (silence
# allowed).  Scenario (defense, attack) -> per-expert categories.
SURVEY_RATINGS = {
    ("patching", "buffer overflow"): [
        ("1", "L"), ("2", "L"), ("3", "M"), ("4", "M"), ("5", "M"), ("6", "H"),
    ],
    ("service deactivation", "buffer overflow"): [
        ("2", "H"), ("3", "H"), ("5", "H"), ("6", "M"),
    ],
    ("patching", "remote access"): [
        ("1", "H"), ("3", "H"), ("4", "M"), ("5", "L"), ("6", "H"),
    ],
    ("service deactivation", "remote access"): [
        ("1", "M"), ("2", "L"), ("3", "L"), ("4", "M"), ("5", "M"),
    ],
}


def survey_doc_dict():
    ratings = [
        {"defense": d, "attack": a, "expert": e, "rating": r}
        for (d, a), votes in SURVEY_RATINGS.items()
        for e, r in votes
    ]
    return {
        "scale": ["L", "M", "H"],
        "defenses": ["patching", "service deactivation"],
        "attacks": ["buffer overflow", "remote access"],
        "ratings": ratings,
    }


@pytest.fixture(scope="session")
def survey_doc() -> str:
    return json.dumps(survey_doc_dict(), indent=2)


@pytest.fixture(scope="session")
def expert_survey(survey_doc):
    return parse_survey(survey_doc)


@pytest.fixture(scope="session")
def survey_game(expert_survey):
    return build_game(expert_survey)


# The three-machine example infrastructure: ftp/rsh/ssh exploits toward full
# access on machine 2.  Node ids double as predicate labels.
GRAPH_EDGES = [
    ("execute(0)", "ftp_rhosts(0,1)"),
    ("execute(0)", "ftp_rhosts(0,2)"),
    ("execute(0)", "rsh(0,1)"),
    ("execute(0)", "rsh(0,2)"),
    ("execute(0)", "sshd_bof(0,1)"),
    ("ftp_rhosts(0,1)", "rsh(0,1)"),
    ("ftp_rhosts(0,2)", "rsh(0,2)"),
    ("rsh(0,1)", "ftp_rhosts(1,2)"),
    ("rsh(0,1)", "rsh(1,2)"),
    ("rsh(0,2)", "local_bof(2)"),
    ("sshd_bof(0,1)", "ftp_rhosts(1,2)"),
    ("sshd_bof(0,1)", "rsh(1,2)"),
    ("ftp_rhosts(1,2)", "rsh(1,2)"),
    ("rsh(1,2)", "local_bof(2)"),
    ("local_bof(2)", "full_access(2)"),
]

# All eight intrusion scenarios, in the deterministic enumeration order.
EXPECTED_PATHS = [
    ["execute(0)", "ftp_rhosts(0,1)", "rsh(0,1)", "ftp_rhosts(1,2)", "rsh(1,2)",
     "local_bof(2)", "full_access(2)"],
    ["execute(0)", "ftp_rhosts(0,1)", "rsh(0,1)", "rsh(1,2)", "local_bof(2)",
     "full_access(2)"],
    ["execute(0)", "ftp_rhosts(0,2)", "rsh(0,2)", "local_bof(2)", "full_access(2)"],
    ["execute(0)", "rsh(0,1)", "ftp_rhosts(1,2)", "rsh(1,2)", "local_bof(2)",
     "full_access(2)"],
    ["execute(0)", "rsh(0,1)", "rsh(1,2)", "local_bof(2)", "full_access(2)"],
    ["execute(0)", "rsh(0,2)", "local_bof(2)", "full_access(2)"],
    ["execute(0)", "sshd_bof(0,1)", "ftp_rhosts(1,2)", "rsh(1,2)", "local_bof(2)",
     "full_access(2)"],
    ["execute(0)", "sshd_bof(0,1)", "rsh(1,2)", "local_bof(2)", "full_access(2)"],
]


def graph_doc_dict():
    node_ids = sorted({n for edge in GRAPH_EDGES for n in edge})
    return {
        "nodes": [{"id": n, "label": n} for n in node_ids],
        "edges": [{"from": u, "to": v} for u, v in GRAPH_EDGES],
        "root": "execute(0)",
        "goal": "full_access(2)",
    }


@pytest.fixture(scope="session")
def graph_doc() -> str:
    return json.dumps(graph_doc_dict(), indent=2)


@pytest.fixture(scope="session")
def example_graph(graph_doc):
    return parse_graph(graph_doc)


DISTANCE_BANDS = [(0, 2, "high"), (3, 6, "medium"), (7, 8, "low")]
