import datetime

import pytest

from tkgbench.facts import Quadruple, TemporalKnowledgeGraph
from tkgbench.schema import Schema


def q(subject, relation, obj, iso_date):
    return Quadruple(subject, relation, obj, datetime.date.fromisoformat(iso_date))


def d(iso_date):
    return datetime.date.fromisoformat(iso_date)


@pytest.fixture
def toy_schema():
    return Schema(
        class_parents={
            "Person": [],
            "Athlete": ["Person"],
            "Coach": ["Person"],
            "Organization": [],
            "Club": ["Organization"],
            "FootballClub": ["Club"],
            "Place": [],
            "City": ["Place"],
            "Award": [],
        },
        entity_classes={
            **{f"P{i}": ["Athlete"] for i in range(1, 13)},
            **{f"C{i}": ["FootballClub"] for i in range(1, 7)},
            "Linus Torvalds": ["Person"],
            "Taipei": ["City"],
            "Turing Award": ["Award"],
        },
        relation_constraints={
            "memberOf": (["Person"], ["Organization"]),
            "worksFor": (["Person"], ["Organization"]),
            "award": (["Person"], ["Award"]),
            "doctoralAdvisor": (["Person"], ["Person"]),
        },
    )


@pytest.fixture
def membership_graph():
    """Small periodic graph: members join a club, then start working for it."""
    facts = []
    for i in range(1, 7):
        facts.append(q(f"P{i}", "startMemberOf", f"C{(i % 3) + 1}", f"2020-0{i}-01"))
        facts.append(q(f"P{i}", "startWorksFor", f"C{(i % 3) + 1}", f"2020-0{i}-15"))
    return TemporalKnowledgeGraph(facts)
