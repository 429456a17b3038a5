"""Entity-class ontology: class membership, inheritance graph, relation
domain/range constraints and the shortest-path class distance.

Schema JSON layout:

    {
      "classes":   {"<class>": ["<parent>", ...], ...},
      "entities":  {"<entity_id>": ["<class>", ...], ...},
      "relations": {"<base_relation>": {"subjects": [...], "objects": [...]}}
    }

Constraints are recorded against base relations; lookups for start-of/end-of
relations resolve to the base. Constraint satisfaction walks the ancestor
closure: an entity of a subclass satisfies a superclass constraint. The
class distance treats the inheritance graph as undirected, so sibling
classes are finitely distant.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Mapping, Optional

from .errors import DataError, UnknownEntityError
from .facts import Quadruple, base_relation
from .io import read_json

INFINITY = math.inf


class Schema:
    def __init__(
        self,
        class_parents: Mapping[str, Iterable[str]],
        entity_classes: Mapping[str, Iterable[str]],
        relation_constraints: Optional[
            Mapping[str, tuple[Iterable[str], Iterable[str]]]
        ] = None,
    ):
        self.class_parents = {
            c: frozenset(parents) for c, parents in class_parents.items()
        }
        for c, parents in self.class_parents.items():
            if c in parents:
                raise DataError(f"schema class {c!r} lists itself as a parent")
        known = set(self.class_parents)
        for parents in self.class_parents.values():
            known.update(parents)

        self.entity_classes = {}
        for entity, classes in entity_classes.items():
            cs = frozenset(classes)
            if not cs:
                raise DataError(f"schema entity {entity!r} has an empty class set")
            self.entity_classes[entity] = cs
            known.update(cs)

        self.relation_constraints: dict[str, tuple[frozenset, frozenset]] = {}
        for rel, (subjects, objects) in (relation_constraints or {}).items():
            subjects = frozenset(subjects)
            objects = frozenset(objects)
            unknown = (subjects | objects) - known
            if unknown:
                raise DataError(
                    f"relation {rel!r} constrains unknown classes {sorted(unknown)}"
                )
            self.relation_constraints[rel] = (subjects, objects)

        self.known_classes = frozenset(known)
        # Undirected adjacency over the inheritance graph.
        adj: dict[str, set[str]] = {c: set() for c in known}
        for c, parents in self.class_parents.items():
            for p in parents:
                adj[c].add(p)
                adj[p].add(c)
        self._adjacency = {c: frozenset(n) for c, n in adj.items()}
        self._ancestors: dict[str, frozenset] = {}
        self._bfs_cache: dict[str, dict[str, int]] = {}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Schema":
        constraints = {
            rel: (spec.get("subjects", []), spec.get("objects", []))
            for rel, spec in data.get("relations", {}).items()
        }
        return cls(data.get("classes", {}), data.get("entities", {}), constraints)

    @classmethod
    def load(cls, path) -> "Schema":
        return cls.from_json_dict(read_json(path))

    def to_json_dict(self) -> dict:
        return {
            "classes": {c: sorted(p) for c, p in self.class_parents.items()},
            "entities": {e: sorted(c) for e, c in self.entity_classes.items()},
            "relations": {
                rel: {"subjects": sorted(s), "objects": sorted(o)}
                for rel, (s, o) in self.relation_constraints.items()
            },
        }

    def classes_of(self, entity: str) -> frozenset:
        try:
            return self.entity_classes[entity]
        except KeyError:
            raise UnknownEntityError(entity) from None

    def ancestors(self, cls_name: str) -> frozenset:
        """Transitive parent closure of a class, including the class itself."""
        cached = self._ancestors.get(cls_name)
        if cached is not None:
            return cached
        closure = {cls_name}
        frontier = deque([cls_name])
        while frontier:
            cur = frontier.popleft()
            for parent in self.class_parents.get(cur, ()):
                if parent not in closure:
                    closure.add(parent)
                    frontier.append(parent)
        result = frozenset(closure)
        self._ancestors[cls_name] = result
        return result

    def _satisfies(self, entity: str, allowed: frozenset) -> bool:
        for c in self.classes_of(entity):
            if self.ancestors(c) & allowed:
                return True
        return False

    def allowed_subject(self, entity: str, relation: str) -> bool:
        """True when the entity may be the subject of the relation.

        Relations with no recorded constraint allow all subjects. Raises
        UnknownEntityError for entities without classes, which is distinct
        from returning False.
        """
        constraint = self.relation_constraints.get(base_relation(relation))
        if constraint is None:
            self.classes_of(entity)
            return True
        return self._satisfies(entity, constraint[0])

    def allowed_object(self, entity: str, relation: str) -> bool:
        constraint = self.relation_constraints.get(base_relation(relation))
        if constraint is None:
            self.classes_of(entity)
            return True
        return self._satisfies(entity, constraint[1])

    def valid_object(self, quadruple: Quadruple) -> bool:
        """Object-side constraint check for a candidate quadruple."""
        return self.allowed_object(quadruple.object, quadruple.relation)

    def valid_quadruple(self, quadruple: Quadruple) -> bool:
        """Full schema validity: subject and object constraints both hold."""
        return self.allowed_subject(
            quadruple.subject, quadruple.relation
        ) and self.valid_object(quadruple)

    def _class_distances_from(self, cls_name: str) -> dict[str, int]:
        cached = self._bfs_cache.get(cls_name)
        if cached is not None:
            return cached
        dist = {cls_name: 0}
        frontier = deque([cls_name])
        while frontier:
            cur = frontier.popleft()
            for nxt in self._adjacency.get(cur, ()):
                if nxt not in dist:
                    dist[nxt] = dist[cur] + 1
                    frontier.append(nxt)
        self._bfs_cache[cls_name] = dist
        return dist

    def min_class_distance(self, classes_a: Iterable[str], classes_b) -> float:
        """Minimum shortest-path length between two class sets; inf if none."""
        best = INFINITY
        classes_b = tuple(classes_b)
        for ca in classes_a:
            dist = self._class_distances_from(ca)
            for cb in classes_b:
                d = dist.get(cb)
                if d is not None and d < best:
                    best = d
        return best

    def class_distance(self, a: str, b: str) -> float:
        """Shortest-path distance between the class sets of two entities.

        Minimum over all class pairs of the unweighted shortest path in the
        inheritance graph, treated as undirected; inf when no path exists.
        """
        return self.min_class_distance(self.classes_of(a), self.classes_of(b))
