"""Multi-parent classification hierarchies for treatments, indications, trial
types and ADE categories.

The hierarchy is a DAG (multiple inheritance allowed) loaded from a flat
line-based file, one node per line::

    id|kind|label_en|label_fr|parent_id;parent_id;...

Lines starting with ``#`` are comments; an empty parent list marks a root.
Node ids are unique across the whole taxonomy and namespaced by kind:
subsumption queries that cross kinds are rejected.

A Taxonomy is immutable after loading, so it is safe for unlimited
concurrent readers; replacing it means swapping in a freshly loaded one.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum


class NodeKind(str, Enum):
    ACTIVE_PRINCIPLE = "active_principle"
    INDICATION = "indication"
    TRIAL_TYPE = "trial_type"
    ADE_CATEGORY = "ade_category"


#: Conventional node id for the placebo pseudo active principle.  Placebo is
#: an ordinary taxonomy node so that placebo groups match with the same
#: machinery as any other treatment.
PLACEBO_ID = "placebo"


class TaxonomyError(ValueError):
    """Base class for taxonomy loading and query failures."""


class TaxonomyFormatError(TaxonomyError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateNodeError(TaxonomyError):
    def __init__(self, node_id: str, line_no: int):
        super().__init__(f"line {line_no}: duplicate node id {node_id!r}")
        self.node_id = node_id


class DanglingParentError(TaxonomyError):
    def __init__(self, node_id: str, parent_id: str):
        super().__init__(f"node {node_id!r} references unknown parent {parent_id!r}")
        self.node_id = node_id
        self.parent_id = parent_id


class TaxonomyCycleError(TaxonomyError):
    def __init__(self, node_ids: frozenset[str]):
        names = ", ".join(sorted(node_ids))
        super().__init__(f"cycle detected among nodes: {names}")
        self.node_ids = node_ids


class UnknownNodeError(TaxonomyError):
    def __init__(self, node_id: str):
        super().__init__(f"unknown taxonomy id {node_id!r}")
        self.node_id = node_id


class CrossKindQueryError(TaxonomyError):
    def __init__(self, node_id: str, ancestor_id: str):
        super().__init__(
            f"subsumption query crosses kinds: {node_id!r} vs {ancestor_id!r}"
        )


@dataclass(frozen=True)
class TaxonomyNode:
    """One node of the classification DAG.

    ``labels`` maps language codes ("en", "fr") to display strings; the "en"
    label is mandatory and nonempty.  ``parents`` may name several nodes of
    the same kind (multiple inheritance).
    """

    id: str
    kind: NodeKind
    labels: dict[str, str]
    parents: frozenset[str]

    def label(self, lang: str = "en") -> str:
        """Display label in ``lang``, falling back to English."""
        return self.labels.get(lang) or self.labels["en"]


class Taxonomy:
    """Validated, immutable classification DAG with subsumption queries."""

    def __init__(self, nodes: dict[str, TaxonomyNode]):
        self._nodes = dict(sorted(nodes.items()))
        self._by_kind: dict[NodeKind, frozenset[str]] = {}
        kinds: dict[NodeKind, set[str]] = {k: set() for k in NodeKind}
        for node in self._nodes.values():
            kinds[node.kind].add(node.id)
        self._by_kind = {k: frozenset(v) for k, v in kinds.items()}
        self._children: dict[str, set[str]] = {nid: set() for nid in self._nodes}
        for node in self._nodes.values():
            for pid in node.parents:
                self._children[pid].add(node.id)
        self._ancestors_cache: dict[str, frozenset[str]] = {}

    # -- basic access -----------------------------------------------------

    @property
    def nodes(self) -> dict[str, TaxonomyNode]:
        return self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Taxonomy) and self._nodes == other._nodes

    def node(self, node_id: str) -> TaxonomyNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def ids_of_kind(self, kind: NodeKind) -> frozenset[str]:
        return self._by_kind[kind]

    # -- subsumption ------------------------------------------------------

    def ancestors_or_self(self, node_id: str) -> frozenset[str]:
        """Upward closure of ``node_id``, including itself."""
        cached = self._ancestors_cache.get(node_id)
        if cached is not None:
            return cached
        node = self.node(node_id)
        closure = {node_id}
        for pid in node.parents:
            closure |= self.ancestors_or_self(pid)
        result = frozenset(closure)
        self._ancestors_cache[node_id] = result
        return result

    def is_descendant_or_self(self, node_id: str, ancestor_id: str) -> bool:
        """True iff ``ancestor_id`` is reachable from ``node_id`` via zero or
        more parent edges.  Both ids must exist and share a kind."""
        node = self.node(node_id)
        ancestor = self.node(ancestor_id)
        if node.kind != ancestor.kind:
            raise CrossKindQueryError(node_id, ancestor_id)
        return ancestor_id in self.ancestors_or_self(node_id)

    def descendants_or_self(self, node_id: str) -> frozenset[str]:
        """Full downward closure of ``node_id``, including itself."""
        self.node(node_id)
        seen = {node_id}
        queue = deque([node_id])
        while queue:
            for child in self._children[queue.popleft()]:
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
        return frozenset(seen)

    # -- autocompletion ---------------------------------------------------

    def autocomplete(
        self, fragment: str, kind: NodeKind, lang: str = "en", limit: int = 10
    ) -> list[tuple[str, str]]:
        """Nodes of ``kind`` whose label contains ``fragment`` case-insensitively.

        Ranked by (match position, label length, label); an empty fragment
        simply returns the first ``limit`` labels alphabetically.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        needle = fragment.strip().lower()
        entries: list[tuple[tuple, str, str]] = []
        for nid in self._by_kind[kind]:
            label = self._nodes[nid].label(lang)
            if not needle:
                entries.append(((label.lower(), nid), nid, label))
                continue
            pos = label.lower().find(needle)
            if pos < 0:
                continue
            entries.append(((pos, len(label), label.lower(), nid), nid, label))
        entries.sort(key=lambda e: e[0])
        return [(nid, label) for _, nid, label in entries[:limit]]


# -- loading & serialization ------------------------------------------------

_FIELD_COUNT = 5


def load_taxonomy(document: str) -> Taxonomy:
    """Parse and validate the flat taxonomy format.

    Raises TaxonomyFormatError / DuplicateNodeError / DanglingParentError /
    TaxonomyCycleError; error messages carry line numbers or the offending
    node ids.
    """
    nodes: dict[str, TaxonomyNode] = {}
    for line_no, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("|")
        if len(fields) != _FIELD_COUNT:
            raise TaxonomyFormatError(
                line_no, f"expected {_FIELD_COUNT} '|'-separated fields, got {len(fields)}"
            )
        node_id, kind_str, label_en, label_fr, parents_str = (f.strip() for f in fields)
        if not node_id:
            raise TaxonomyFormatError(line_no, "empty node id")
        if node_id in nodes:
            raise DuplicateNodeError(node_id, line_no)
        try:
            kind = NodeKind(kind_str)
        except ValueError:
            raise TaxonomyFormatError(line_no, f"unknown kind {kind_str!r}") from None
        if not label_en:
            raise TaxonomyFormatError(line_no, f"node {node_id!r} has no English label")
        labels = {"en": label_en}
        if label_fr:
            labels["fr"] = label_fr
        parents = frozenset(p.strip() for p in parents_str.split(";") if p.strip())
        nodes[node_id] = TaxonomyNode(id=node_id, kind=kind, labels=labels, parents=parents)

    for node in nodes.values():
        for pid in node.parents:
            parent = nodes.get(pid)
            if parent is None:
                raise DanglingParentError(node.id, pid)
            if parent.kind != node.kind:
                raise DanglingParentError(node.id, pid)

    _reject_cycles(nodes)
    return Taxonomy(nodes)


def _reject_cycles(nodes: dict[str, TaxonomyNode]) -> None:
    # Iterative DFS over parent edges; a back edge exposes the cycle nodes.
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in nodes}
    for root in sorted(nodes):
        if color[root] != WHITE:
            continue
        stack: list[tuple[str, list[str]]] = [(root, sorted(nodes[root].parents))]
        path = [root]
        color[root] = GRAY
        while stack:
            nid, parents = stack[-1]
            if parents:
                pid = parents.pop(0)
                if color[pid] == GRAY:
                    cycle = path[path.index(pid):] if pid in path else [pid, nid]
                    raise TaxonomyCycleError(frozenset(cycle))
                if color[pid] == WHITE:
                    color[pid] = GRAY
                    path.append(pid)
                    stack.append((pid, sorted(nodes[pid].parents)))
            else:
                color[nid] = BLACK
                stack.pop()
                path.pop()


def serialize_taxonomy(taxonomy: Taxonomy) -> str:
    """Inverse of load_taxonomy, with nodes and parent lists sorted."""
    lines = []
    for nid, node in taxonomy.nodes.items():
        lines.append(
            "|".join(
                (
                    nid,
                    node.kind.value,
                    node.labels["en"],
                    node.labels.get("fr", ""),
                    ";".join(sorted(node.parents)),
                )
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
