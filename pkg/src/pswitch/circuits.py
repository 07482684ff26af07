"""Exact representation and evaluation of two-terminal stochastic switching circuits.

Two circuit families are supported:

* series-parallel (sp) circuits, stored as expression trees whose leaves are
  pswitches (switches closed with a fixed rational probability), and
* general circuits, stored as undirected multigraphs with two distinguished
  terminal nodes and probability-labelled edges.

All probabilities are ``fractions.Fraction`` values and every evaluation is
exact; floating point never enters a computation.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

SERIES = "series"
PARALLEL = "parallel"

CLOSED = "closed"
OPEN = "open"

DEFAULT_EDGE_LIMIT = 30


class CircuitError(ValueError):
    """Malformed circuit or invalid circuit operation."""


class ProbabilityError(CircuitError):
    """A probability value outside its required range."""


class UnknownSwitchError(CircuitError):
    """A switch or edge identifier that does not occur in the circuit."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed its configured resource cap."""


def as_probability(value, *, allow_endpoints: bool = False) -> Fraction:
    """Coerce ``value`` to an exact probability.

    Floats are rejected so that inexact values can never leak in.  By default
    the open interval (0, 1) is enforced; ``allow_endpoints`` admits 0 and 1,
    which only internal constructions (conditioning, bound arguments) need.
    """
    if isinstance(value, float):
        raise ProbabilityError(f"refusing inexact float probability {value!r}")
    if not isinstance(value, (Fraction, int, numbers.Rational)):
        raise ProbabilityError(f"not a rational probability: {value!r}")
    prob = Fraction(value)
    if allow_endpoints:
        if not 0 <= prob <= 1:
            raise ProbabilityError(f"probability {prob} outside [0, 1]")
    elif not 0 < prob < 1:
        raise ProbabilityError(f"probability {prob} outside open interval (0, 1)")
    return prob


# ---------------------------------------------------------------------------
# sp circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    """A single pswitch.  Direct construction permits endpoint probabilities;
    the public ``leaf`` factory enforces the open interval (0, 1)."""

    prob: Fraction

    def __post_init__(self):
        object.__setattr__(self, "prob", as_probability(self.prob, allow_endpoints=True))


@dataclass(frozen=True)
class Series:
    children: tuple["SpCircuit", ...]

    def __post_init__(self):
        _check_children(self.children)


@dataclass(frozen=True)
class Parallel:
    children: tuple["SpCircuit", ...]

    def __post_init__(self):
        _check_children(self.children)


SpCircuit = Union[Leaf, Series, Parallel]


def _check_children(children) -> None:
    if not isinstance(children, tuple):
        raise CircuitError("children must be a tuple")
    if len(children) < 2:
        raise CircuitError("series/parallel nodes need at least 2 children")
    for child in children:
        if not isinstance(child, (Leaf, Series, Parallel)):
            raise CircuitError(f"not a circuit node: {child!r}")


def leaf(prob) -> Leaf:
    """A pswitch with probability strictly between 0 and 1."""
    return Leaf(as_probability(prob))


def _coerce(part) -> SpCircuit:
    if isinstance(part, (Leaf, Series, Parallel)):
        return part
    return leaf(part)


def _combine(node_type, parts) -> SpCircuit:
    flat: list[SpCircuit] = []
    for part in map(_coerce, parts):
        if isinstance(part, node_type):
            flat.extend(part.children)
        else:
            flat.append(part)
    if len(flat) == 1:
        return flat[0]
    return node_type(tuple(flat))


def series(*parts) -> SpCircuit:
    """Series composition; nested series children are flattened."""
    if len(parts) < 2:
        raise CircuitError("series() needs at least 2 parts")
    return _combine(Series, parts)


def parallel(*parts) -> SpCircuit:
    """Parallel composition; nested parallel children are flattened."""
    if len(parts) < 2:
        raise CircuitError("parallel() needs at least 2 parts")
    return _combine(Parallel, parts)


def size(circuit: SpCircuit) -> int:
    """Number of pswitches (leaves)."""
    if isinstance(circuit, Leaf):
        return 1
    return sum(size(child) for child in circuit.children)


def leaves(circuit: SpCircuit) -> tuple[Leaf, ...]:
    """Leaves in preorder; index in this tuple is the switch id."""
    if isinstance(circuit, Leaf):
        return (circuit,)
    out: list[Leaf] = []
    for child in circuit.children:
        out.extend(leaves(child))
    return tuple(out)


def leaf_probabilities(circuit: SpCircuit) -> tuple[Fraction, ...]:
    return tuple(lf.prob for lf in leaves(circuit))


def is_ssp(circuit: SpCircuit) -> bool:
    """Simple-series-parallel: grown one pswitch at a time, i.e. every
    internal node has at most one non-leaf child, recursively."""
    if isinstance(circuit, Leaf):
        return True
    big = [child for child in circuit.children if not isinstance(child, Leaf)]
    if len(big) > 1:
        return False
    return all(is_ssp(child) for child in big)


def eval_sp(circuit: SpCircuit) -> Fraction:
    """Exact closure probability: product across series, complement-product
    across parallel."""
    if isinstance(circuit, Leaf):
        return circuit.prob
    if isinstance(circuit, Series):
        result = Fraction(1)
        for child in circuit.children:
            result *= eval_sp(child)
        return result
    miss = Fraction(1)
    for child in circuit.children:
        miss *= 1 - eval_sp(child)
    return 1 - miss


def eval_sp_with(circuit: SpCircuit, overrides: Mapping[int, Fraction]) -> Fraction:
    """Evaluate with some leaf probabilities replaced.

    ``overrides`` maps preorder leaf index to a replacement value in [0, 1]
    (endpoints allowed: conditioning a switch closed/open is override 1/0).
    """
    checked = {
        key: as_probability(value, allow_endpoints=True)
        for key, value in overrides.items()
    }
    n = size(circuit)
    for key in checked:
        if not 0 <= key < n:
            raise UnknownSwitchError(f"no switch with index {key}")

    def walk(node: SpCircuit, offset: int) -> Fraction:
        if isinstance(node, Leaf):
            return checked.get(offset, node.prob)
        if isinstance(node, Series):
            result = Fraction(1)
            for child in node.children:
                result *= walk(child, offset)
                offset += size(child)
            return result
        miss = Fraction(1)
        for child in node.children:
            miss *= 1 - walk(child, offset)
            offset += size(child)
        return 1 - miss

    return walk(circuit, 0)


def dual(circuit: SpCircuit) -> SpCircuit:
    """Structural dual: series and parallel swap, every leaf p becomes 1-p.

    The closure probabilities of a circuit and its dual sum to 1, exactly.
    """
    if isinstance(circuit, Leaf):
        return Leaf(1 - circuit.prob)
    children = tuple(dual(child) for child in circuit.children)
    return Parallel(children) if isinstance(circuit, Series) else Series(children)


# ---------------------------------------------------------------------------
# general circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    prob: Fraction
    eid: str

    def __post_init__(self):
        object.__setattr__(self, "prob", as_probability(self.prob, allow_endpoints=True))
        if self.u == self.v:
            raise CircuitError(f"self-loop edge {self.eid} at node {self.u}")


@dataclass(frozen=True)
class GeneralCircuit:
    """Undirected multigraph with two terminals.

    Freshly built circuits have distinct terminals; conditioning an edge
    closed may merge them, in which case the closure probability is 1.
    """

    nodes: frozenset[str]
    edges: tuple[Edge, ...]
    terminals: tuple[str, str]

    def __post_init__(self):
        s, t = self.terminals
        if s not in self.nodes or t not in self.nodes:
            raise CircuitError("terminals must be circuit nodes")
        seen = set()
        for edge in self.edges:
            if edge.u not in self.nodes or edge.v not in self.nodes:
                raise CircuitError(f"edge {edge.eid} touches unknown node")
            if edge.eid in seen:
                raise CircuitError(f"duplicate edge id {edge.eid}")
            seen.add(edge.eid)

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(edge.eid for edge in self.edges)

    def edge(self, eid: str) -> Edge:
        for edge in self.edges:
            if edge.eid == eid:
                return edge
        raise UnknownSwitchError(f"no edge with id {eid!r}")

    @property
    def switch_count(self) -> int:
        return len(self.edges)


def general_circuit(
    edges: Iterable[Sequence], terminals: Sequence[str]
) -> GeneralCircuit:
    """Build a general circuit from ``(u, v, prob)`` or ``(u, v, prob, id)``
    tuples.  Missing ids are assigned ``e0, e1, ...`` in input order."""
    s, t = str(terminals[0]), str(terminals[1])
    if s == t:
        raise CircuitError("terminals must be distinct")
    built: list[Edge] = []
    for index, spec in enumerate(edges):
        if len(spec) == 3:
            u, v, prob = spec
            eid = f"e{index}"
        elif len(spec) == 4:
            u, v, prob, eid = spec
        else:
            raise CircuitError(f"edge spec needs 3 or 4 fields: {spec!r}")
        built.append(Edge(str(u), str(v), as_probability(prob), str(eid)))
    nodes = {s, t}
    for edge in built:
        nodes.add(edge.u)
        nodes.add(edge.v)
    return GeneralCircuit(frozenset(nodes), tuple(built), (s, t))


def _reachable(start: str, adjacency: Mapping[str, set[str]]) -> set[str]:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for other in adjacency.get(node, ()):
            if other not in seen:
                seen.add(other)
                frontier.append(other)
    return seen


def _factor(
    edges: list[tuple[str, str, Fraction]],
    s: str,
    t: str,
    choose: Callable[[list[tuple[str, str, Fraction]], str, str], int],
) -> Fraction:
    if s == t:
        return Fraction(1)
    adjacency: dict[str, set[str]] = {}
    for u, v, _ in edges:
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)
    component = _reachable(s, adjacency)
    if t not in component:
        return Fraction(0)
    live = [e for e in edges if e[0] in component]

    index = choose(live, s, t)
    u, v, prob = live[index]
    rest = live[:index] + live[index + 1 :]

    # closed: contract v into u, dropping any edges that become self-loops
    contracted = [e for e in ((a if a != v else u, b if b != v else u, p) for a, b, p in rest) if e[0] != e[1]]
    s2 = u if s == v else s
    t2 = u if t == v else t
    closed = _factor(contracted, s2, t2, choose)
    opened = _factor(rest, s, t, choose)
    return prob * closed + (1 - prob) * opened


def _terminal_pivot(edges: list[tuple[str, str, Fraction]], s: str, t: str) -> int:
    # depth shrinks fastest when the pivot touches a terminal
    for index, (u, v, _) in enumerate(edges):
        if s in (u, v):
            return index
    for index, (u, v, _) in enumerate(edges):
        if t in (u, v):
            return index
    return 0


def eval_general(
    circuit: GeneralCircuit,
    *,
    edge_limit: int = DEFAULT_EDGE_LIMIT,
    _choose: Callable | None = None,
) -> Fraction:
    """Exact closure probability by recursive edge factoring.

    Pivot on an edge e and combine p_e * P(e contracted) + (1-p_e) *
    P(e deleted); the result is independent of pivot order.  ``_choose``
    overrides the pivot heuristic (used to test order independence).
    """
    if len(circuit.edges) > edge_limit:
        raise ResourceLimitError(
            f"{len(circuit.edges)} edges exceeds factoring cap {edge_limit}"
        )
    edges = [(e.u, e.v, e.prob) for e in circuit.edges]
    return _factor(edges, circuit.terminals[0], circuit.terminals[1], _choose or _terminal_pivot)


def eval_general_with(
    circuit: GeneralCircuit,
    overrides: Mapping[str, Fraction],
    *,
    edge_limit: int = DEFAULT_EDGE_LIMIT,
) -> Fraction:
    """Evaluate with some edge probabilities replaced (endpoints allowed)."""
    known = set(circuit.edge_ids)
    for eid in overrides:
        if eid not in known:
            raise UnknownSwitchError(f"no edge with id {eid!r}")
    if len(circuit.edges) > edge_limit:
        raise ResourceLimitError(
            f"{len(circuit.edges)} edges exceeds factoring cap {edge_limit}"
        )
    edges = [
        (
            e.u,
            e.v,
            as_probability(overrides.get(e.eid, e.prob), allow_endpoints=True),
        )
        for e in circuit.edges
    ]
    return _factor(edges, circuit.terminals[0], circuit.terminals[1], _terminal_pivot)


def condition(circuit: GeneralCircuit, edge_id: str, state: str) -> GeneralCircuit:
    """Fix one switch: ``closed`` contracts the edge, ``open`` deletes it.

    Contraction may merge the two terminals; the resulting circuit then has
    closure probability 1 by definition.
    """
    target = circuit.edge(edge_id)
    rest = tuple(e for e in circuit.edges if e.eid != edge_id)
    s, t = circuit.terminals
    if state == OPEN:
        nodes = {s, t}
        for e in rest:
            nodes.add(e.u)
            nodes.add(e.v)
        return GeneralCircuit(frozenset(nodes), rest, (s, t))
    if state != CLOSED:
        raise CircuitError(f"state must be {OPEN!r} or {CLOSED!r}, got {state!r}")
    keep, drop = target.u, target.v
    renamed = []
    for e in rest:
        u = keep if e.u == drop else e.u
        v = keep if e.v == drop else e.v
        if u != v:
            renamed.append(Edge(u, v, e.prob, e.eid))
    s2 = keep if s == drop else s
    t2 = keep if t == drop else t
    nodes = {s2, t2}
    for e in renamed:
        nodes.add(e.u)
        nodes.add(e.v)
    return GeneralCircuit(frozenset(nodes), tuple(renamed), (s2, t2))


def sp_to_general(circuit: SpCircuit) -> GeneralCircuit:
    """Convert an sp tree into graph form.

    Edge ids are ``e<k>`` where k is the preorder leaf index, so switch
    identities agree between the two representations.
    """
    counter = iter(range(1, 10**9))
    leaf_index = iter(range(10**9))
    edges: list[Edge] = []

    def build(node: SpCircuit, a: str, b: str) -> None:
        if isinstance(node, Leaf):
            edges.append(Edge(a, b, node.prob, f"e{next(leaf_index)}"))
            return
        if isinstance(node, Series):
            prev = a
            for child in node.children[:-1]:
                nxt = f"n{next(counter)}"
                build(child, prev, nxt)
                prev = nxt
            build(node.children[-1], prev, b)
            return
        for child in node.children:
            build(child, a, b)

    build(circuit, "T1", "T2")
    nodes = {"T1", "T2"}
    for e in edges:
        nodes.add(e.u)
        nodes.add(e.v)
    return GeneralCircuit(frozenset(nodes), tuple(edges), ("T1", "T2"))
