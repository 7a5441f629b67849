"""Linear path models over directed acyclic graphs.

A model is a set of named variables, directed structural edges carrying
coefficients, and optional derived variables defined as fixed-weight linear
combinations of structural variables (the gain score D = Y2 - Y1 being the
canonical one).  Derived variables behave like zero-noise nodes whose
incoming edges carry the combination weights.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    CycleError,
    DataError,
    NodeCapError,
    ParseError,
    SimultaneityError,
    UnknownVariableError,
)

VARIABLE_KINDS = ("exogenous-latent", "exposure", "outcome", "derived")

#: Default cap on model size for exhaustive path enumeration.
DEFAULT_NODE_CAP = 32

OPEN = "open"
CLOSED_BY_CONDITIONING = "closed-by-conditioning"
CLOSED_BY_COLLIDER = "closed-by-collider"


@dataclass(frozen=True)
class Variable:
    """A node of the model; noise_variance is the variance of its own disturbance."""

    name: str
    kind: str
    noise_variance: float = 1.0


@dataclass(frozen=True)
class Edge:
    """Directed edge source -> target with a structural coefficient.

    The optional label is a display tag (for example "theta"); it never
    enters any computation.
    """

    source: str
    target: str
    coefficient: float
    label: str = ""


@dataclass(frozen=True)
class PathModel:
    """Validated DAG of structural edges plus derived-variable definitions."""

    variables: tuple[Variable, ...]
    edges: tuple[Edge, ...]
    derived: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariableError(f"unknown variable {name!r}")

    def derived_names(self) -> frozenset[str]:
        return frozenset(self.derived)

    def all_edges(self) -> tuple[Edge, ...]:
        """Structural edges plus the fixed-weight edges into derived variables."""
        extra = tuple(
            Edge(src, name, float(w), label=_weight_label(w))
            for name, weights in self.derived.items()
            for src, w in weights.items()
        )
        return self.edges + extra

    def coefficient(self, source: str, target: str) -> float:
        for e in self.all_edges():
            if e.source == source and e.target == target:
                return e.coefficient
        raise UnknownVariableError(f"no edge {source} -> {target}")

    def with_coefficients(self, updates: Mapping[tuple[str, str], float]) -> "PathModel":
        """Copy of the model with the given (source, target) coefficients replaced."""
        missing = set(updates) - {(e.source, e.target) for e in self.edges}
        if missing:
            raise UnknownVariableError(f"no such edges: {sorted(missing)}")
        edges = tuple(
            Edge(e.source, e.target, float(updates.get((e.source, e.target), e.coefficient)), e.label)
            for e in self.edges
        )
        return PathModel(self.variables, edges, self.derived)


@dataclass(frozen=True)
class Path:
    """A simple path between two variables, direction-annotated per step."""

    nodes: tuple[str, ...]
    edge_directions: tuple[str, ...]  # "forward" or "backward" per step
    status: str  # open / closed-by-conditioning / closed-by-collider
    causal: bool  # True when every step runs forward


def _weight_label(w: float) -> str:
    return "+1" if float(w) > 0 else ("-1" if float(w) < 0 else "0")


def build_model(spec: Mapping) -> PathModel:
    """Validate a model specification mapping and return a PathModel.

    Raises UnknownVariableError for dangling names, SimultaneityError when a
    reciprocal edge pair carries two nonzero coefficients, and CycleError for
    any other directed cycle.
    """
    try:
        raw_vars = list(spec["variables"])
    except (KeyError, TypeError):
        raise DataError("model spec needs a 'variables' list")
    raw_edges = list(spec.get("edges", []))
    raw_derived = dict(spec.get("derived", {}))

    variables = []
    seen = set()
    for rv in raw_vars:
        name = str(rv["name"])
        kind = str(rv.get("kind", "outcome"))
        if kind not in VARIABLE_KINDS:
            raise DataError(f"variable {name!r} has unknown kind {kind!r}")
        default_noise = 0.0 if kind == "derived" else 1.0
        noise = float(rv.get("noise_variance", default_noise))
        if name in seen:
            raise DataError(f"duplicate variable name {name!r}")
        if noise < 0:
            raise DataError(f"variable {name!r} has negative noise variance")
        if kind == "derived" and noise != 0.0:
            raise DataError(f"derived variable {name!r} must have zero noise variance")
        seen.add(name)
        variables.append(Variable(name, kind, noise))
    if not variables:
        raise DataError("model spec has no variables")

    names = {v.name for v in variables}
    derived_names = {v.name for v in variables if v.kind == "derived"}
    if set(raw_derived) != derived_names:
        extra = set(raw_derived) - derived_names
        missing = derived_names - set(raw_derived)
        if extra:
            raise UnknownVariableError(f"derived definition for non-derived variable {sorted(extra)}")
        raise DataError(f"derived variables without definitions: {sorted(missing)}")

    edges = []
    pairs = set()
    for re_ in raw_edges:
        src = str(re_.get("from", re_.get("source")))
        dst = str(re_.get("to", re_.get("target")))
        if src not in names:
            raise UnknownVariableError(f"edge references unknown variable {src!r}")
        if dst not in names:
            raise UnknownVariableError(f"edge references unknown variable {dst!r}")
        if src == dst:
            raise CycleError(f"self-loop on {src!r}")
        if src in derived_names or dst in derived_names:
            raise DataError("derived variables cannot take part in structural edges")
        if (src, dst) in pairs:
            raise DataError(f"duplicate edge {src} -> {dst}")
        pairs.add((src, dst))
        coef = float(re_["coefficient"])
        edges.append(Edge(src, dst, coef, str(re_.get("label", ""))))

    coef_by_pair = {(e.source, e.target): e.coefficient for e in edges}
    for a, b in sorted(pairs):
        if (b, a) in pairs and a < b:
            if coef_by_pair[(a, b)] != 0.0 and coef_by_pair[(b, a)] != 0.0:
                raise SimultaneityError(
                    f"reciprocal edges {a} -> {b} and {b} -> {a} both have nonzero coefficients"
                )

    derived = {}
    for name, weights in raw_derived.items():
        clean = {}
        for src, w in dict(weights).items():
            if src not in names:
                raise UnknownVariableError(f"derived {name!r} references unknown variable {src!r}")
            if src in derived_names:
                raise DataError(f"derived {name!r} may only combine structural variables")
            clean[str(src)] = float(w)
        if not clean:
            raise DataError(f"derived variable {name!r} has an empty definition")
        derived[name] = clean

    model = PathModel(tuple(variables), tuple(edges), derived)
    topological_order(model)  # raises CycleError on any remaining cycle
    return model


def model_to_spec(model: PathModel) -> dict:
    """Inverse of build_model: a JSON-ready mapping."""
    return {
        "variables": [
            {"name": v.name, "kind": v.kind, "noise_variance": v.noise_variance}
            for v in model.variables
        ],
        "edges": [
            {"from": e.source, "to": e.target, "coefficient": e.coefficient, "label": e.label}
            for e in model.edges
        ],
        "derived": {name: dict(w) for name, w in model.derived.items()},
    }


def load_model_json(path: str) -> PathModel:
    """Read a model specification from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return build_model(spec)


def _adjacency(model: PathModel):
    """Children/parents maps over structurally present (nonzero) edges."""
    children: dict[str, dict[str, float]] = {v.name: {} for v in model.variables}
    parents: dict[str, dict[str, float]] = {v.name: {} for v in model.variables}
    for e in model.all_edges():
        if e.coefficient == 0.0:
            continue
        children[e.source][e.target] = e.coefficient
        parents[e.target][e.source] = e.coefficient
    return children, parents


def topological_order(model: PathModel) -> tuple[str, ...]:
    """Kahn's algorithm with lexicographic tie-breaking among ready nodes."""
    children, parents = _adjacency(model)
    indegree = {name: len(ps) for name, ps in parents.items()}
    ready = sorted(name for name, deg in indegree.items() if deg == 0)
    order = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        inserted = False
        for child in children[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
                inserted = True
        if inserted:
            ready.sort()
    if len(order) != len(model.variables):
        stuck = sorted(name for name, deg in indegree.items() if deg > 0)
        raise CycleError(f"directed cycle through {stuck}")
    return tuple(order)


def descendants(model: PathModel, name: str) -> frozenset[str]:
    """All variables reachable from `name` along directed edges (excluding itself)."""
    children, _ = _adjacency(model)
    if name not in children:
        raise UnknownVariableError(f"unknown variable {name!r}")
    out: set[str] = set()
    stack = list(children[name])
    while stack:
        node = stack.pop()
        if node in out:
            continue
        out.add(node)
        stack.extend(children[node])
    return frozenset(out)


def _check_conditioning(model: PathModel, conditioning, allow_derived: bool) -> frozenset[str]:
    names = set(model.names())
    derived = model.derived_names()
    cond = []
    for c in conditioning:
        if c not in names:
            raise UnknownVariableError(f"unknown conditioning variable {c!r}")
        if c in derived and not allow_derived:
            raise DataError(
                f"conditioning on derived variable {c!r} requires allow_derived_conditioning=True"
            )
        cond.append(c)
    return frozenset(cond)


def _classify(model: PathModel, nodes, directions, conditioning) -> tuple[str, bool]:
    causal = all(d == "forward" for d in directions)
    for i in range(1, len(nodes) - 1):
        v = nodes[i]
        into_left = directions[i - 1] == "forward"  # previous edge points into v
        into_right = directions[i] == "backward"  # next edge points into v
        collider = into_left and into_right
        if collider:
            if v not in conditioning and not (descendants(model, v) & conditioning):
                return CLOSED_BY_COLLIDER, causal
        else:
            if v in conditioning:
                return CLOSED_BY_CONDITIONING, causal
    return OPEN, causal


def enumerate_paths(
    model: PathModel,
    x: str,
    y: str,
    conditioning: Iterable[str] = (),
    *,
    include_closed_by_collider: bool = False,
    allow_derived_conditioning: bool = False,
    max_nodes: int = DEFAULT_NODE_CAP,
) -> tuple[Path, ...]:
    """Every simple path between x and y, with d-separation status per path.

    Paths blocked at an unconditioned collider transmit nothing regardless of
    the conditioning set, so by default they are left out of the listing;
    pass include_closed_by_collider=True for the exhaustive set.  Order is
    deterministic: depth-first with lexicographic neighbor visits.
    """
    if len(model.variables) > max_nodes:
        raise NodeCapError(
            f"model has {len(model.variables)} variables; cap is {max_nodes}"
        )
    names = set(model.names())
    for endpoint in (x, y):
        if endpoint not in names:
            raise UnknownVariableError(f"unknown variable {endpoint!r}")
    if x == y:
        raise DataError("path endpoints must be distinct")
    cond = _check_conditioning(model, conditioning, allow_derived_conditioning)

    children, parents = _adjacency(model)
    neighbors: dict[str, list[tuple[str, str]]] = {n: [] for n in names}
    for n in names:
        for c in children[n]:
            neighbors[n].append((c, "forward"))
        for p in parents[n]:
            neighbors[n].append((p, "backward"))
        neighbors[n].sort()

    found: list[Path] = []

    def walk(node: str, visited: list[str], directions: list[str]):
        for nxt, direction in neighbors[node]:
            if nxt == y:
                nodes = tuple(visited + [nxt])
                dirs = tuple(directions + [direction])
                status, causal = _classify(model, nodes, dirs, cond)
                if status != CLOSED_BY_COLLIDER or include_closed_by_collider:
                    found.append(Path(nodes, dirs, status, causal))
            elif nxt not in visited:
                walk(nxt, visited + [nxt], directions + [direction])

    walk(x, [x], [])
    return tuple(found)


def d_separated(
    model: PathModel,
    x: str,
    y: str,
    conditioning: Iterable[str] = (),
    *,
    allow_derived_conditioning: bool = False,
    max_nodes: int = DEFAULT_NODE_CAP,
) -> bool:
    """True when every simple path between x and y is closed given the conditioning set."""
    paths = enumerate_paths(
        model,
        x,
        y,
        conditioning,
        include_closed_by_collider=True,
        allow_derived_conditioning=allow_derived_conditioning,
        max_nodes=max_nodes,
    )
    return all(p.status != OPEN for p in paths)


def path_coefficient_product(model: PathModel, path: Path) -> float:
    """Product of edge coefficients along the path, traversal direction ignored."""
    coef = {}
    for e in model.all_edges():
        coef[(e.source, e.target)] = e.coefficient
    product = 1.0
    for i, direction in enumerate(path.edge_directions):
        a, b = path.nodes[i], path.nodes[i + 1]
        product *= coef[(a, b)] if direction == "forward" else coef[(b, a)]
    return product


def path_label(model: PathModel, path: Path) -> str:
    """Symbolic tag for a path: structural edge labels joined with '*'.

    The fixed +/-1 weights on derived edges fold into a leading sign.
    """
    coef = {}
    labels = {}
    for e in model.all_edges():
        coef[(e.source, e.target)] = e.coefficient
        labels[(e.source, e.target)] = e.label
    derived = model.derived_names()
    sign = 1.0
    parts = []
    for i, direction in enumerate(path.edge_directions):
        a, b = path.nodes[i], path.nodes[i + 1]
        key = (a, b) if direction == "forward" else (b, a)
        if key[1] in derived:
            sign *= 1.0 if coef[key] > 0 else -1.0
        else:
            parts.append(labels[key] or f"b({key[0]}->{key[1]})")
    body = "*".join(parts) if parts else "1"
    return body if sign > 0 else "-" + body
