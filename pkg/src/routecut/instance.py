"""CARP instance model and the classic benchmark DAT file format.

An instance is an undirected graph with a depot, a vehicle capacity, and a
set of required edges (tasks).  Each task is addressed through two directed
IDs, one per traversal direction; ID 0 is reserved for the depot dummy that
marks route boundaries.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

DEPOT_ID = 0

Number = Union[int, float]


def task_index_of(task_id: int) -> int:
    """0-based task index addressed by a directed task ID (ID 0 is the depot)."""
    return (task_id - 1) >> 1


def forward_id(task_index: int) -> int:
    return 2 * task_index + 1


def inverse_id(task_id: int) -> int:
    """The opposite-direction ID; the depot dummy is its own inverse."""
    if task_id == DEPOT_ID:
        return DEPOT_ID
    return task_id + 1 if task_id & 1 else task_id - 1


class InstanceFormatError(ValueError):
    """Malformed instance file; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidInstanceError(ValueError):
    """Instance parses but violates a semantic invariant."""


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    demand: Number = 0
    service_cost: Number = 0
    deadheading_cost: Number = 0

    @property
    def required(self) -> bool:
        return self.demand > 0


@dataclass(frozen=True)
class Task:
    """A required edge plus its two directed IDs.

    The forward ID traverses u -> v, the reverse ID v -> u.  Head/tail
    vertices of an ID are where the service starts/ends.
    """

    index: int
    u: int
    v: int
    demand: Number
    service_cost: Number
    deadheading_cost: Number

    @property
    def forward_id(self) -> int:
        return 2 * self.index + 1

    @property
    def reverse_id(self) -> int:
        return 2 * self.index + 2


class Instance:
    """Validated CARP instance.

    Immutable after construction; safe to share across workers.  Besides the
    task objects, per-ID lookup lists (head vertex, tail vertex, demand,
    service cost) are exposed for hot loops, indexed by directed task ID.
    """

    def __init__(
        self,
        name: str,
        vertex_count: int,
        edges: list[Edge],
        depot: int,
        capacity: Number,
    ):
        if vertex_count <= 0:
            raise InvalidInstanceError("vertex count must be positive")
        if not 0 <= depot < vertex_count:
            raise InvalidInstanceError(f"depot {depot} out of range")
        if capacity <= 0:
            raise InvalidInstanceError("capacity must be positive")
        for e in edges:
            if not (0 <= e.u < vertex_count and 0 <= e.v < vertex_count):
                raise InvalidInstanceError(f"edge ({e.u},{e.v}) has a dangling vertex")
            if e.demand < 0 or e.service_cost < 0 or e.deadheading_cost < 0:
                raise InvalidInstanceError(f"edge ({e.u},{e.v}) has a negative attribute")
            if e.demand > capacity:
                raise InvalidInstanceError(
                    f"edge ({e.u},{e.v}) demand {e.demand} exceeds capacity {capacity}"
                )

        self.name = name
        self.vertex_count = vertex_count
        self.edges = list(edges)
        self.depot = depot
        self.capacity = capacity
        self.tasks = [
            Task(i, e.u, e.v, e.demand, e.service_cost, e.deadheading_cost)
            for i, e in enumerate(e for e in edges if e.required)
        ]

        n_ids = 2 * len(self.tasks) + 1
        self.id_head = [depot] * n_ids
        self.id_tail = [depot] * n_ids
        self.id_demand: list[Number] = [0] * n_ids
        self.id_service: list[Number] = [0] * n_ids
        for t in self.tasks:
            f, r = t.forward_id, t.reverse_id
            self.id_head[f], self.id_tail[f] = t.u, t.v
            self.id_head[r], self.id_tail[r] = t.v, t.u
            self.id_demand[f] = self.id_demand[r] = t.demand
            self.id_service[f] = self.id_service[r] = t.service_cost

        self._check_reachability()
        self._dist = None

    @property
    def task_count(self) -> int:
        return len(self.tasks)

    @property
    def total_demand(self) -> Number:
        return sum(t.demand for t in self.tasks)

    def adjacency(self) -> list[list[tuple[int, Number]]]:
        """Undirected adjacency lists weighted by deadheading cost."""
        adj: list[list[tuple[int, Number]]] = [[] for _ in range(self.vertex_count)]
        for e in self.edges:
            adj[e.u].append((e.v, e.deadheading_cost))
            adj[e.v].append((e.u, e.deadheading_cost))
        return adj

    def distances(self):
        """All-pairs shortest-path table, computed once and cached."""
        if self._dist is None:
            from .distances import shortest_paths

            self._dist = shortest_paths(self)
        return self._dist

    def _check_reachability(self) -> None:
        reached = [False] * self.vertex_count
        reached[self.depot] = True
        queue = deque([self.depot])
        adj = self.adjacency()
        while queue:
            u = queue.popleft()
            for v, _ in adj[u]:
                if not reached[v]:
                    reached[v] = True
                    queue.append(v)
        for t in self.tasks:
            if not (reached[t.u] and reached[t.v]):
                raise InvalidInstanceError(
                    f"task ({t.u + 1},{t.v + 1}) is unreachable from the depot"
                )

    def __repr__(self) -> str:
        return (
            f"Instance({self.name!r}, |V|={self.vertex_count}, |E|={len(self.edges)}, "
            f"|T|={self.task_count}, Q={self.capacity})"
        )


# --- file format ------------------------------------------------------------
#
# Header lines of the form `KEY : VALUE` (keys case-insensitive, English
# synonyms accepted), then the two edge blocks, then the depot:
#
#   NOMBRE : gdb1
#   VERTICES : 12
#   ARISTAS_REQ : 22
#   ARISTAS_NOREQ : 0
#   VEHICULOS : -1
#   CAPACIDAD : 5
#   LISTA_ARISTAS_REQ :
#   ( 1 , 2 ) coste 13 demanda 1
#   ...
#   LISTA_ARISTAS_NOREQ :
#   ( 1 , 5 ) coste 4
#   ...
#   DEPOSITO : 1
#
# `coste` is used for both the service and the deadheading cost, following
# the benchmark convention.  Vertices are 1-based in files, 0-based in
# memory.

_KEY_ALIASES = {
    "NOMBRE": "name",
    "NAME": "name",
    "VERTICES": "vertices",
    "ARISTAS_REQ": "required",
    "ARISTAS_NOREQ": "non_required",
    "VEHICULOS": "vehicles",
    "CAPACIDAD": "capacity",
    "CAPACITY": "capacity",
    "DEPOSITO": "depot",
    "DEPOT": "depot",
    "LISTA_ARISTAS_REQ": "req_block",
    "LISTA_ARISTAS_NOREQ": "noreq_block",
}

_EDGE_RE = re.compile(
    r"^\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*(?:coste|cost)\s+(\d+)"
    r"(?:\s+(?:demanda|demand)\s+(\d+))?\s*$",
    re.IGNORECASE,
)


def parse_instance(text: str, name_hint: str = "<stream>") -> Instance:
    """Parse the DAT instance format from a string."""
    header: dict[str, str] = {}
    req_edges: list[tuple[int, Edge]] = []
    noreq_edges: list[tuple[int, Edge]] = []
    block: str | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("("):
            if block is None:
                raise InstanceFormatError(line_no, "edge line outside an edge block")
            m = _EDGE_RE.match(line)
            if not m:
                raise InstanceFormatError(line_no, f"malformed edge line: {line!r}")
            u, v, cost = int(m.group(1)), int(m.group(2)), int(m.group(3))
            demand = m.group(4)
            if block == "req_block":
                if demand is None:
                    raise InstanceFormatError(line_no, "required edge without a demand")
                if int(demand) <= 0:
                    raise InstanceFormatError(line_no, "required edge with non-positive demand")
                req_edges.append((line_no, Edge(u - 1, v - 1, int(demand), cost, cost)))
            else:
                if demand is not None:
                    raise InstanceFormatError(line_no, "non-required edge with a demand")
                noreq_edges.append((line_no, Edge(u - 1, v - 1, 0, 0, cost)))
            continue
        if ":" not in line:
            raise InstanceFormatError(line_no, f"expected `KEY : VALUE`, got {line!r}")
        key_raw, value = line.split(":", 1)
        key = _KEY_ALIASES.get(key_raw.strip().upper().replace(" ", "_"))
        if key is None:
            continue  # tolerate unknown headers (COMENTARIO etc.)
        if key in ("req_block", "noreq_block"):
            block = key
        else:
            block = None
            header[key] = value.strip()

    def _int_header(key: str, label: str) -> int:
        if key not in header:
            raise InvalidInstanceError(f"missing {label} header")
        try:
            return int(header[key])
        except ValueError:
            raise InvalidInstanceError(f"{label} is not an integer: {header[key]!r}") from None

    vertices = _int_header("vertices", "VERTICES")
    capacity = _int_header("capacity", "CAPACIDAD")
    depot = _int_header("depot", "DEPOSITO")
    declared_req = _int_header("required", "ARISTAS_REQ")
    declared_noreq = _int_header("non_required", "ARISTAS_NOREQ")
    if declared_req != len(req_edges):
        raise InvalidInstanceError(
            f"ARISTAS_REQ declares {declared_req} edges, block has {len(req_edges)}"
        )
    if declared_noreq != len(noreq_edges):
        raise InvalidInstanceError(
            f"ARISTAS_NOREQ declares {declared_noreq} edges, block has {len(noreq_edges)}"
        )
    if not 1 <= depot <= vertices:
        raise InvalidInstanceError(f"depot {depot} out of range 1..{vertices}")

    name = header.get("name", name_hint)
    edges = [e for _, e in req_edges] + [e for _, e in noreq_edges]
    return Instance(name, vertices, edges, depot - 1, capacity)


def load_instance(source: Union[str, Path, IO[str]]) -> Instance:
    """Load an instance from a path or an open text stream."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        return parse_instance(path.read_text(), name_hint=path.stem)
    return parse_instance(source.read())


def write_instance(instance: Instance, stream: IO[str]) -> None:
    """Write the canonical DAT representation (parse/print round-trip safe)."""
    required = [e for e in instance.edges if e.required]
    optional = [e for e in instance.edges if not e.required]
    w = stream.write
    w(f"NOMBRE : {instance.name}\n")
    w(f"VERTICES : {instance.vertex_count}\n")
    w(f"ARISTAS_REQ : {len(required)}\n")
    w(f"ARISTAS_NOREQ : {len(optional)}\n")
    w("VEHICULOS : -1\n")
    w(f"CAPACIDAD : {instance.capacity}\n")
    w("LISTA_ARISTAS_REQ :\n")
    for e in required:
        w(f"( {e.u + 1} , {e.v + 1} ) coste {e.deadheading_cost} demanda {e.demand}\n")
    w("LISTA_ARISTAS_NOREQ :\n")
    for e in optional:
        w(f"( {e.u + 1} , {e.v + 1} ) coste {e.deadheading_cost}\n")
    w(f"DEPOSITO : {instance.depot + 1}\n")


def save_instance(instance: Instance, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        write_instance(instance, fh)
