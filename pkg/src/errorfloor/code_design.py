"""Progressive edge growth with forbidden cycles and trapping-set templates.

Edges are placed one variable at a time. Each edge goes to a check as far
as possible from the variable in the current graph, the least loaded among
those, with random tie-breaks. A candidate is rejected when it closes a
forbidden cycle. Once all edges of a variable are placed, every connected
variable set through it is compared with the forbidden templates; the
induced subgraph of a set of completed variables never changes afterwards.
"""

import itertools
import json
import math
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import (Any, Dict, FrozenSet, Iterable, Iterator, List, Optional,
                    Sequence, Set, Tuple)

import numpy as np

from errorfloor.code_model import (TannerGraph, _row_reduce,
                                   census_trapping_subgraphs,
                                   null_space_basis)
from errorfloor.constants import DEFAULT_MAX_BACKTRACKS
from errorfloor.errors import ConstructionError, InputError
from errorfloor.logging_config import get_logger, timer

logger = get_logger(__name__)

# retries of one variable before its predecessor is undone as well
VARIABLE_RETRIES = 10

Structure = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class ForbiddenPattern:
    """
    A structure the constructed graph must not contain.

    kind "cycle" forbids cycles shorter than girth_min. kind "template"
    forbids variable sets of size a with b odd induced checks; when a
    structure is given (check neighborhoods over template variables
    0..a-1), only sets whose induced subgraph is isomorphic to it count.
    """

    kind: str
    girth_min: int = 0
    a: int = 0
    b: int = 0
    structure: Optional[Structure] = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind == "cycle":
            if self.girth_min < 4 or self.girth_min % 2:
                raise InputError("girth_min must be even and at least 4")
        elif self.kind == "template":
            if self.a < 1 or self.b < 0:
                raise InputError("template needs a >= 1 and b >= 0")
            if self.structure is not None:
                _validate_structure(self.a, self.b, self.structure)
        else:
            raise InputError(f"unknown forbidden pattern kind '{self.kind}'")

    @classmethod
    def cycles_shorter_than(cls, girth_min: int) -> "ForbiddenPattern":
        """Forbid cycles of length below girth_min."""
        return cls(
            kind="cycle", girth_min=girth_min, name=f"cycles<{girth_min}"
        )

    @classmethod
    def template(
        cls, a: int, b: int, structure: Optional[Structure] = None
    ) -> "ForbiddenPattern":
        """Forbid (a, b) sets, optionally of one structure only."""
        return cls(
            kind="template", a=a, b=b, structure=structure, name=f"ts:{a},{b}"
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready export."""
        if self.kind == "cycle":
            return {"kind": "cycle", "girth_min": self.girth_min}
        return {
            "kind": "template",
            "a": self.a,
            "b": self.b,
            "structure": (
                None
                if self.structure is None
                else [list(c) for c in self.structure]
            ),
        }


def _validate_structure(a: int, b: int, structure: Structure) -> None:
    touched = set()
    odd = 0
    for check in structure:
        if not check or len(set(check)) != len(check):
            raise InputError("template checks need distinct neighbors")
        if min(check) < 0 or max(check) >= a:
            raise InputError("template check outside the template variables")
        touched.update(check)
        odd += len(check) % 2
    if touched != set(range(a)):
        raise InputError("every template variable needs a check")
    if odd != b:
        raise InputError(f"template has {odd} odd checks, expected {b}")


# two degree-three variables joined to three degree-two variables, whose
# third checks hang off the set
TEMPLATE_5_3 = ForbiddenPattern.template(
    5,
    3,
    (
        (0, 2), (0, 3), (0, 4),
        (1, 2), (1, 3), (1, 4),
        (2,), (3,), (4,),
    ),
)

# an eight-cycle with one pendant check per variable
TEMPLATE_4_4 = ForbiddenPattern.template(
    4,
    4,
    ((0, 1), (1, 2), (2, 3), (0, 3), (0,), (1,), (2,), (3,)),
)

_BUILTIN_TEMPLATES = {(5, 3): TEMPLATE_5_3, (4, 4): TEMPLATE_4_4}


def parse_forbidden(text: str) -> ForbiddenPattern:
    """
    Parse 'cycles<G' or 'ts:A,B'.

    The (5,3) and (4,4) trapping sets map to their built-in structures;
    other (a,b) pairs forbid the whole class.
    """
    text = text.strip()
    match = re.fullmatch(r"cycles<(\d+)", text)
    if match:
        return ForbiddenPattern.cycles_shorter_than(int(match.group(1)))
    match = re.fullmatch(r"ts:(\d+),(\d+)", text)
    if match:
        a, b = int(match.group(1)), int(match.group(2))
        return _BUILTIN_TEMPLATES.get((a, b), ForbiddenPattern.template(a, b))
    raise InputError(
        f"forbidden pattern must be 'cycles<G' or 'ts:A,B', got {text!r}"
    )


def _canonical(structure: Iterable[Iterable[int]]) -> Tuple:
    return tuple(sorted(tuple(sorted(c)) for c in structure))


def _matches(
    pattern: ForbiddenPattern, local: Sequence[Tuple[int, ...]]
) -> bool:
    """Whether an induced structure over 0..a-1 fits the pattern."""
    odd = sum(len(c) % 2 for c in local)
    if odd != pattern.b:
        return False
    if pattern.structure is None:
        return True
    target = _canonical(pattern.structure)
    if len(local) != len(target):
        return False
    for perm in itertools.permutations(range(pattern.a)):
        if _canonical([perm[v] for v in c] for c in local) == target:
            return True
    return False


def _induced(
    members: Sequence[int], var_checks: Sequence[Iterable[int]]
) -> List[Tuple[int, ...]]:
    position = {v: k for k, v in enumerate(members)}
    by_check: Dict[int, List[int]] = {}
    for v in members:
        for c in var_checks[v]:
            by_check.setdefault(c, []).append(position[v])
    return [tuple(vs) for vs in by_check.values()]


@dataclass(frozen=True)
class ConstructionConfig:
    """Size, degree and seed of a construction."""

    n: int
    d_v: int
    m: int
    seed: int = 0
    max_backtracks: int = DEFAULT_MAX_BACKTRACKS

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise InputError("n and m must be positive")
        if not 1 <= self.d_v <= self.m:
            raise InputError("variable degree must lie in [1, m]")
        if self.max_backtracks < 0:
            raise InputError("max_backtracks must be non-negative")


@dataclass
class ConstructionLog:
    """Choices and backtracks of one construction run."""

    seed: int
    choices: List[List[int]] = field(default_factory=list)
    backtracks: List[Dict[str, Any]] = field(default_factory=list)
    check_degrees: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready export."""
        return {
            "seed": self.seed,
            "choices": [list(c) for c in self.choices],
            "backtracks": list(self.backtracks),
            "check_degree_spread": {
                str(d): c for d, c in sorted(self.check_degrees.items())
            },
        }

    def write(self, path: Path) -> None:
        """Write to_dict() as JSON."""
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )


class _Builder:
    """Incremental graph with the PEG distance query."""

    def __init__(self, cfg: ConstructionConfig):
        self.cfg = cfg
        self.var_checks: List[List[int]] = [[] for _ in range(cfg.n)]
        self.check_vars: List[List[int]] = [[] for _ in range(cfg.m)]

    def add(self, v: int, c: int) -> None:
        self.var_checks[v].append(c)
        self.check_vars[c].append(v)

    def clear(self, v: int) -> None:
        for c in self.var_checks[v]:
            self.check_vars[c].remove(v)
        self.var_checks[v] = []

    def check_levels(self, v: int) -> np.ndarray:
        """Check-hop distance from v; unreachable checks get m."""
        m = self.cfg.m
        level = np.full(m, m, dtype=np.int64)
        seen_vars = {v}
        frontier = [v]
        depth = 0
        while frontier:
            nxt = []
            for u in frontier:
                for c in self.var_checks[u]:
                    if level[c] != m:
                        continue
                    level[c] = depth
                    for w in self.check_vars[c]:
                        if w not in seen_vars:
                            seen_vars.add(w)
                            nxt.append(w)
            frontier = nxt
            depth += 1
        return level

    def candidates(
        self, v: int, rng: np.random.Generator
    ) -> List[Tuple[int, int]]:
        """(check, level) pairs in PEG preference order."""
        level = self.check_levels(v)
        degree = np.array([len(vs) for vs in self.check_vars])
        ties = rng.random(self.cfg.m)
        order = np.lexsort((ties, degree, -level))
        used = set(self.var_checks[v])
        return [(int(c), int(level[c])) for c in order if c not in used]

    def sets_through(
        self, v: int, size: int, complete: Set[int]
    ) -> Iterator[Tuple[int, ...]]:
        """Connected sets of completed variables of the given size with v."""

        def nbrs(u: int) -> Set[int]:
            return {
                w
                for c in self.var_checks[u]
                for w in self.check_vars[c]
                if w != u and w in complete
            }

        seen: Set[FrozenSet[int]] = set()
        stack = [frozenset([v])]
        while stack:
            current = stack.pop()
            if len(current) == size:
                yield tuple(sorted(current))
                continue
            frontier = set().union(*(nbrs(u) for u in current)) - current
            for w in frontier:
                grown = current | {w}
                if grown not in seen:
                    seen.add(grown)
                    stack.append(grown)

    def template_violation(
        self,
        v: int,
        templates: Sequence[ForbiddenPattern],
        complete: Set[int],
    ) -> Optional[Tuple[str, Tuple[int, ...]]]:
        for pattern in templates:
            for members in self.sets_through(v, pattern.a, complete):
                if _matches(pattern, _induced(members, self.var_checks)):
                    return pattern.name, members
        return None

    def graph(self) -> TannerGraph:
        return TannerGraph(self.cfg.n, self.cfg.m, self.check_vars)


def peg_construct(
    cfg: ConstructionConfig,
    forbidden: Sequence[ForbiddenPattern],
    rng: Optional[np.random.Generator] = None,
    log: Optional[ConstructionLog] = None,
) -> TannerGraph:
    """
    Build a left-regular Tanner graph free of the forbidden patterns.

    Args:
        cfg: Size, degree, seed and backtrack cap
        forbidden: Patterns to avoid
        rng: Generator for tie-breaks, default_rng(cfg.seed) if omitted
        log: Optional log receiving choices and backtrack events

    Raises:
        ConstructionError: backtrack cap reached, with a diagnostic of the
            partial graph
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    log = log if log is not None else ConstructionLog(seed=cfg.seed)
    girth_min = max(
        (p.girth_min for p in forbidden if p.kind == "cycle"), default=0
    )
    templates = [p for p in forbidden if p.kind == "template"]
    builder = _Builder(cfg)
    complete: Set[int] = set()
    retries = [0] * cfg.n
    backtracks = 0

    def undo(v: int, reason: str) -> None:
        nonlocal backtracks
        backtracks += 1
        log.backtracks.append({"variable": v, "reason": reason})
        builder.clear(v)
        complete.discard(v)
        if backtracks > cfg.max_backtracks:
            raise ConstructionError(
                f"no valid placement after {cfg.max_backtracks} backtracks",
                {
                    "variables_placed": len(complete),
                    "stuck_at": v,
                    "edges": sum(len(c) for c in builder.var_checks),
                    "reason": reason,
                },
            )

    with timer(logger, f"PEG construction n={cfg.n} m={cfg.m}"):
        v = 0
        while v < cfg.n:
            reason = _place_variable(
                builder, v, rng, girth_min, templates, complete
            )
            if reason is None:
                complete.add(v)
                v += 1
                continue
            undo(v, reason)
            retries[v] += 1
            if retries[v] > VARIABLE_RETRIES and v > 0:
                retries[v] = 0
                v -= 1
                undo(v, "successor exhausted its retries")

    g = builder.graph()
    log.choices = [list(cs) for cs in builder.var_checks]
    log.check_degrees = dict(Counter(int(d) for d in g.check_degrees))
    logger.info(
        f"Constructed n={g.n} m={g.m} with {backtracks} backtracks, "
        f"check degrees {log.check_degrees}"
    )
    for pattern in forbidden:
        found = check_forbidden(g, pattern)
        if found:
            raise ConstructionError(
                f"constructed graph violates {pattern.name}",
                {"violations": found[:10]},
            )
    return g


def _place_variable(
    builder: _Builder,
    v: int,
    rng: np.random.Generator,
    girth_min: int,
    templates: Sequence[ForbiddenPattern],
    complete: Set[int],
) -> Optional[str]:
    """Place all edges of v; returns a failure reason or None."""
    d_v = builder.cfg.d_v
    unreachable = builder.cfg.m
    for k in range(d_v):
        last = k == d_v - 1
        placed = False
        for c, level in builder.candidates(v, rng):
            # an edge to a check at level L closes a cycle of length 2L + 2
            if level != unreachable and 2 * level + 2 < girth_min:
                break
            builder.add(v, c)
            if not last or not templates:
                placed = True
                break
            violation = builder.template_violation(
                v, templates, complete | {v}
            )
            if violation is None:
                placed = True
                break
            builder.var_checks[v].pop()
            builder.check_vars[c].remove(v)
        if not placed:
            return f"edge {k} of variable {v} has no admissible check"
    return None


def _shortest_cycle_through(g: TannerGraph, v: int) -> float:
    """Length of the shortest cycle through variable v."""
    n = g.n
    best = math.inf
    # BFS from each neighbor edge; a cycle through v returns via another
    for first in g.var_neighbors[v]:
        dist = {v: 0, n + first: 1}
        queue = deque([n + first])
        while queue:
            u = queue.popleft()
            if dist[u] + 1 >= best:
                break
            if u < n:
                nbrs = [n + a for a in g.var_neighbors[u]]
            else:
                nbrs = list(g.check_neighbors[u - n])
            for w in nbrs:
                if w == v and u != n + first:
                    best = min(best, dist[u] + 1)
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
    return best


def check_forbidden(
    g: TannerGraph, pattern: ForbiddenPattern, workers: int = 1
) -> List[Dict[str, Any]]:
    """
    All occurrences of a forbidden pattern in g.

    Cycle patterns report each variable lying on a cycle shorter than the
    limit with the length of its shortest cycle. Template patterns report
    the matching (a, b) census members.
    """
    if pattern.kind == "cycle":
        found = []
        for v in range(g.n):
            length = _shortest_cycle_through(g, v)
            if length < pattern.girth_min:
                found.append({"variable": v, "length": int(length)})
        return found
    census = census_trapping_subgraphs(g, pattern.a, pattern.b, workers)
    found = []
    for members in census.members:
        local = _induced(members, g.var_neighbors)
        if _matches(pattern, local):
            found.append({"support": list(members)})
    return found


def codeword_weight_spot_check(
    g: TannerGraph, trials: int, rng: np.random.Generator
) -> Optional[int]:
    """
    Smallest codeword weight seen over random information sets.

    Each trial permutes the columns of a code basis, brings it to reduced
    echelon form and reads the weights of its rows. This finds low-weight
    codewords often but proves nothing. Returns None for the zero code.
    """
    basis = null_space_basis(g)
    if basis.shape[0] == 0:
        return None
    best: Optional[int] = None
    for _ in range(trials):
        perm = rng.permutation(g.n)
        reduced, _ = _row_reduce(basis[:, perm])
        weights = reduced.sum(axis=1)
        low = int(weights[weights > 0].min())
        best = low if best is None else min(best, low)
    logger.debug(f"Codeword spot check: minimum weight seen {best}")
    return best


def check_degree_spread(g: TannerGraph) -> Dict[int, int]:
    """Number of checks per degree."""
    return dict(sorted(Counter(int(d) for d in g.check_degrees).items()))

