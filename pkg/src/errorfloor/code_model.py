"""Tanner graphs: alist I/O, GF(2) diagnostics and trapping-set census."""

import itertools
import json
import math
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import (Dict, Iterable, Iterator, List, Optional, Sequence,
                    Tuple, Union)

import numpy as np
import scipy.sparse as sp

from errorfloor.constants import (TANNER_155_NAME, TANNER_BLOCK_SIZE,
                                  TANNER_COL_BASE, TANNER_ROW_BASE)
from errorfloor.errors import AlistParseError, InputError
from errorfloor.logging_config import get_logger, timer
from errorfloor.types import BinaryVector, BitsLike, SubgraphClass, as_bits
from errorfloor.workers import run_ordered

logger = get_logger(__name__)


class TannerGraph:
    """
    Immutable bipartite graph of a binary LDPC code.

    Variables are 0..n-1 and checks 0..m-1. Neighbor lists are sorted.
    Edges are numbered check-major, so the edges of check 0 come first.
    """

    def __init__(
        self, n: int, m: int, check_neighbors: Sequence[Iterable[int]]
    ):
        if n < 0 or m < 0:
            raise InputError("node counts must be non-negative")
        if len(check_neighbors) != m:
            raise InputError(
                f"expected {m} check neighbor lists, got "
                f"{len(check_neighbors)}"
            )
        checks: List[Tuple[int, ...]] = []
        var_lists: List[List[int]] = [[] for _ in range(n)]
        for alpha, raw in enumerate(check_neighbors):
            row = tuple(sorted(int(i) for i in raw))
            if len(set(row)) != len(row):
                raise InputError(f"check {alpha} has a parallel edge")
            for i in row:
                if not 0 <= i < n:
                    raise InputError(
                        f"check {alpha}: variable index {i} out of range"
                    )
                var_lists[i].append(alpha)
            checks.append(row)

        self.n = n
        self.m = m
        self.check_neighbors: Tuple[Tuple[int, ...], ...] = tuple(checks)
        self.var_neighbors: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(v) for v in var_lists
        )

        edge_check = [a for a, row in enumerate(checks) for _ in row]
        edge_var = [i for row in checks for i in row]
        self.edge_check = np.asarray(edge_check, dtype=np.int64)
        self.edge_var = np.asarray(edge_var, dtype=np.int64)
        self.var_degrees = np.asarray(
            [len(v) for v in self.var_neighbors], dtype=np.int64
        )
        self.check_degrees = np.asarray(
            [len(c) for c in checks], dtype=np.int64
        )
        num_edges = len(edge_var)
        ones = np.ones(num_edges)
        edges = np.arange(num_edges)
        self._check_sum = sp.csr_matrix(
            (ones, (self.edge_check, edges)), shape=(m, num_edges)
        )
        self._var_sum = sp.csr_matrix(
            (ones, (self.edge_var, edges)), shape=(n, num_edges)
        )
        self._h = sp.csr_matrix(
            (ones, (self.edge_check, self.edge_var)), shape=(m, n)
        )

        # m x max_degree table of edge ids, -1 padded
        width = int(self.check_degrees.max()) if m and num_edges else 0
        slots = np.full((m, width), -1, dtype=np.int64)
        offset = 0
        for alpha, row in enumerate(checks):
            slots[alpha, : len(row)] = np.arange(offset, offset + len(row))
            offset += len(row)
        self.check_slots = slots
        self.check_slot_mask = slots >= 0

    @classmethod
    def from_adjacency(
        cls,
        n: int,
        m: int,
        var_neighbors: Sequence[Iterable[int]],
        check_neighbors: Sequence[Iterable[int]],
    ) -> "TannerGraph":
        """Build from both sides, requiring the lists to agree."""
        graph = cls(n, m, check_neighbors)
        for i, raw in enumerate(var_neighbors):
            if tuple(sorted(int(a) for a in raw)) != graph.var_neighbors[i]:
                raise InputError(
                    f"asymmetric adjacency at variable {i}"
                )
        return graph

    @classmethod
    def from_parity_check(
        cls, h: Union[np.ndarray, sp.spmatrix]
    ) -> "TannerGraph":
        """Build from an m x n 0/1 parity-check matrix."""
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        if dense.ndim != 2:
            raise InputError("parity-check matrix must be two-dimensional")
        m, n = dense.shape
        rows = [np.flatnonzero(dense[a] % 2) for a in range(m)]
        return cls(n, m, rows)

    def to_parity_check(self) -> np.ndarray:
        """Dense m x n uint8 parity-check matrix."""
        return self._h.toarray().astype(np.uint8)

    @property
    def parity_check(self) -> sp.csr_matrix:
        """Sparse parity-check matrix."""
        return self._h

    @property
    def num_edges(self) -> int:
        """Edge count."""
        return int(self.edge_var.shape[0])

    def sum_per_check(self, edge_values: np.ndarray) -> np.ndarray:
        """Sum edge values per check; accepts (E,) or (B, E)."""
        return _reduce(self._check_sum, edge_values)

    def sum_per_var(self, edge_values: np.ndarray) -> np.ndarray:
        """Sum edge values per variable; accepts (E,) or (B, E)."""
        return _reduce(self._var_sum, edge_values)

    def parity(self, bits: np.ndarray) -> np.ndarray:
        """Check parities of (n,) or (B, n) bit arrays."""
        return (np.rint(_reduce(self._h, bits)).astype(np.int64) % 2).astype(
            np.uint8
        )

    def variable_adjacency(self) -> List[int]:
        """Per-variable bitmask of variables sharing a check."""
        masks = [0] * self.n
        for row in self.check_neighbors:
            row_mask = 0
            for i in row:
                row_mask |= 1 << i
            for i in row:
                masks[i] |= row_mask
        for i in range(self.n):
            masks[i] &= ~(1 << i)
        return masks

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and self.check_neighbors == other.check_neighbors
        )

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.check_neighbors))

    def __repr__(self) -> str:
        return f"TannerGraph(n={self.n}, m={self.m}, edges={self.num_edges})"


def _reduce(matrix: sp.csr_matrix, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        return matrix @ values
    return (matrix @ values.T).T


@dataclass(frozen=True)
class CirculantSpec:
    """Quasi-cyclic code description: block size and shift exponents."""

    block_size: int
    shifts: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.block_size <= 0:
            raise InputError("block_size must be positive")
        for row in self.shifts:
            for s in row:
                if not 0 <= s < self.block_size:
                    raise InputError(
                        f"shift {s} outside [0, {self.block_size})"
                    )

    @classmethod
    def tanner(cls) -> "CirculantSpec":
        """Shifts (5^i * 2^j) mod 31 of the [155,64,20] Tanner code."""
        p = TANNER_BLOCK_SIZE
        shifts = tuple(
            tuple(
                (TANNER_ROW_BASE**i * TANNER_COL_BASE**j) % p
                for j in range(5)
            )
            for i in range(3)
        )
        return cls(block_size=p, shifts=shifts)

    def to_graph(self) -> TannerGraph:
        """Expand into a Tanner graph of circulant permutation blocks."""
        p = self.block_size
        rows = len(self.shifts)
        cols = len(self.shifts[0]) if rows else 0
        check_neighbors = []
        for i in range(rows):
            for r in range(p):
                check_neighbors.append(
                    [j * p + (r + self.shifts[i][j]) % p for j in range(cols)]
                )
        return TannerGraph(cols * p, rows * p, check_neighbors)


def build_tanner_155() -> TannerGraph:
    """The (3,5)-regular [155,64,20] Tanner code, self-verified."""
    with timer(logger, "Tanner-155 construction"):
        graph = CirculantSpec.tanner().to_graph()
        g = girth(graph)
        rank = gf2_rank(graph)
        if (
            g != 8
            or rank != 91
            or set(graph.var_degrees.tolist()) != {3}
            or set(graph.check_degrees.tolist()) != {5}
        ):
            raise InputError(
                f"circulant construction failed self-check "
                f"(girth={g}, rank={rank})"
            )
    return graph


# alist


def load_alist(text: str) -> TannerGraph:
    """Parse alist text into a canonical TannerGraph."""
    lines = [
        (number, line.split())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]
    cursor = iter(lines)

    def next_line(expect: str) -> Tuple[int, List[int]]:
        try:
            number, tokens = next(cursor)
        except StopIteration:
            last = lines[-1][0] if lines else 0
            raise AlistParseError(
                f"unexpected end of file, expected {expect}", last + 1
            )
        try:
            return number, [int(t) for t in tokens]
        except ValueError:
            raise AlistParseError(f"non-integer token in {expect}", number)

    number, header = next_line("header")
    if len(header) != 2 or header[0] <= 0 or header[1] < 0:
        raise AlistParseError("malformed header, expected 'n m'", number)
    n, m = header

    number, maxima = next_line("max degrees")
    if len(maxima) != 2:
        raise AlistParseError("malformed max-degree line", number)
    max_dv, max_dc = maxima

    number, dv = next_line("variable degrees")
    if len(dv) != n or any(d < 0 or d > max_dv for d in dv):
        raise AlistParseError("malformed variable degree list", number)
    number, dc = next_line("check degrees")
    if len(dc) != m or any(d < 0 or d > max_dc for d in dc):
        raise AlistParseError("malformed check degree list", number)

    def neighbor_line(limit: int, degree: int, what: str):
        number, values = next_line(what)
        entries = [v for v in values if v != 0]
        for v in entries:
            if not 1 <= v <= limit:
                raise AlistParseError(f"index out of range: {v}", number)
        if len(entries) != degree or len(set(entries)) != degree:
            raise AlistParseError(
                f"{what} lists {len(entries)} neighbors, degree is {degree}",
                number,
            )
        return number, sorted(v - 1 for v in entries)

    var_lists = []
    for i in range(n):
        _, row = neighbor_line(m, dv[i], f"variable {i + 1} neighbors")
        var_lists.append(row)

    check_lists = []
    check_lines = []
    for a in range(m):
        number, row = neighbor_line(n, dc[a], f"check {a + 1} neighbors")
        check_lists.append(row)
        check_lines.append(number)

    graph = TannerGraph(n, m, check_lists)
    for i, row in enumerate(var_lists):
        if tuple(row) != graph.var_neighbors[i]:
            culprit = next(
                (a for a in set(row) ^ set(graph.var_neighbors[i])), 0
            )
            raise AlistParseError(
                f"asymmetric adjacency between variable {i + 1} and "
                f"check {culprit + 1}",
                check_lines[culprit] if culprit < m else number,
            )
    return graph


def save_alist(g: TannerGraph) -> str:
    """Serialize to alist text, 1-indexed, zero-padded to max degree."""
    max_dv = int(g.var_degrees.max()) if g.n else 0
    max_dc = int(g.check_degrees.max()) if g.m else 0

    def padded(row: Sequence[int], width: int) -> str:
        items = [str(v + 1) for v in row] + ["0"] * (width - len(row))
        return " ".join(items)

    out = [
        f"{g.n} {g.m}",
        f"{max_dv} {max_dc}",
        " ".join(str(d) for d in g.var_degrees.tolist()),
        " ".join(str(d) for d in g.check_degrees.tolist()),
    ]
    out.extend(padded(row, max_dv) for row in g.var_neighbors)
    out.extend(padded(row, max_dc) for row in g.check_neighbors)
    return "\n".join(out) + "\n"


def read_alist_file(path: Path) -> TannerGraph:
    """Load a code from an alist file."""
    return load_alist(Path(path).read_text(encoding="utf-8"))


def load_code(spec: str) -> TannerGraph:
    """Resolve a built-in code name or an alist path."""
    if spec == TANNER_155_NAME:
        return build_tanner_155()
    return read_alist_file(Path(spec))


# diagnostics


def girth(g: TannerGraph) -> Union[int, float]:
    """Length of the shortest cycle, math.inf for a forest."""
    best: Union[int, float] = math.inf
    n = g.n

    def neighbors(u: int) -> Sequence[int]:
        if u < n:
            return [n + a for a in g.var_neighbors[u]]
        return g.check_neighbors[u - n]

    # every cycle passes through a variable node
    for root in range(n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def _row_reduce(matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    work = (np.asarray(matrix) % 2).astype(np.uint8)
    rows, cols = work.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        candidates = np.flatnonzero(work[r:, c])
        if candidates.size == 0:
            continue
        pivot = r + int(candidates[0])
        if pivot != r:
            work[[r, pivot]] = work[[pivot, r]]
        hits = np.flatnonzero(work[:, c])
        hits = hits[hits != r]
        work[hits] ^= work[r]
        pivots.append(c)
        r += 1
    return work[:r], pivots


def gf2_rank(g: Union[TannerGraph, np.ndarray]) -> int:
    """Rank of the parity-check matrix over GF(2)."""
    h = g.to_parity_check() if isinstance(g, TannerGraph) else g
    if h.size == 0:
        return 0
    _, pivots = _row_reduce(h)
    return len(pivots)


def null_space_basis(g: Union[TannerGraph, np.ndarray]) -> np.ndarray:
    """Rows spanning the code (kernel of H over GF(2))."""
    h = g.to_parity_check() if isinstance(g, TannerGraph) else np.asarray(g)
    n = h.shape[1]
    reduced, pivots = _row_reduce(h)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, p in enumerate(pivots):
            basis[k, p] = reduced[r, f]
    return basis


def code_rate(g: TannerGraph) -> float:
    """Design-independent rate (n - rank) / n."""
    return (g.n - gf2_rank(g)) / g.n


def syndrome(g: TannerGraph, v: BitsLike) -> BinaryVector:
    """Per-check parity of v."""
    bits = as_bits(v, g.n)
    return BinaryVector.from_array(g.parity(bits))


def is_codeword(g: TannerGraph, v: BitsLike) -> bool:
    """True iff every check is satisfied."""
    bits = as_bits(v, g.n)
    return not g.parity(bits).any()


def relabel(
    g: TannerGraph, var_perm: Sequence[int], check_perm: Sequence[int]
) -> TannerGraph:
    """Graph with variable i renamed var_perm[i] and check a check_perm[a]."""
    rows: List[List[int]] = [[] for _ in range(g.m)]
    for a, row in enumerate(g.check_neighbors):
        rows[check_perm[a]] = [int(var_perm[i]) for i in row]
    return TannerGraph(g.n, g.m, rows)


# trapping-set census


def induced_check_degrees(
    g: TannerGraph, subset: Iterable[int]
) -> Dict[int, int]:
    """Degree of every check touched by the subset, within the subset."""
    return dict(Counter(a for i in subset for a in g.var_neighbors[i]))


def classify_subgraph(
    g: TannerGraph, subset: Iterable[int]
) -> Tuple[int, int]:
    """(a, b): subset size and number of odd-degree induced checks."""
    members = set(subset)
    degrees = induced_check_degrees(g, members)
    return len(members), sum(1 for d in degrees.values() if d % 2)


def _mask_to_tuple(mask: int) -> Tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _esu_from(adjacency: List[int], size: int, v: int) -> Iterator[int]:
    """Connected subsets of the given size whose smallest member is v."""
    above_v = ~((1 << (v + 1)) - 1)

    def extend(sub: int, sub_nbrs: int, ext: int, count: int) -> Iterator[int]:
        if count == size:
            yield sub
            return
        while ext:
            low = ext & -ext
            ext ^= low
            w = low.bit_length() - 1
            exclusive = adjacency[w] & ~sub & ~sub_nbrs & above_v
            yield from extend(
                sub | low, sub_nbrs | adjacency[w], ext | exclusive, count + 1
            )

    start = 1 << v
    yield from extend(start, adjacency[v], adjacency[v] & above_v, 1)


def enumerate_connected_subsets(
    g: TannerGraph, a: int, seeds: Optional[Iterable[int]] = None
) -> Iterator[Tuple[int, ...]]:
    """
    Stream every connected variable subset of size a exactly once.

    Two variables are adjacent when they share a check. Each subset is
    produced from its smallest member, restricted to `seeds` if given.
    """
    if a < 1:
        raise InputError("subset size must be at least 1")
    adjacency = g.variable_adjacency()
    for v in range(g.n) if seeds is None else seeds:
        for mask in _esu_from(adjacency, a, v):
            yield _mask_to_tuple(mask)


def enumerate_all_subsets(
    g: TannerGraph, a: int
) -> Iterator[Tuple[int, ...]]:
    """Every size-a variable subset, connected or not; small a only."""
    if a < 1:
        raise InputError("subset size must be at least 1")
    logger.info(
        f"Disconnected census over {math.comb(g.n, a)} subsets of size {a}"
    )
    return itertools.combinations(range(g.n), a)


def _census_seeds(
    g: TannerGraph, a: int, b: int, seeds: List[int]
) -> List[Tuple[int, ...]]:
    found = []
    for subset in enumerate_connected_subsets(g, a, seeds):
        if classify_subgraph(g, subset)[1] == b:
            found.append(subset)
    return found


def census_trapping_subgraphs(
    g: TannerGraph,
    a: int,
    b: int,
    workers: int = 1,
    connected: bool = True,
) -> SubgraphClass:
    """All size-a variable sets whose induced subgraph has b odd checks."""
    if a < 0 or b < 0:
        raise InputError("a and b must be non-negative")
    if a == 0:
        return SubgraphClass(a=0, b=b, members=[()] if b == 0 else [])

    with timer(logger, f"({a},{b}) census"):
        if not connected:
            members = [
                s
                for s in enumerate_all_subsets(g, a)
                if classify_subgraph(g, s)[1] == b
            ]
        elif workers <= 1:
            members = _census_seeds(g, a, b, list(range(g.n)))
        else:
            chunks = [
                (g, a, b, list(range(w, g.n, workers)))
                for w in range(workers)
            ]
            members = [
                s
                for part in run_ordered(_census_seeds, chunks, workers)
                for s in part
            ]

    result = SubgraphClass(a=a, b=b, members=members).sorted()
    logger.info(f"Found {result.count} ({a},{b}) subgraphs")
    return result


def census_to_json(census: SubgraphClass) -> str:
    """JSON text of a census with sorted members."""
    return json.dumps(census.to_dict())


def save_census(census: SubgraphClass, path: Path) -> None:
    """Write a census as JSON."""
    Path(path).write_text(census_to_json(census) + "\n", encoding="utf-8")


def load_census(path: Path) -> SubgraphClass:
    """Read a census written by save_census."""
    return SubgraphClass.from_dict(
        json.loads(Path(path).read_text(encoding="utf-8"))
    )
