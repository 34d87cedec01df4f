"""Linear-programming decoding over the fundamental polytope.

Column layout of the equality-form LP:

    f_0 .. f_{n-1}                     primal bits
    w_{a,T} for each check a and even T  local-codeword weights, empty set
                                       first, then by size in lexicographic
                                       order
    s_0 .. s_{n-1}                     slacks of f_i + s_i = 1
    artificials                        zero-held, never enter

Rows: sum_T w_{a,T} = 1 per check, f_i - sum_{T containing i} w_{a,T} = 0
per edge (check-major edge order), and f_i + s_i = 1 per variable.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from errorfloor.channel import ChannelKind, ChannelModel, ChannelOutput
from errorfloor.code_model import TannerGraph
from errorfloor.constants import (BSC_TIE_BIAS, DEFAULT_DEGREE_CAP,
                                  LP_BACKENDS, TAU_FEAS, TAU_INT)
from errorfloor.decoder_base import BaseDecoder
from errorfloor.errors import (ChannelMismatchError, DegreeCapError,
                               InputError, LengthMismatchError, SolverError,
                               ZeroPseudoCodewordError)
from errorfloor.logging_config import get_logger
from errorfloor.simplex import solve_standard_form
from errorfloor.types import BinaryVector, BitsLike, as_bits, as_reals

logger = get_logger(__name__)


def even_subsets(degree: int) -> List[Tuple[int, ...]]:
    """Even-size subsets of range(degree): empty set, then by size."""
    return [
        subset
        for size in range(0, degree + 1, 2)
        for subset in itertools.combinations(range(degree), size)
    ]


@dataclass
class LcLpInstance:
    """Constraint system of the LP decoder for one code."""

    graph: TannerGraph
    a: sp.csc_matrix
    b: np.ndarray
    num_primal: int
    w_offsets: np.ndarray
    subsets: List[List[Tuple[int, ...]]]
    slack_offset: int
    num_artificial: int
    crash_basis: np.ndarray

    @property
    def num_columns(self) -> int:
        """Total column count including slacks and artificials."""
        return int(self.a.shape[1])

    @property
    def num_auxiliary(self) -> int:
        """Number of w_{a,T} columns."""
        return self.slack_offset - self.num_primal

    @property
    def artificial_mask(self) -> np.ndarray:
        """Columns that may never enter the basis."""
        mask = np.zeros(self.num_columns, dtype=bool)
        mask[self.num_columns - self.num_artificial :] = True
        return mask

    def objective(self, gamma: np.ndarray) -> np.ndarray:
        """Full cost vector for LLRs gamma."""
        c = np.zeros(self.num_columns)
        c[: self.num_primal] = gamma
        return c


def build_lclp(
    g: TannerGraph, degree_cap: int = DEFAULT_DEGREE_CAP
) -> LcLpInstance:
    """Assemble the LP over the fundamental polytope of g."""
    if g.m and int(g.check_degrees.max()) > degree_cap:
        raise DegreeCapError(
            f"check degree {int(g.check_degrees.max())} exceeds cap "
            f"{degree_cap}"
        )
    n, m, num_edges = g.n, g.m, g.num_edges
    subsets = [even_subsets(len(row)) for row in g.check_neighbors]
    w_offsets = np.zeros(m + 1, dtype=np.int64)
    w_offsets[0] = n
    for alpha in range(m):
        w_offsets[alpha + 1] = w_offsets[alpha] + len(subsets[alpha])
    slack_offset = int(w_offsets[m])

    row_sum = np.arange(m)
    row_edge = m + np.arange(num_edges)
    row_bound = m + num_edges + np.arange(n)
    num_rows = m + num_edges + n

    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []

    def put(r: int, c: int, v: float) -> None:
        rows.append(r)
        cols.append(c)
        vals.append(v)

    edge = 0
    edge_base = np.zeros(m, dtype=np.int64)
    for alpha, row in enumerate(g.check_neighbors):
        edge_base[alpha] = edge
        for k, i in enumerate(row):
            put(int(row_edge[edge + k]), i, 1.0)
        for t, subset in enumerate(subsets[alpha]):
            col = int(w_offsets[alpha]) + t
            put(int(row_sum[alpha]), col, 1.0)
            for k in subset:
                put(int(row_edge[edge + k]), col, -1.0)
        edge += len(row)
    for i in range(n):
        put(int(row_bound[i]), i, 1.0)
        put(int(row_bound[i]), slack_offset + i, 1.0)

    # crash basis at the zero codeword: w_{a,empty} and s_i at 1, plus
    # zero-valued local words {0,j}, {1,2}; leftover edge rows get artificials
    basis: List[int] = []
    art_rows: List[int] = []
    for alpha, row in enumerate(g.check_neighbors):
        d = len(row)
        base = int(w_offsets[alpha])
        index = {s: base + t for t, s in enumerate(subsets[alpha])}
        basis.append(index[()])
        chosen = [index[(0, j)] for j in range(1, d)]
        if d >= 3:
            chosen.append(index[(1, 2)])
        basis.extend(chosen)
        for k in range(len(chosen), d):
            art_rows.append(int(row_edge[edge_base[alpha] + k]))
    basis.extend(slack_offset + i for i in range(n))

    art_offset = slack_offset + n
    for t, r in enumerate(art_rows):
        put(r, art_offset + t, 1.0)
        basis.append(art_offset + t)

    a = sp.csc_matrix(
        (vals, (rows, cols)), shape=(num_rows, art_offset + len(art_rows))
    )
    b = np.zeros(num_rows)
    b[row_sum] = 1.0
    b[row_bound] = 1.0
    logger.debug(
        f"LCLP with {slack_offset - n} auxiliary columns and "
        f"{len(art_rows)} artificials"
    )
    return LcLpInstance(
        graph=g,
        a=a,
        b=b,
        num_primal=n,
        w_offsets=w_offsets,
        subsets=subsets,
        slack_offset=slack_offset,
        num_artificial=len(art_rows),
        crash_basis=np.asarray(basis, dtype=np.int64),
    )


@dataclass(frozen=True)
class PseudoCodeword:
    """Re-scaled LP output f in [0, 1]^n."""

    f: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.f, dtype=np.float64)
        if arr.ndim != 1:
            raise InputError("pseudo-codeword must be a vector")
        if arr.size and (arr.min() < -TAU_INT or arr.max() > 1.0 + TAU_INT):
            raise InputError("pseudo-codeword entries must lie in [0, 1]")
        object.__setattr__(self, "f", np.clip(arr, 0.0, 1.0))

    @property
    def is_zero(self) -> bool:
        """All entries within TAU_INT of zero."""
        return bool(np.all(self.f <= TAU_INT))

    @property
    def is_integral(self) -> bool:
        """All entries within TAU_INT of 0 or 1."""
        return bool(np.all(np.minimum(self.f, 1.0 - self.f) <= TAU_INT))

    def rounded(self) -> np.ndarray:
        """Nearest binary vector."""
        return (self.f >= 0.5).astype(np.uint8)

    def distance(self, other: "PseudoCodeword") -> float:
        """L-infinity distance."""
        return float(np.max(np.abs(self.f - other.f), initial=0.0))


@dataclass
class LpResult:
    """LP decoder output."""

    pseudo_codeword: PseudoCodeword
    objective: float
    integral: bool
    solution: np.ndarray
    solver_stats: Dict[str, Any] = field(default_factory=dict)


def _pcw(p: Any) -> np.ndarray:
    f = p.f if isinstance(p, PseudoCodeword) else np.asarray(p, dtype=float)
    if f.size == 0 or np.all(f <= TAU_INT):
        raise ZeroPseudoCodewordError("pseudo-codeword is zero")
    return f


def _solve_highs(
    inst: LcLpInstance, c: np.ndarray
) -> Tuple[np.ndarray, Dict[str, Any]]:
    keep = inst.num_columns - inst.num_artificial
    res = linprog(
        c[:keep],
        A_eq=inst.a[:, :keep],
        b_eq=inst.b,
        bounds=(0, None),
        method="highs-ds",
    )
    if res.status != 0:
        raise SolverError(
            f"HiGHS failed: {res.message}", {"status": int(res.status)}
        )
    x = np.zeros(inst.num_columns)
    x[:keep] = res.x
    return x, {"pivots": int(getattr(res, "nit", 0)), "status": "optimal"}


def lp_solve(
    inst: LcLpInstance, gamma: Sequence[float], backend: str = "simplex"
) -> LpResult:
    """Minimize sum gamma_i f_i over the fundamental polytope."""
    g = inst.graph
    gamma = as_reals(gamma, g.n)
    if backend not in LP_BACKENDS:
        raise InputError(f"unknown LP backend '{backend}'")
    c = inst.objective(gamma)
    if backend == "highs":
        x, stats = _solve_highs(inst, c)
    else:
        result = solve_standard_form(
            c,
            inst.a,
            inst.b,
            basis=inst.crash_basis,
            artificial=inst.artificial_mask,
        )
        x, stats = result.x, dict(result.stats)
    stats["backend"] = backend
    violation = check_feasibility(inst, x)
    if violation > 100 * TAU_FEAS:
        raise SolverError(
            f"solution violates constraints by {violation:.3g}", stats
        )
    p = PseudoCodeword(np.clip(x[: g.n], 0.0, 1.0))
    return LpResult(
        pseudo_codeword=p,
        objective=float(gamma @ p.f),
        integral=p.is_integral,
        solution=x,
        solver_stats=stats,
    )


def check_feasibility(inst: LcLpInstance, x: np.ndarray) -> float:
    """Largest violation of the polytope equalities and bounds by x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != inst.num_columns:
        raise LengthMismatchError(
            f"solution length {x.shape[0]} does not match "
            f"{inst.num_columns} columns"
        )
    residual = np.abs(inst.a @ x - inst.b).max(initial=0.0)
    negative = max(0.0, -float(x.min(initial=0.0)))
    upper = max(0.0, float((x[: inst.slack_offset] - 1.0).max(initial=0.0)))
    artificial = float(
        np.abs(x[inst.num_columns - inst.num_artificial :]).max(initial=0.0)
    )
    return float(max(residual, negative, upper, artificial))


def polytope_violation(g: TannerGraph, f: Sequence[float]) -> float:
    """
    Largest violation of the forbidden-set inequalities by f.

    For every check and odd subset S of its neighborhood,
    sum_{S} f - sum_{rest} f <= |S| - 1. Together with 0 <= f <= 1 these
    describe the projection of the polytope onto f.
    """
    f = as_reals(f, g.n)
    worst = max(
        0.0, -float(f.min(initial=0.0)), float(f.max(initial=0.0)) - 1.0
    )
    for row in g.check_neighbors:
        local = f[list(row)]
        total = local.sum()
        for size in range(1, len(row) + 1, 2):
            for s in itertools.combinations(range(len(row)), size):
                inside = local[list(s)].sum()
                lhs = inside - (total - inside)
                worst = max(worst, lhs - (size - 1))
    return worst


def cost(gamma: Sequence[float], p: Any) -> float:
    """Cost sum gamma_i p_i of a pseudo-codeword."""
    f = p.f if isinstance(p, PseudoCodeword) else np.asarray(p, dtype=float)
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.shape != f.shape:
        raise LengthMismatchError(
            f"gamma length {gamma.shape[0]} does not match {f.shape[0]}"
        )
    return float(gamma @ f)


def w_bsc(p: Any) -> int:
    """BSC pseudo-codeword weight: 2e or 2e - 1.

    e is the smallest count whose largest entries sum to at least half
    the total; equality gives 2e.
    """
    f = _pcw(p)
    ordered = np.sort(f)[::-1]
    half = ordered.sum() / 2.0
    partial = np.cumsum(ordered)
    tol = TAU_FEAS * max(1.0, half)
    e = int(np.argmax(partial >= half - tol)) + 1
    if abs(partial[e - 1] - half) <= tol:
        return 2 * e
    return 2 * e - 1


def w_awgn(p: Any) -> float:
    """AWGN pseudo-codeword weight (sum p)^2 / sum p^2."""
    f = _pcw(p)
    return float(f.sum() ** 2 / np.dot(f, f))


def median(p: Any) -> BinaryVector:
    """Support on the ceil((w_bsc + 1) / 2) largest entries, low first."""
    f = _pcw(p)
    count = math.ceil((w_bsc(f) + 1) / 2)
    order = np.argsort(-f, kind="stable")
    return BinaryVector.from_support(f.shape[0], order[:count].tolist())


def bsc_gamma(bits: BitsLike, length: int) -> np.ndarray:
    """LLR direction of a BSC word with ties resolved toward failure."""
    arr = as_bits(bits, length)
    return np.where(arr == 1, -(1.0 + BSC_TIE_BIAS), 1.0)


def _format_term(coefficient: float, name: str, first: bool) -> str:
    sign = "-" if coefficient < 0 else ("" if first else "+")
    magnitude = abs(coefficient)
    text = name if magnitude == 1.0 else f"{magnitude:.17g} {name}"
    return f"{sign} {text}".strip() if first else f" {sign} {text}"


def write_lp(inst: LcLpInstance, gamma: Sequence[float]) -> str:
    """CPLEX LP text of the decoding problem, bounds in a Bounds section."""
    g = inst.graph
    gamma = as_reals(gamma, g.n)
    names = [f"f{i}" for i in range(g.n)]
    for alpha in range(g.m):
        names.extend(
            f"w{alpha}_{t}" for t in range(len(inst.subsets[alpha]))
        )
    lines = [
        f"\\ LP decoder, n={g.n} m={g.m}",
        "Minimize",
    ]
    terms = [
        _format_term(float(gamma[i]), names[i], i == 0)
        for i in range(g.n)
        if gamma[i] != 0.0 or i == 0
    ]
    lines.append(" obj: " + "".join(terms))
    lines.append("Subject To")
    edge = 0
    for alpha, row in enumerate(g.check_neighbors):
        base = int(inst.w_offsets[alpha])
        count = len(inst.subsets[alpha])
        lhs = "".join(
            _format_term(1.0, names[base + t], t == 0) for t in range(count)
        )
        lines.append(f" sum{alpha}: {lhs} = 1")
        for k, i in enumerate(row):
            parts = [_format_term(1.0, names[i], True)]
            parts.extend(
                _format_term(-1.0, names[base + t], False)
                for t, s in enumerate(inst.subsets[alpha])
                if k in s
            )
            lines.append(f" edge{edge}: {''.join(parts)} = 0")
            edge += 1
    lines.append("Bounds")
    lines.extend(f" 0 <= {name} <= 1" for name in names)
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpDecoder(BaseDecoder):
    """LP decoder bound to one code and backend."""

    name = "lp"

    def __init__(
        self,
        graph: TannerGraph,
        backend: str = "simplex",
        degree_cap: int = DEFAULT_DEGREE_CAP,
        instance: Optional[LcLpInstance] = None,
    ):
        super().__init__(graph)
        if backend not in LP_BACKENDS:
            raise InputError(f"unknown LP backend '{backend}'")
        self.backend = backend
        self.instance = instance or build_lclp(graph, degree_cap)
        self.solves = 0

    def solve(self, gamma: Sequence[float]) -> LpResult:
        """Run the LP for a cost vector."""
        self.solves += 1
        return lp_solve(self.instance, gamma, self.backend)

    def decode_bits(self, bits: BitsLike) -> PseudoCodeword:
        """Pseudo-codeword for a BSC word given by its flipped positions."""
        return self.solve(bsc_gamma(bits, self.graph.n)).pseudo_codeword

    def decode_noise(self, noise: Sequence[float]) -> PseudoCodeword:
        """Pseudo-codeword for AWGN observations 1 - noise."""
        gamma = 1.0 - as_reals(noise, self.graph.n)
        return self.solve(gamma).pseudo_codeword

    def fails(self, ch: ChannelModel, out: ChannelOutput) -> bool:
        if ch.kind is not out.kind:
            raise ChannelMismatchError(
                f"{out.kind.value} output given to a {ch.kind.value} channel"
            )
        if out.kind is ChannelKind.BSC:
            return not self.decode_bits(out.bits).is_zero
        return not self.decode_noise(1.0 - out.values).is_zero

    def fails_bits(
        self, bits: BitsLike, ch: Optional[ChannelModel] = None
    ) -> bool:
        return not self.decode_bits(bits).is_zero

    def describe(self) -> str:
        return f"lp/{self.backend}"
