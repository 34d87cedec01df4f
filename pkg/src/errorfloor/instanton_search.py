"""Instanton searches for LP and iterative decoders.

ISA walks BSC medians of LP pseudo-codewords, PCS iterates the AWGN
projection of pseudo-codewords, the amoeba minimizes the error-surface
distance of iterative decoders, and the critical-number search tries
subsets of known trapping sets.
"""

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import (Any, Dict, Iterable, List, Optional, Sequence, Tuple,
                    Union)

import numpy as np

from errorfloor.amoeba import NelderMead, simplex_diameter
from errorfloor.channel import (ChannelKind, ChannelModel, ChannelOutput,
                                derive_rng)
from errorfloor.code_model import TannerGraph
from errorfloor.constants import (AMOEBA_INITIAL_STEP, AMOEBA_MAX_EVALUATIONS,
                                  AWGN_DEDUP_QUANTUM, CRITICAL_SIZE_CAP,
                                  DEFAULT_DEGREE_CAP, DEFAULT_FLIPS,
                                  DEFAULT_NOISE_STRENGTH,
                                  DEFAULT_TRAPPING_WINDOW, DELTA,
                                  DOMINANT_NOISE_MASS, ISA_RETRY_CAP,
                                  PCS_STEP_CAP, SCALE_CAP, SEARCH_METHODS,
                                  SURFACE_REBISECT_CAP, TAU_INT, TAU_STOP,
                                  TAU_SURF, VERIFY_EXHAUSTIVE_CAP)
from errorfloor.decoder_base import BaseDecoder, IterativeDecoder
from errorfloor.errors import (AlgorithmError, ConvergenceError, InputError,
                               RetryCapError, SurfaceNotFoundError,
                               ZeroPseudoCodewordError)
from errorfloor.iter_decode import (IterConfig, Outcome, decode,
                                    extract_trapping_set)
from errorfloor.logging_config import get_logger, timer
from errorfloor.lp_decode import (LpDecoder, PseudoCodeword, median, w_awgn,
                                  w_bsc)
from errorfloor.types import (BinaryVector, BitsLike, SubgraphClass,
                              TrappingSetReport, as_bits, as_reals)
from errorfloor.workers import run_ordered

logger = get_logger(__name__)


@dataclass
class InstantonRecord:
    """
    One instanton with its search provenance.

    BSC instantons are stored as a support, AWGN instantons as a noise
    vector n with received values 1 - n. The weight is the support size
    or the squared noise norm.
    """

    channel: ChannelKind
    decoder: str
    method: str
    length: int
    weight: float
    support: Optional[Tuple[int, ...]] = None
    noise: Optional[np.ndarray] = None
    pseudo_codeword: Optional[np.ndarray] = None
    trapping_set: Optional[TrappingSetReport] = None
    seed: Optional[int] = None
    steps: int = 0
    weight_trajectory: List[float] = field(default_factory=list)
    parameters: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.channel is ChannelKind.BSC:
            if self.support is None or self.noise is not None:
                raise InputError("BSC instantons carry a support only")
            self.support = BinaryVector.from_support(
                self.length, self.support
            ).support
            if self.weight != len(self.support):
                raise InputError(
                    f"weight {self.weight} does not match support size "
                    f"{len(self.support)}"
                )
        else:
            if self.noise is None or self.support is not None:
                raise InputError("AWGN instantons carry a noise vector only")
            self.noise = as_reals(self.noise, self.length)
            norm = float(np.dot(self.noise, self.noise))
            if not math.isclose(self.weight, norm, rel_tol=1e-9):
                raise InputError(
                    f"weight {self.weight} does not match squared noise "
                    f"norm {norm}"
                )

    @property
    def vector(self) -> Union[BinaryVector, np.ndarray]:
        """The instanton as a BinaryVector or noise array."""
        if self.channel is ChannelKind.BSC:
            return BinaryVector.from_support(self.length, self.support)
        return self.noise

    @property
    def pseudo_codeword_weight(self) -> Optional[float]:
        """Channel weight of the attributed pseudo-codeword, if any."""
        if self.pseudo_codeword is None:
            return None
        p = PseudoCodeword(self.pseudo_codeword)
        if p.is_zero:
            return None
        if self.channel is ChannelKind.BSC:
            return float(w_bsc(p))
        return w_awgn(p)

    def key(self) -> Tuple[Any, ...]:
        """Deduplication key: support, or noise quantized to 1e-6."""
        if self.channel is ChannelKind.BSC:
            return ("bsc", self.support)
        quantized = np.round(self.noise / AWGN_DEDUP_QUANTUM).astype(np.int64)
        return ("awgn", tuple(quantized.tolist()))

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready export."""
        data: Dict[str, Any] = {
            "channel": self.channel.value,
            "decoder": self.decoder,
            "method": self.method,
            "seed": self.seed,
            "length": self.length,
            "weight": self.weight,
            "steps": self.steps,
            "weight_trajectory": list(self.weight_trajectory),
            "parameters": dict(self.parameters),
        }
        if self.channel is ChannelKind.BSC:
            data["support"] = list(self.support)
        else:
            data["noise"] = self.noise.tolist()
        data["pseudo_codeword"] = (
            None
            if self.pseudo_codeword is None
            else self.pseudo_codeword.tolist()
        )
        data["trapping_set"] = (
            None if self.trapping_set is None else self.trapping_set.to_dict()
        )
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InstantonRecord":
        """Inverse of to_dict."""
        ts = data.get("trapping_set")
        pcw = data.get("pseudo_codeword")
        return cls(
            channel=ChannelKind(data["channel"]),
            decoder=data["decoder"],
            method=data["method"],
            length=int(data["length"]),
            weight=data["weight"],
            support=(
                tuple(data["support"]) if "support" in data else None
            ),
            noise=(
                np.asarray(data["noise"], dtype=np.float64)
                if "noise" in data
                else None
            ),
            pseudo_codeword=(
                None if pcw is None else np.asarray(pcw, dtype=np.float64)
            ),
            trapping_set=(
                None
                if ts is None
                else TrappingSetReport(
                    support=tuple(ts["support"]),
                    a=int(ts["a"]),
                    b=int(ts["b"]),
                    window_used=int(ts["window_used"]),
                    unresolved=bool(ts.get("unresolved", False)),
                )
            ),
            seed=data.get("seed"),
            steps=int(data.get("steps", 0)),
            weight_trajectory=list(data.get("weight_trajectory", [])),
            parameters=dict(data.get("parameters", {})),
        )


@dataclass(frozen=True)
class AmoebaConfig:
    """Nelder-Mead and error-surface settings of the amoeba search."""

    reflect: float = 1.0
    expand: float = 2.0
    contract: float = 0.5
    shrink: float = 0.5
    tau_stop: float = TAU_STOP
    tau_surf: float = TAU_SURF
    delta: float = DELTA
    scale_cap: float = SCALE_CAP
    max_evaluations: int = AMOEBA_MAX_EVALUATIONS
    initial_step: float = AMOEBA_INITIAL_STEP
    support: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if min(self.reflect, self.expand, self.contract, self.shrink) <= 0:
            raise InputError("amoeba coefficients must be positive")
        if min(self.tau_stop, self.tau_surf, self.delta) <= 0:
            raise InputError("amoeba tolerances must be positive")
        if self.scale_cap <= 0 or self.initial_step <= 0:
            raise InputError("scale cap and initial step must be positive")
        if self.support is not None:
            object.__setattr__(
                self, "support", tuple(sorted(set(self.support)))
            )
            if not self.support:
                raise InputError("restricted support must be nonempty")

    def as_parameters(self) -> Dict[str, float]:
        """Tolerances recorded with every amoeba instanton."""
        return {
            "delta": self.delta,
            "tau_surf": self.tau_surf,
            "tau_stop": self.tau_stop,
            "scale_cap": self.scale_cap,
        }


# LP over the BSC


def isa_bsc_lp(
    decoder: LpDecoder,
    flips: int,
    rng: np.random.Generator,
    retry_cap: int = ISA_RETRY_CAP,
    seed: Optional[int] = None,
) -> InstantonRecord:
    """
    Instanton search from a random BSC word with `flips` flipped bits.

    Each step decodes the median M of the current pseudo-codeword p. A
    lighter output replaces p. Otherwise the bits of M are dropped one at
    a time in ascending order and the first failing reduced word replaces p;
    when every reduced word decodes correctly, M is an instanton.

    Raises:
        RetryCapError: no initial word decoded to a nonzero pseudo-codeword
        ConvergenceError: the walk did not halt within n steps
    """
    n = decoder.graph.n
    if not 1 <= flips <= n:
        raise InputError(f"flips must lie in [1, {n}], got {flips}")

    for attempt in range(1, retry_cap + 1):
        start = rng.choice(n, size=flips, replace=False)
        p = decoder.decode_bits(BinaryVector.from_support(n, start.tolist()))
        if not p.is_zero:
            break
    else:
        raise RetryCapError(
            f"no decoding failure from {retry_cap} random {flips}-bit words"
        )
    logger.debug(f"ISA start after {attempt} draw(s), w_bsc={w_bsc(p)}")

    trajectory: List[float] = [float(w_bsc(p))]
    for step in range(1, n + 1):
        m = median(p)
        p_m = decoder.decode_bits(m)
        if p_m.is_zero:
            # cost of p is strictly negative on its median
            raise ConvergenceError(
                "median decoded to the zero codeword", trajectory
            )
        if w_bsc(p_m) < trajectory[-1]:
            p = p_m
            trajectory.append(float(w_bsc(p)))
            continue

        for i in m.support:
            reduced = BinaryVector.from_support(
                n, (j for j in m.support if j != i)
            )
            p_i = decoder.decode_bits(reduced)
            if not p_i.is_zero:
                p = p_i
                trajectory.append(float(w_bsc(p)))
                break
        else:
            logger.debug(
                f"ISA halted after {step} steps at size {m.weight}"
            )
            return InstantonRecord(
                channel=ChannelKind.BSC,
                decoder=decoder.describe(),
                method="isa",
                length=n,
                weight=m.weight,
                support=m.support,
                pseudo_codeword=p_m.f.copy(),
                seed=seed,
                steps=step,
                weight_trajectory=trajectory,
                parameters={"flips": flips},
            )
    raise ConvergenceError(f"ISA did not halt within {n} steps", trajectory)


# LP over the AWGN channel


def awgn_instanton_from_pcw(
    p: Union[PseudoCodeword, np.ndarray]
) -> np.ndarray:
    """Minimum-norm noise on the plane sum p_i (1 - n_i) = 0."""
    f = p.f if isinstance(p, PseudoCodeword) else np.asarray(p, dtype=float)
    if f.size == 0 or np.all(f <= TAU_INT):
        raise ZeroPseudoCodewordError("pseudo-codeword is zero")
    return f * (f.sum() / np.dot(f, f))


def pcs_from_pseudo_codeword(
    decoder: LpDecoder,
    p: PseudoCodeword,
    delta: float = DELTA,
    step_cap: int = PCS_STEP_CAP,
    seed: Optional[int] = None,
) -> InstantonRecord:
    """
    PCS iteration from a nonzero pseudo-codeword.

    The instanton of p is pushed past the error surface by 1 + delta and
    decoded again until two successive pseudo-codewords agree within
    TAU_INT.
    """
    n = decoder.graph.n
    trajectory: List[float] = [w_awgn(p)]
    for step in range(1, step_cap + 1):
        noise = awgn_instanton_from_pcw(p)
        p_next = decoder.decode_noise((1.0 + delta) * noise)
        if p_next.is_zero:
            raise ConvergenceError(
                "scaled instanton decoded to the zero codeword", trajectory
            )
        trajectory.append(w_awgn(p_next))
        if p_next.distance(p) < TAU_INT:
            noise = awgn_instanton_from_pcw(p_next)
            return InstantonRecord(
                channel=ChannelKind.AWGN,
                decoder=decoder.describe(),
                method="pcs",
                length=n,
                weight=float(np.dot(noise, noise)),
                noise=noise,
                pseudo_codeword=p_next.f.copy(),
                seed=seed,
                steps=step,
                weight_trajectory=trajectory,
                parameters={"delta": delta, "tau_int": TAU_INT},
            )
        p = p_next
    raise ConvergenceError(
        f"PCS did not converge within {step_cap} steps", trajectory
    )


def pcs_from_noise(
    decoder: LpDecoder,
    noise: Sequence[float],
    delta: float = DELTA,
    step_cap: int = PCS_STEP_CAP,
) -> InstantonRecord:
    """PCS started from a given noise configuration."""
    p = decoder.decode_noise(noise)
    if p.is_zero:
        raise InputError("starting noise decodes to the zero codeword")
    return pcs_from_pseudo_codeword(decoder, p, delta, step_cap)


def pcs_awgn_lp(
    decoder: LpDecoder,
    initial_noise_strength: float,
    rng: np.random.Generator,
    retry_cap: int = ISA_RETRY_CAP,
    delta: float = DELTA,
    step_cap: int = PCS_STEP_CAP,
    seed: Optional[int] = None,
) -> InstantonRecord:
    """
    Pseudo-codeword search from Gaussian noise of the given strength.

    Raises:
        RetryCapError: no start decoded to a nonzero pseudo-codeword
        ConvergenceError: step cap reached, with the w_awgn trajectory
    """
    if initial_noise_strength <= 0:
        raise InputError("initial noise strength must be positive")
    n = decoder.graph.n
    for _ in range(retry_cap):
        noise = initial_noise_strength * rng.standard_normal(n)
        p = decoder.decode_noise(noise)
        if not p.is_zero:
            break
    else:
        raise RetryCapError(
            f"no decoding failure from {retry_cap} noise draws of strength "
            f"{initial_noise_strength}"
        )
    record = pcs_from_pseudo_codeword(decoder, p, delta, step_cap, seed)
    record.parameters["strength"] = initial_noise_strength
    return record


# iterative decoders over the AWGN channel


def _unit(direction: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise InputError("direction must be nonzero")
    return direction / norm


def scale_to_error_surface(
    decoder: BaseDecoder,
    ch: ChannelModel,
    direction: Sequence[float],
    delta: float = DELTA,
    tau_surf: float = TAU_SURF,
    scale_cap: float = SCALE_CAP,
) -> float:
    """
    Distance s* along a unit direction at which decoding starts to fail.

    Decoding of 1 - s * direction fails at s = (1 + delta) s* and succeeds
    at (1 - delta) s*. The failing scale is bracketed by doubling from 1
    up to scale_cap and then bisected to relative width tau_surf.

    Raises:
        SurfaceNotFoundError: no failure up to scale_cap
    """
    direction = as_reals(direction, decoder.graph.n)
    if not math.isclose(np.linalg.norm(direction), 1.0, rel_tol=1e-9):
        raise InputError("direction must have unit norm")

    def fails(scale: float) -> bool:
        return decoder.fails_noise(ch, scale * direction)

    lo, hi = 0.0, None
    scale = 1.0
    while scale < scale_cap:
        if fails(scale):
            hi = scale
            break
        lo = scale
        scale *= 2.0
    if hi is None:
        if not fails(scale_cap):
            raise SurfaceNotFoundError(
                f"decoder corrects the direction up to scale {scale_cap}"
            )
        hi = scale_cap

    for _ in range(SURFACE_REBISECT_CAP):
        while hi - lo > tau_surf * hi:
            mid = 0.5 * (lo + hi)
            if fails(mid):
                hi = mid
            else:
                lo = mid
        surface = hi / (1.0 + delta)
        below = (1.0 - delta) * surface
        if not fails(below):
            return surface
        # a failure region below the bracket; search underneath it
        lo, hi = 0.0, below
    raise SurfaceNotFoundError(
        "error surface not certified after repeated bisection"
    )


def surface_certificate(
    decoder: BaseDecoder,
    ch: ChannelModel,
    record: InstantonRecord,
    delta: float = DELTA,
) -> bool:
    """Replay the fail-above/succeed-below check of a stored instanton."""
    if record.channel is ChannelKind.BSC:
        return verify_instanton(decoder, record.vector, ch)
    return decoder.fails_noise(
        ch, (1.0 + delta) * record.noise
    ) and not decoder.fails_noise(ch, (1.0 - delta) * record.noise)


def dominant_support(
    noise: Sequence[float], mass: float = DOMINANT_NOISE_MASS
) -> Tuple[int, ...]:
    """Fewest positions carrying at least `mass` of the squared noise."""
    arr = np.asarray(noise, dtype=np.float64)
    if not 0.0 < mass <= 1.0:
        raise InputError("mass must lie in (0, 1]")
    energy = arr * arr
    total = energy.sum()
    if total == 0.0:
        raise InputError("noise is zero")
    order = np.argsort(-energy, kind="stable")
    count = int(np.searchsorted(np.cumsum(energy[order]), mass * total)) + 1
    return tuple(sorted(int(i) for i in order[: min(count, arr.size)]))


def _iterative_trapping_set(
    decoder: BaseDecoder, ch: ChannelModel, noise: np.ndarray
) -> Optional[TrappingSetReport]:
    if not isinstance(decoder, IterativeDecoder):
        return None
    trace = decode(
        decoder.graph, ch, ChannelOutput.from_noise(noise), decoder.cfg
    )
    if trace.outcome is not Outcome.FAILURE:
        return None
    return extract_trapping_set(trace, decoder.graph)


def amoeba_iterative(
    decoder: BaseDecoder,
    ch: ChannelModel,
    cfg: AmoebaConfig,
    rng: np.random.Generator,
    seed_point: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
) -> InstantonRecord:
    """
    Nelder-Mead search for the closest error-surface point.

    Every vertex is a noise direction (restricted to cfg.support when set)
    scored by the squared distance to the error surface along it. A seed
    point, such as an LP instanton, becomes the first vertex.

    Raises:
        SurfaceNotFoundError: no direction of the initial simplex fails
    """
    if ch.kind is not ChannelKind.AWGN:
        raise InputError("amoeba search runs on the AWGN channel")
    n = decoder.graph.n
    support = np.arange(n) if cfg.support is None else np.array(cfg.support)
    if support.min() < 0 or support.max() >= n:
        raise InputError("restricted support outside the code")

    def embed(y: np.ndarray) -> np.ndarray:
        full = np.zeros(n)
        full[support] = y
        return full

    def objective(y: np.ndarray) -> float:
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return math.inf
        try:
            s = scale_to_error_surface(
                decoder,
                ch,
                embed(y / norm),
                cfg.delta,
                cfg.tau_surf,
                cfg.scale_cap,
            )
        except SurfaceNotFoundError:
            return math.inf
        return s * s

    def diameter(vertices: np.ndarray) -> float:
        norms = np.linalg.norm(vertices, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return simplex_diameter(vertices / norms)

    if seed_point is not None:
        x0 = as_reals(seed_point, n)[support]
        if not np.any(x0):
            raise InputError("seed point vanishes on the search support")
        x0 = _unit(x0)
    else:
        x0 = _unit(np.abs(rng.standard_normal(support.size)))

    optimizer = NelderMead(
        objective,
        reflect=cfg.reflect,
        expand=cfg.expand,
        contract=cfg.contract,
        shrink=cfg.shrink,
        tol=cfg.tau_stop,
        max_evaluations=cfg.max_evaluations,
        diameter=diameter,
    )
    vertices = optimizer.initial_simplex(x0, cfg.initial_step)
    values = np.array([optimizer.evaluate(v) for v in vertices])
    if not np.isfinite(values).any():
        raise SurfaceNotFoundError(
            f"no failing direction in the initial simplex up to scale "
            f"{cfg.scale_cap}"
        )
    with timer(logger, "amoeba minimization"):
        result = optimizer.minimize(vertices, values)

    direction = embed(_unit(result.x))
    scale = scale_to_error_surface(
        decoder, ch, direction, cfg.delta, cfg.tau_surf, cfg.scale_cap
    )
    noise = scale * direction
    if not result.converged:
        logger.warning(
            f"Amoeba stopped at the evaluation cap with diameter "
            f"{result.diameter:.3g}"
        )
    parameters = cfg.as_parameters()
    parameters["sigma"] = ch.sigma
    parameters["converged"] = float(result.converged)
    return InstantonRecord(
        channel=ChannelKind.AWGN,
        decoder=decoder.describe(),
        method="amoeba",
        length=n,
        weight=float(np.dot(noise, noise)),
        noise=noise,
        trapping_set=_iterative_trapping_set(
            decoder, ch, (1.0 + cfg.delta) * noise
        ),
        seed=seed,
        steps=result.iterations,
        weight_trajectory=result.history,
        parameters=parameters,
    )


# Gallager decoders over the BSC


@dataclass
class CriticalNumberResult:
    """Smallest failing sub-support of a trapping set, or a lower bound."""

    trapping_set: Tuple[int, ...]
    critical_number: Optional[int]
    witness: Optional[BinaryVector]
    lower_bound: int
    attempts: int

    @property
    def exhausted(self) -> bool:
        """True when no failing subset was found within the size cap."""
        return self.critical_number is None

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready export."""
        return {
            "trapping_set": list(self.trapping_set),
            "critical_number": self.critical_number,
            "witness": (
                None if self.witness is None else list(self.witness.support)
            ),
            "exhausted": self.exhausted,
            "lower_bound": self.lower_bound,
            "attempts": self.attempts,
        }


def critical_number_search(
    decoder: IterativeDecoder,
    ts: Iterable[int],
    size_cap: int = CRITICAL_SIZE_CAP,
    window: int = DEFAULT_TRAPPING_WINDOW,
    ch: Optional[ChannelModel] = None,
) -> CriticalNumberResult:
    """
    Fewest flipped bits of ts that trap the decoder inside ts.

    Subsets are tried by size and then in lexicographic order. A subset
    counts when decoding fails and the variables left in error (the
    trapping set of the trace, or the support of a wrong codeword) lie
    inside ts.
    """
    g = decoder.graph
    members = tuple(sorted(set(int(v) for v in ts)))
    if not members:
        raise InputError("trapping set must be nonempty")
    if members[0] < 0 or members[-1] >= g.n:
        raise InputError("trapping set outside the code")
    if ch is None:
        ch = ChannelModel.bsc(0.25)
    inside = set(members)
    attempts = 0
    top = min(size_cap, len(members))
    for k in range(1, top + 1):
        for subset in itertools.combinations(members, k):
            attempts += 1
            word = BinaryVector.from_support(g.n, subset)
            trace = decode(g, ch, ChannelOutput.from_bits(word), decoder.cfg)
            if not trace.failed:
                continue
            if trace.outcome is Outcome.FAILURE:
                trapped = extract_trapping_set(trace, g, window).support
            else:
                trapped = trace.final_support
            if set(trapped) <= inside:
                return CriticalNumberResult(
                    trapping_set=members,
                    critical_number=k,
                    witness=word,
                    lower_bound=k,
                    attempts=attempts,
                )
    return CriticalNumberResult(
        trapping_set=members,
        critical_number=None,
        witness=None,
        lower_bound=top + 1,
        attempts=attempts,
    )


def verify_instanton(
    decoder: BaseDecoder,
    candidate: BitsLike,
    ch: Optional[ChannelModel] = None,
    exhaustive_cap: int = VERIFY_EXHAUSTIVE_CAP,
) -> bool:
    """
    True iff the BSC word fails and none of its sub-supports does.

    For the LP decoder failures are closed under supersets, so dropping
    one bit at a time settles the question. Other decoders get every
    strict subset checked while the support has at most exhaustive_cap
    bits, and the one-bit-smaller subsets beyond that.
    """
    n = decoder.graph.n
    bits = as_bits(candidate, n)
    if not decoder.fails_bits(bits, ch):
        return False
    support = tuple(int(i) for i in np.flatnonzero(bits))
    if isinstance(decoder, LpDecoder) or len(support) > exhaustive_cap:
        sizes: Iterable[int] = [len(support) - 1]
    else:
        sizes = range(len(support) - 1, -1, -1)
    for size in sizes:
        for subset in itertools.combinations(support, size):
            word = BinaryVector.from_support(n, subset)
            if decoder.fails_bits(word, ch):
                return False
    return True


def critical_numbers_for_census(
    decoder: IterativeDecoder,
    census: SubgraphClass,
    sample: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    size_cap: int = CRITICAL_SIZE_CAP,
    workers: int = 1,
) -> List[CriticalNumberResult]:
    """Critical numbers of all census members or a sorted random sample."""
    members = census.sorted().members
    if sample is not None and sample < len(members):
        if rng is None:
            raise InputError("sampling census members needs a generator")
        chosen = np.sort(rng.choice(len(members), size=sample, replace=False))
        members = [members[i] for i in chosen]
    jobs = [(decoder, m, size_cap) for m in members]
    with timer(logger, f"critical numbers of {len(members)} sets"):
        return run_ordered(critical_number_search, jobs, workers)


# multi-start driver


class InstantonSet:
    """Deduplicated instantons with per-weight total and unique counts."""

    def __init__(self) -> None:
        self._records: Dict[Tuple[Any, ...], InstantonRecord] = {}
        self._totals: Counter = Counter()
        self.failures: List[Dict[str, Any]] = []

    def add(self, record: InstantonRecord) -> bool:
        """Insert a record; returns True when it is new."""
        weight = self.weight_bin(record)
        self._totals[weight] += 1
        key = record.key()
        if key in self._records:
            return False
        self._records[key] = record
        return True

    def add_failure(self, index: int, seed: int, error: Exception) -> None:
        """Remember a trial that ended in an algorithmic error."""
        self.failures.append(
            {
                "trial": index,
                "seed": seed,
                "error": type(error).__name__,
                "message": str(error),
            }
        )

    @staticmethod
    def weight_bin(record: InstantonRecord) -> float:
        """Histogram bin: exact size for BSC, 4 decimals for AWGN."""
        if record.channel is ChannelKind.BSC:
            return int(record.weight)
        return round(record.weight, 4)

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> List[InstantonRecord]:
        """Unique records by weight, then key."""
        return sorted(
            self._records.values(), key=lambda r: (r.weight, r.key())
        )

    @property
    def minimum_weight(self) -> Optional[float]:
        """Smallest instanton weight found."""
        if not self._records:
            return None
        return min(r.weight for r in self._records.values())

    def histogram(self) -> List[Tuple[float, int, int]]:
        """(weight, total hits, unique instantons) sorted by weight."""
        unique = Counter(self.weight_bin(r) for r in self._records.values())
        return [(w, self._totals[w], unique[w]) for w in sorted(self._totals)]

    def histogram_csv(self) -> str:
        """Histogram as CSV with header weight,total,unique."""
        lines = ["weight,total,unique"]
        lines.extend(f"{w},{t},{u}" for w, t, u in self.histogram())
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        """One JSON record per line, lightest first."""
        return "".join(
            json.dumps(r.to_dict()) + "\n" for r in self.records
        )

    def write_jsonl(self, path: Path) -> None:
        """Write to_jsonl() to a file."""
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read_jsonl(cls, path: Path) -> "InstantonSet":
        """Load records written by write_jsonl."""
        result = cls()
        text = Path(path).read_text(encoding="utf-8")
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                result.add(InstantonRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as e:
                raise InputError(f"{path}:{number}: bad instanton record: {e}")
        return result


@dataclass
class SearchSpec:
    """Everything a worker needs to run trials of one search method."""

    method: str
    graph: TannerGraph
    flips: int = DEFAULT_FLIPS
    noise_strength: float = DEFAULT_NOISE_STRENGTH
    lp_backend: str = "simplex"
    degree_cap: int = DEFAULT_DEGREE_CAP
    iter_cfg: Optional[IterConfig] = None
    sigma: Optional[float] = None
    amoeba: AmoebaConfig = field(default_factory=AmoebaConfig)
    seed_point: Optional[np.ndarray] = None
    retry_cap: int = ISA_RETRY_CAP
    step_cap: int = PCS_STEP_CAP

    def __post_init__(self) -> None:
        if self.method not in SEARCH_METHODS or self.method == "critical":
            raise InputError(
                f"'{self.method}' is not a multi-start search method"
            )
        if self.method == "amoeba" and (
            self.iter_cfg is None or self.sigma is None
        ):
            raise InputError("amoeba search needs a decoder and sigma")

    def make_decoder(self) -> BaseDecoder:
        """Fresh decoder for one worker."""
        if self.method == "amoeba":
            return IterativeDecoder(self.graph, self.iter_cfg)
        return LpDecoder(self.graph, self.lp_backend, self.degree_cap)

    def run_one(
        self, decoder: BaseDecoder, rng: np.random.Generator, seed: int
    ) -> InstantonRecord:
        """One trial with its own generator."""
        if self.method == "isa":
            return isa_bsc_lp(decoder, self.flips, rng, self.retry_cap, seed)
        if self.method == "pcs":
            return pcs_awgn_lp(
                decoder,
                self.noise_strength,
                rng,
                self.retry_cap,
                step_cap=self.step_cap,
                seed=seed,
            )
        return amoeba_iterative(
            decoder,
            ChannelModel.awgn(self.sigma),
            self.amoeba,
            rng,
            self.seed_point,
            seed,
        )


TrialOutcome = Tuple[int, Optional[InstantonRecord], Optional[Exception]]


def _run_chunk(
    spec: SearchSpec, base_seed: int, indices: List[int]
) -> List[TrialOutcome]:
    decoder = spec.make_decoder()
    outcomes: List[TrialOutcome] = []
    for index in indices:
        try:
            record = spec.run_one(
                decoder, derive_rng(base_seed, index), base_seed + index
            )
            outcomes.append((index, record, None))
        except AlgorithmError as e:
            outcomes.append((index, None, e))
    return outcomes


def run_trials(
    spec: SearchSpec, trials: int, seed: int, workers: int = 1
) -> InstantonSet:
    """
    Independent searches, trial i seeded with seed + i.

    Trials are dealt round-robin to workers and merged back in trial
    order, so the result does not depend on the worker count. Trials that
    hit a retry, step or solver cap are kept in InstantonSet.failures.
    """
    if trials < 1:
        raise InputError("trials must be at least 1")
    workers = max(1, min(workers, trials))
    jobs = [
        (spec, seed, list(range(w, trials, workers))) for w in range(workers)
    ]
    with timer(logger, f"{trials} {spec.method} trials"):
        chunks = run_ordered(_run_chunk, jobs, workers)
    result = InstantonSet()
    for index, record, error in sorted(
        (o for chunk in chunks for o in chunk), key=lambda o: o[0]
    ):
        if record is not None:
            result.add(record)
        else:
            logger.warning(f"Trial {index} failed: {error}")
            result.add_failure(index, seed + index, error)
    logger.info(
        f"{spec.method}: {len(result)} unique instantons from {trials} "
        f"trials, minimum weight {result.minimum_weight}"
    )
    return result
