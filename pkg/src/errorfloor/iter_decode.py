"""Gallager A/B, belief-propagation and min-sum decoders.

All decoders use flooding schedules over the edge arrays of a TannerGraph.
Kernels operate on (batch, edges) arrays; single-frame decoding records a
per-iteration hard-decision trace.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from errorfloor.channel import (ChannelKind, ChannelModel, ChannelOutput,
                                hard_decision, llr)
from errorfloor.code_model import TannerGraph, classify_subgraph
from errorfloor.constants import (BP_MESSAGE_CLIP, DEFAULT_MAX_ITERATIONS,
                                  DEFAULT_TRAPPING_WINDOW)
from errorfloor.errors import DecoderConfigError, InputError
from errorfloor.types import (BinaryVector, BitsLike, TrappingSetReport,
                              as_bits, as_reals)

_ATANH_LIMIT = np.nextafter(1.0, 0.0)


class Algorithm(str, Enum):
    """Message-passing rules."""

    GALLAGER_A = "gallager-a"
    GALLAGER_B = "gallager-b"
    BP = "bp"
    MIN_SUM = "min-sum"

    @property
    def is_hard(self) -> bool:
        """True for binary-message decoders."""
        return self in (Algorithm.GALLAGER_A, Algorithm.GALLAGER_B)


class Outcome(str, Enum):
    """How a decoding attempt ended."""

    CONVERGED_ZERO = "converged_zero"
    CONVERGED_OTHER_CODEWORD = "converged_other_codeword"
    FAILURE = "failure"


ThresholdMap = Mapping[Tuple[int, int], int]


def default_threshold(degree: int) -> int:
    """Gallager B threshold: d - 1 up to degree 3, ceil((d + 1) / 2) above."""
    if degree <= 3:
        return max(degree - 1, 1)
    return math.ceil((degree + 1) / 2)


def default_thresholds(
    degrees: List[int], max_iterations: int
) -> Dict[Tuple[int, int], int]:
    """Full (iteration, degree) -> threshold table with default values."""
    return {
        (k, d): default_threshold(d)
        for k in range(1, max_iterations + 1)
        for d in sorted(set(degrees))
        if d >= 2
    }


@dataclass(frozen=True)
class IterConfig:
    """
    Iterative decoder settings.

    Gallager B thresholds are keyed by (iteration, variable degree) with
    iterations counted from 1. A key with iteration 0 applies to every
    iteration without its own entry. None selects the default schedule.
    """

    algorithm: Algorithm
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    thresholds: Optional[ThresholdMap] = None
    halt_on_codeword: bool = True

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise DecoderConfigError("max_iterations must be positive")
        if self.thresholds is None:
            return
        if self.algorithm is not Algorithm.GALLAGER_B:
            raise DecoderConfigError(
                "thresholds apply to Gallager B only"
            )
        for (k, d), b in self.thresholds.items():
            if d >= 2 and not math.ceil(d / 2) <= b <= d - 1:
                raise DecoderConfigError(
                    f"threshold {b} for iteration {k}, degree {d} "
                    f"outside [{math.ceil(d / 2)}, {d - 1}]"
                )

    def threshold(self, k: int, degree: int) -> int:
        """b_{k,d}; degree-one variables always repeat the channel bit."""
        if degree < 2:
            return 1
        if self.algorithm is Algorithm.GALLAGER_A:
            return degree - 1
        if self.thresholds is None:
            return default_threshold(degree)
        for key in ((k, degree), (0, degree)):
            if key in self.thresholds:
                return int(self.thresholds[key])
        raise DecoderConfigError(
            f"missing threshold for iteration {k}, degree {degree}"
        )


@dataclass
class MessageState:
    """Directed-edge messages of one batch of frames."""

    var_to_check: np.ndarray
    check_to_var: np.ndarray

    def take(self, rows: np.ndarray) -> "MessageState":
        """Restrict to the given frames."""
        return MessageState(self.var_to_check[rows], self.check_to_var[rows])


@dataclass
class DecodeTrace:
    """Per-iteration hard decisions of one decoding attempt."""

    algorithm: Algorithm
    max_iterations: int
    decisions: List[np.ndarray]
    halted_at: Optional[int]
    outcome: Outcome

    @property
    def failed(self) -> bool:
        """True unless the decoder settled on the transmitted zero word."""
        return self.outcome is not Outcome.CONVERGED_ZERO

    @property
    def final_decision(self) -> np.ndarray:
        """Last recorded decision x^(k)."""
        return self.decisions[-1]

    def decision(self, k: int) -> BinaryVector:
        """Decision after iteration k as a BinaryVector."""
        return BinaryVector.from_array(self.decisions[k])

    @property
    def final_support(self) -> Tuple[int, ...]:
        """Positions decided 1 at the end."""
        return tuple(int(i) for i in np.flatnonzero(self.final_decision))


@dataclass
class BatchResult:
    """Final decisions and outcomes of a batch of frames."""

    decisions: np.ndarray
    halted_at: np.ndarray
    outcomes: List[Outcome] = field(default_factory=list)

    @property
    def failed(self) -> np.ndarray:
        """Boolean failure mask."""
        return np.array(
            [o is not Outcome.CONVERGED_ZERO for o in self.outcomes],
            dtype=bool,
        )


# kernels


def _gallager_check(g: TannerGraph, omega: np.ndarray) -> np.ndarray:
    parity = np.rint(g.sum_per_check(omega)).astype(np.int64) % 2
    return (parity[:, g.edge_check] ^ omega).astype(np.uint8)


def _gallager_variable(
    g: TannerGraph,
    varpi: np.ndarray,
    received: np.ndarray,
    b_var: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    ones = np.rint(g.sum_per_var(varpi)).astype(np.int64)
    degree = g.var_degrees
    ext_ones = ones[:, g.edge_var] - varpi
    ext_zeros = (degree[g.edge_var] - 1) - ext_ones
    b_edge = b_var[g.edge_var]
    channel = received[:, g.edge_var]
    omega = np.where(
        ext_ones >= b_edge, 1, np.where(ext_zeros >= b_edge, 0, channel)
    ).astype(np.uint8)
    twice = 2 * ones
    decision = np.where(
        twice > degree, 1, np.where(twice < degree, 0, received)
    ).astype(np.uint8)
    return omega, decision


def _padded(
    g: TannerGraph, edge_values: np.ndarray, fill: float
) -> np.ndarray:
    slots = np.where(g.check_slot_mask, g.check_slots, 0)
    out = edge_values[:, slots]
    out[:, ~g.check_slot_mask] = fill
    return out


def _scatter(g: TannerGraph, padded: np.ndarray) -> np.ndarray:
    out = np.empty((padded.shape[0], g.num_edges))
    out[:, g.check_slots[g.check_slot_mask]] = padded[:, g.check_slot_mask]
    return out


def _exclusive(
    values: np.ndarray, ufunc: np.ufunc, identity: float
) -> np.ndarray:
    """ufunc-reduction over every row slot except the slot itself."""
    pad = np.full(values.shape[:-1] + (1,), identity)
    prefix = ufunc.accumulate(values, axis=-1)
    suffix = ufunc.accumulate(values[..., ::-1], axis=-1)[..., ::-1]
    before = np.concatenate([pad, prefix[..., :-1]], axis=-1)
    after = np.concatenate([suffix[..., 1:], pad], axis=-1)
    return ufunc(before, after)


def _bp_check(g: TannerGraph, omega: np.ndarray) -> np.ndarray:
    clipped = np.clip(omega, -BP_MESSAGE_CLIP, BP_MESSAGE_CLIP)
    t = _padded(g, np.tanh(clipped / 2.0), 1.0)
    product = np.clip(
        _exclusive(t, np.multiply, 1.0), -_ATANH_LIMIT, _ATANH_LIMIT
    )
    return _scatter(g, 2.0 * np.arctanh(product))


def _min_sum_check(g: TannerGraph, omega: np.ndarray) -> np.ndarray:
    magnitude = _padded(g, np.abs(omega), np.inf)
    signs = _padded(g, np.where(omega < 0.0, -1.0, 1.0), 1.0)
    smallest = _exclusive(magnitude, np.minimum, np.inf)
    # degree-one checks have no extrinsic input
    smallest = np.where(np.isinf(smallest), BP_MESSAGE_CLIP, smallest)
    sign = _exclusive(signs, np.multiply, 1.0)
    return _scatter(g, sign * smallest)


def _soft_variable(
    g: TannerGraph, varpi: np.ndarray, gamma: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    total = gamma + g.sum_per_var(varpi)
    omega = total[:, g.edge_var] - varpi
    return omega, (total <= 0.0).astype(np.uint8)


def _threshold_table(g: TannerGraph, cfg: IterConfig, k: int) -> np.ndarray:
    cache: Dict[int, int] = {}
    out = np.empty(g.n, dtype=np.int64)
    for i, d in enumerate(g.var_degrees.tolist()):
        if d not in cache:
            cache[d] = cfg.threshold(k, d)
        out[i] = cache[d]
    return out


def _run(
    g: TannerGraph, cfg: IterConfig, inputs: np.ndarray, record: bool
) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
    """Decode a (B, n) batch; returns final decisions, halting iterations
    (-1 when never halted) and, if requested, the decision history."""
    hard = cfg.algorithm.is_hard
    batch = inputs.shape[0]
    decisions = (
        inputs.astype(np.uint8) if hard else (inputs <= 0.0).astype(np.uint8)
    )
    halted_at = np.full(batch, -1, dtype=np.int64)
    history = [decisions[0].copy()] if record else []

    live = np.arange(batch)
    if cfg.halt_on_codeword:
        done = ~g.parity(decisions).any(axis=1)
        halted_at[done] = 0
        live = live[~done]

    initial = inputs[live][:, g.edge_var]
    state = MessageState(
        var_to_check=initial.astype(np.uint8) if hard else initial,
        check_to_var=np.zeros_like(initial, dtype=np.float64),
    )
    source = inputs[live]

    for k in range(1, cfg.max_iterations + 1):
        if live.size == 0:
            break
        if hard:
            state.check_to_var = _gallager_check(g, state.var_to_check)
            state.var_to_check, x = _gallager_variable(
                g, state.check_to_var, source, _threshold_table(g, cfg, k)
            )
        else:
            rule = (
                _bp_check
                if cfg.algorithm is Algorithm.BP
                else _min_sum_check
            )
            state.check_to_var = rule(g, state.var_to_check)
            state.var_to_check, x = _soft_variable(
                g, state.check_to_var, source
            )
        decisions[live] = x
        if record:
            history.append(decisions[0].copy())
        if cfg.halt_on_codeword:
            done = ~g.parity(x).any(axis=1)
            if done.any():
                halted_at[live[done]] = k
                keep = ~done
                live = live[keep]
                source = source[keep]
                state = state.take(keep)
    return decisions, halted_at, history


def _outcomes(g: TannerGraph, decisions: np.ndarray) -> List[Outcome]:
    satisfied = ~g.parity(decisions).any(axis=1)
    nonzero = decisions.any(axis=1)
    out = []
    for ok, nz in zip(satisfied.tolist(), nonzero.tolist()):
        if not ok:
            out.append(Outcome.FAILURE)
        elif nz:
            out.append(Outcome.CONVERGED_OTHER_CODEWORD)
        else:
            out.append(Outcome.CONVERGED_ZERO)
    return out


def _single(
    g: TannerGraph, cfg: IterConfig, inputs: np.ndarray
) -> DecodeTrace:
    decisions, halted_at, history = _run(g, cfg, inputs[None, :], True)
    halted = int(halted_at[0])
    return DecodeTrace(
        algorithm=cfg.algorithm,
        max_iterations=cfg.max_iterations,
        decisions=history,
        halted_at=None if halted < 0 else halted,
        outcome=_outcomes(g, decisions)[0],
    )


def gallager_decode(
    g: TannerGraph, received: BitsLike, cfg: IterConfig
) -> DecodeTrace:
    """Gallager A or B decoding of a hard-decision word."""
    if not cfg.algorithm.is_hard:
        raise DecoderConfigError(
            f"{cfg.algorithm.value} is not a Gallager algorithm"
        )
    return _single(g, cfg, as_bits(received, g.n))


def bp_decode(
    g: TannerGraph, gamma: np.ndarray, cfg: IterConfig
) -> DecodeTrace:
    """Sum-product decoding of LLRs gamma; x_i = 1 iff the belief is <= 0."""
    if cfg.algorithm is not Algorithm.BP:
        raise DecoderConfigError("bp_decode requires the BP algorithm")
    return _single(g, cfg, as_reals(gamma, g.n))


def min_sum_decode(
    g: TannerGraph, gamma: np.ndarray, cfg: IterConfig
) -> DecodeTrace:
    """Min-sum decoding of LLRs gamma."""
    if cfg.algorithm is not Algorithm.MIN_SUM:
        raise DecoderConfigError(
            "min_sum_decode requires the min-sum algorithm"
        )
    return _single(g, cfg, as_reals(gamma, g.n))


def decoder_input(
    ch: ChannelModel, out: ChannelOutput, algorithm: Algorithm
) -> np.ndarray:
    """Bits for Gallager decoders, LLRs for soft decoders."""
    if algorithm.is_hard:
        return hard_decision(out)
    return llr(ch, out)


def decode(
    g: TannerGraph, ch: ChannelModel, out: ChannelOutput, cfg: IterConfig
) -> DecodeTrace:
    """Decode a channel output with the configured algorithm."""
    if out.length != g.n:
        raise InputError(
            f"output length {out.length} does not match code length {g.n}"
        )
    inputs = decoder_input(ch, out, cfg.algorithm)
    if cfg.algorithm.is_hard:
        return gallager_decode(g, inputs, cfg)
    if cfg.algorithm is Algorithm.BP:
        return bp_decode(g, inputs, cfg)
    return min_sum_decode(g, inputs, cfg)


def decode_batch(
    g: TannerGraph, cfg: IterConfig, inputs: np.ndarray
) -> BatchResult:
    """Decode (B, n) bits (Gallager) or LLRs (BP, min-sum) without traces."""
    inputs = np.asarray(inputs)
    if inputs.ndim != 2 or inputs.shape[1] != g.n:
        raise InputError(f"batch must have shape (B, {g.n})")
    if not cfg.algorithm.is_hard:
        inputs = inputs.astype(np.float64)
    decisions, halted_at, _ = _run(g, cfg, inputs, False)
    return BatchResult(
        decisions=decisions,
        halted_at=halted_at,
        outcomes=_outcomes(g, decisions),
    )


def _has_short_period(decisions: List[np.ndarray], window: int) -> bool:
    for period in range(1, window + 1):
        if len(decisions) < 2 * period:
            break
        tail = decisions[-period:]
        before = decisions[-2 * period : -period]
        if all(np.array_equal(x, y) for x, y in zip(tail, before)):
            return True
    return False


def extract_trapping_set(
    trace: DecodeTrace,
    g: TannerGraph,
    window: int = DEFAULT_TRAPPING_WINDOW,
) -> TrappingSetReport:
    """
    Variables decided 1 in any of the final `window` iterations.

    The report is flagged unresolved when the tail of the trace shows no
    repetition with period up to `window`.
    """
    if window < 1:
        raise InputError("window must be at least 1")
    if trace.outcome is not Outcome.FAILURE:
        raise InputError(
            f"trapping set requested for a {trace.outcome.value} trace"
        )
    used = min(window, len(trace.decisions))
    union = np.zeros(g.n, dtype=bool)
    for x in trace.decisions[-used:]:
        union |= x.astype(bool)
    support = tuple(int(i) for i in np.flatnonzero(union))
    a, b = classify_subgraph(g, support)
    return TrappingSetReport(
        support=support,
        a=a,
        b=b,
        window_used=used,
        unresolved=not _has_short_period(trace.decisions, window),
    )


def trace_to_dict(
    trace: DecodeTrace,
    g: TannerGraph,
    window: int = DEFAULT_TRAPPING_WINDOW,
) -> Dict[str, Any]:
    """JSON-ready trace summary with the trapping set of failed attempts."""
    ts = None
    if trace.outcome is Outcome.FAILURE:
        report = extract_trapping_set(trace, g, window)
        ts = {"a": report.a, "b": report.b, "support": list(report.support)}
    return {
        "algorithm": trace.algorithm.value,
        "D": trace.max_iterations,
        "halted_at": trace.halted_at,
        "outcome": trace.outcome.value,
        "final_support": list(trace.final_support),
        "ts": ts,
    }
