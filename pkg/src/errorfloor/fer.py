"""Frame error rates: Monte-Carlo measurement and instanton predictions."""

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

from errorfloor.channel import (ChannelModel, derive_rng,
                                sample_zero_codeword_batch,
                                sigma_from_ebno_db)
from errorfloor.constants import (DEFAULT_BATCH_SIZE, DEFAULT_MAX_FRAMES,
                                  DEFAULT_MIN_ERRORS, FER_CSV_HEADER,
                                  PREDICTION_CSV_HEADER, SPECTRUM_CSV_HEADER,
                                  WILSON_Z_95)
from errorfloor.decoder_base import BaseDecoder
from errorfloor.errors import EmptySpectrumError, InputError
from errorfloor.instanton_search import InstantonSet
from errorfloor.logging_config import get_logger, timer
from errorfloor.workers import run_ordered

logger = get_logger(__name__)


def wilson_interval(
    errors: int, frames: int, z: float = WILSON_Z_95
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if frames == 0:
        return 0.0, 1.0
    p = errors / frames
    denom = 1.0 + z * z / frames
    centre = (p + z * z / (2 * frames)) / denom
    half = z * math.sqrt(p * (1 - p) / frames + z * z / (4 * frames**2))
    half /= denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class FerPoint:
    """Measured frame error rate at one channel parameter."""

    param: float
    frames: int
    errors: int

    def __post_init__(self) -> None:
        if self.frames < 0 or not 0 <= self.errors <= self.frames:
            raise InputError("need 0 <= errors <= frames")

    @property
    def fer(self) -> float:
        """errors / frames."""
        return self.errors / self.frames if self.frames else 0.0

    @property
    def ci95(self) -> Tuple[float, float]:
        """Wilson 95% interval."""
        return wilson_interval(self.errors, self.frames)


@dataclass(frozen=True)
class StopRule:
    """When a Monte-Carlo point is complete."""

    min_errors: int = DEFAULT_MIN_ERRORS
    max_frames: int = DEFAULT_MAX_FRAMES
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self) -> None:
        if self.min_errors < 1:
            raise InputError("min_errors must be at least 1")
        if self.max_frames < 1 or self.batch_size < 1:
            raise InputError("max_frames and batch_size must be positive")


def _simulate_batch(
    decoder: BaseDecoder,
    ch: ChannelModel,
    seed: int,
    batch: int,
    size: int,
) -> np.ndarray:
    rng = derive_rng(seed, batch)
    outputs = sample_zero_codeword_batch(ch, decoder.graph.n, size, rng)
    return decoder.fails_batch(ch, outputs)


def mc_fer(
    decoder: BaseDecoder,
    ch: ChannelModel,
    stop: StopRule,
    seed: int,
    workers: int = 1,
) -> FerPoint:
    """
    Monte-Carlo FER of the all-zero codeword.

    Frames are drawn in batches, batch b from generator seed + b. Batches
    are merged in order and the count stops at the frame that brings the
    errors to min_errors, so the point does not depend on the worker
    count.
    """
    workers = max(1, workers)
    frames = errors = 0
    batch = 0
    with timer(logger, f"MC point at {ch.parameter:g}"):
        while frames < stop.max_frames and errors < stop.min_errors:
            jobs = []
            planned = frames
            for b in range(batch, batch + workers):
                size = min(stop.batch_size, stop.max_frames - planned)
                if size <= 0:
                    break
                jobs.append((decoder, ch, seed, b, size))
                planned += size
            batch += len(jobs)
            for failed in run_ordered(_simulate_batch, jobs, workers):
                hits = np.flatnonzero(failed)
                needed = stop.min_errors - errors
                if hits.size >= needed:
                    frames += int(hits[needed - 1]) + 1
                    errors += needed
                    break
                frames += failed.shape[0]
                errors += int(hits.size)
            logger.info(
                f"{ch.kind.value} {ch.parameter:g}: {errors} errors in "
                f"{frames} frames"
            )
    return FerPoint(param=ch.parameter, frames=frames, errors=errors)


@dataclass(frozen=True)
class SpectrumEntry:
    """Instantons of one weight."""

    weight: float
    multiplicity: int


@dataclass
class InstantonSpectrum:
    """Instanton weights with their multiplicities."""

    entries: List[SpectrumEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        merged: Counter = Counter()
        for entry in self.entries:
            if entry.weight <= 0 or entry.multiplicity < 1:
                raise InputError(
                    "spectrum weights must be positive and multiplicities "
                    "at least 1"
                )
            merged[entry.weight] += entry.multiplicity
        self.entries = [SpectrumEntry(w, merged[w]) for w in sorted(merged)]

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[Tuple[float, int]]
    ) -> "InstantonSpectrum":
        """Build from (weight, multiplicity) pairs; repeated weights add."""
        return cls([SpectrumEntry(float(w), int(m)) for w, m in pairs])

    @property
    def minimum_weight(self) -> float:
        """Smallest weight."""
        self._require()
        return self.entries[0].weight

    def _require(self) -> None:
        if not self.entries:
            raise EmptySpectrumError("instanton spectrum is empty")


def spectrum_from_weights(weights: Iterable[float]) -> InstantonSpectrum:
    """Spectrum counting each weight occurrence once."""
    return InstantonSpectrum.from_pairs(Counter(weights).items())


def spectrum_from_instantons(found: InstantonSet) -> InstantonSpectrum:
    """Unique instantons per histogram bin of a search result."""
    return InstantonSpectrum.from_pairs(
        (w, u) for w, _, u in found.histogram() if u
    )


def predict_fer_bsc(
    spectrum: InstantonSpectrum, n: int, epsilons: Sequence[float]
) -> List[Tuple[float, float]]:
    """FER(eps) = sum N eps^w (1 - eps)^(n - w)."""
    spectrum._require()
    curve = []
    for eps in epsilons:
        if not 0.0 < eps < 0.5:
            raise InputError(f"epsilon must lie in (0, 1/2), got {eps}")
        total = sum(
            math.exp(
                math.log(e.multiplicity)
                + e.weight * math.log(eps)
                + (n - e.weight) * math.log1p(-eps)
            )
            for e in spectrum.entries
        )
        curve.append((float(eps), total))
    return curve


def gaussian_tail(x: float) -> float:
    """Q(x) = P(N(0, 1) > x)."""
    return float(0.5 * erfc(x / math.sqrt(2.0)))


def predict_fer_awgn(
    spectrum: InstantonSpectrum, sigmas: Sequence[float]
) -> List[Tuple[float, float]]:
    """FER(sigma) = sum N Q(sqrt(w) / sigma), curvature factors omitted."""
    spectrum._require()
    curve = []
    for sigma in sigmas:
        if sigma <= 0:
            raise InputError(f"sigma must be positive, got {sigma}")
        total = sum(
            e.multiplicity * gaussian_tail(math.sqrt(e.weight) / sigma)
            for e in spectrum.entries
        )
        curve.append((float(sigma), total))
    return curve


def predict_fer_awgn_ebno(
    spectrum: InstantonSpectrum, rate: float, ebno_db: Sequence[float]
) -> List[Tuple[float, float]]:
    """predict_fer_awgn indexed by Eb/N0 in dB for a code of given rate."""
    sigmas = [sigma_from_ebno_db(e, rate) for e in ebno_db]
    return [
        (float(e), fer)
        for e, (_, fer) in zip(ebno_db, predict_fer_awgn(spectrum, sigmas))
    ]


def fit_loglog_slope(points: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of log FER against log parameter."""
    usable = [(x, y) for x, y in points if x > 0 and y > 0]
    if len(usable) < 2:
        raise InputError("need two points with positive FER for a slope")
    x, y = np.log(np.array(usable)).T
    return float(np.polyfit(x, y, 1)[0])


# coverage of multi-start searches


def harmonic(n: int) -> float:
    """H_n = 1 + 1/2 + ... + 1/n."""
    return float(np.sum(1.0 / np.arange(1, n + 1))) if n > 0 else 0.0


def trials_needed(total: float) -> float:
    """Expected draws to see all of `total` equally likely items."""
    n = math.ceil(total)
    return n * harmonic(n)


def _expected_unique(total: float, trials: int) -> float:
    return total * (1.0 - math.exp(-trials / total))


def _solve_total(unique: int, trials: int) -> float:
    if unique >= trials:
        return float(unique)
    if unique <= 1:
        return 1.0
    lo = float(unique)
    hi = 2.0 * unique
    while _expected_unique(hi, trials) < unique:
        hi *= 2.0
    return float(
        brentq(lambda t: _expected_unique(t, trials) - unique, lo, hi)
    )


@dataclass(frozen=True)
class CoverageEstimate:
    """Saturation estimate of the number of distinct instantons."""

    estimated_total: float
    trials_needed: float
    running: Tuple[float, ...]


def coverage_estimate(
    unique_counts_per_trial: Sequence[int],
) -> CoverageEstimate:
    """
    Fit N (1 - exp(-t / N)) to the cumulative unique counts.

    Each prefix of the curve gives an estimate; the reported value is
    their running maximum, so appending trials never lowers it.
    """
    counts = [int(c) for c in unique_counts_per_trial]
    if not counts:
        raise InputError("coverage needs at least one trial")
    previous = 0
    for c in counts:
        if c < max(previous, 1) or c > previous + 1:
            raise InputError(
                "unique counts must start at 1 and grow by at most 1"
            )
        previous = c
    running = []
    best = 1.0
    for t, c in enumerate(counts, start=1):
        best = max(best, _solve_total(c, t))
        running.append(best)
    return CoverageEstimate(
        estimated_total=best,
        trials_needed=trials_needed(best),
        running=tuple(running),
    )


def unique_count_curve(keys: Iterable[object]) -> List[int]:
    """Cumulative number of distinct keys after each trial."""
    seen = set()
    curve = []
    for key in keys:
        seen.add(key)
        curve.append(len(seen))
    return curve


def simulate_coupon_collector(
    items: int, rng: np.random.Generator, repetitions: int = 1
) -> List[int]:
    """Draws needed to see every one of `items` labels, per repetition."""
    if items < 1:
        raise InputError("need at least one item")
    results = []
    for _ in range(repetitions):
        seen = np.zeros(items, dtype=bool)
        remaining = items
        draws = 0
        while remaining:
            chunk = rng.integers(0, items, size=max(items, 64))
            for label in chunk:
                draws += 1
                if not seen[label]:
                    seen[label] = True
                    remaining -= 1
                    if not remaining:
                        break
        results.append(draws)
    return results


# CSV files


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _num(x: float) -> str:
    return format(x, ".10g")


def fer_csv(points: Sequence[FerPoint]) -> str:
    """param,frames,errors,fer,ci_lo,ci_hi rows."""
    return _csv_text(
        FER_CSV_HEADER,
        (
            (
                _num(p.param),
                p.frames,
                p.errors,
                _num(p.fer),
                _num(p.ci95[0]),
                _num(p.ci95[1]),
            )
            for p in points
        ),
    )


def prediction_csv(curve: Sequence[Tuple[float, float]]) -> str:
    """param,fer_predicted rows."""
    return _csv_text(
        PREDICTION_CSV_HEADER, ((_num(x), _num(y)) for x, y in curve)
    )


def spectrum_csv(spectrum: InstantonSpectrum) -> str:
    """weight,multiplicity rows."""
    return _csv_text(
        SPECTRUM_CSV_HEADER,
        ((_num(e.weight), e.multiplicity) for e in spectrum.entries),
    )


def save_spectrum(spectrum: InstantonSpectrum, path: Path) -> None:
    """Write spectrum_csv() to a file."""
    Path(path).write_text(spectrum_csv(spectrum), encoding="utf-8")


def load_spectrum(path: Path) -> InstantonSpectrum:
    """Read a weight,multiplicity CSV file."""
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != SPECTRUM_CSV_HEADER:
        raise InputError(
            f"{path}: expected header {','.join(SPECTRUM_CSV_HEADER)}"
        )
    pairs = []
    for number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            pairs.append((float(row[0]), int(row[1])))
        except (ValueError, IndexError):
            raise InputError(f"{path}:{number}: bad spectrum row {row}")
    spectrum = InstantonSpectrum.from_pairs(pairs)
    spectrum._require()
    return spectrum


def parse_sweep(text: str) -> List[float]:
    """Values lo, lo + step, ... up to hi (inclusive) from 'lo:hi:step'."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise InputError(f"sweep must be 'lo:hi:step' or a value: {text!r}")
    if step <= 0 or hi < lo:
        raise InputError(f"sweep needs step > 0 and hi >= lo: {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def stop_rule_from(
    min_errors: Optional[int], max_frames: Optional[int], batch_size: int
) -> StopRule:
    """StopRule with defaults filled in."""
    return StopRule(
        min_errors=min_errors or DEFAULT_MIN_ERRORS,
        max_frames=max_frames or DEFAULT_MAX_FRAMES,
        batch_size=batch_size,
    )
