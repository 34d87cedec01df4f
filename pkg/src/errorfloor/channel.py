"""BSC and AWGN channel models for all-zero codeword transmission.

BPSK maps bit 0 to +1 and bit 1 to -1, so the noiseless AWGN output is the
all-ones vector. Random numbers come from numpy's PCG64 generator.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from errorfloor.errors import ChannelMismatchError, InputError
from errorfloor.types import BinaryVector, as_reals


class ChannelKind(str, Enum):
    """Supported channels."""

    BSC = "bsc"
    AWGN = "awgn"


@dataclass(frozen=True)
class ChannelModel:
    """Channel kind with its single parameter."""

    kind: ChannelKind
    epsilon: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind is ChannelKind.BSC:
            if self.sigma is not None or self.epsilon is None:
                raise InputError("BSC takes epsilon only")
            if not 0.0 < self.epsilon < 0.5:
                raise InputError(
                    f"epsilon must lie in (0, 1/2), got {self.epsilon}"
                )
        else:
            if self.epsilon is not None or self.sigma is None:
                raise InputError("AWGN channel takes sigma only")
            if not self.sigma > 0.0:
                raise InputError(f"sigma must be positive, got {self.sigma}")

    @classmethod
    def bsc(cls, epsilon: float) -> "ChannelModel":
        """Binary symmetric channel with crossover probability epsilon."""
        return cls(kind=ChannelKind.BSC, epsilon=float(epsilon))

    @classmethod
    def awgn(cls, sigma: float) -> "ChannelModel":
        """AWGN channel with noise standard deviation sigma."""
        return cls(kind=ChannelKind.AWGN, sigma=float(sigma))

    @classmethod
    def awgn_from_ebno_db(cls, ebno_db: float, rate: float) -> "ChannelModel":
        """AWGN channel at a given Eb/N0 for a code of the given rate."""
        return cls.awgn(sigma_from_ebno_db(ebno_db, rate))

    @property
    def parameter(self) -> float:
        """epsilon for the BSC, sigma for the AWGN channel."""
        return float(
            self.epsilon if self.kind is ChannelKind.BSC else self.sigma
        )

    @property
    def bsc_llr_magnitude(self) -> float:
        """ln((1 - epsilon) / epsilon)."""
        if self.kind is not ChannelKind.BSC:
            raise ChannelMismatchError("LLR magnitude is defined for the BSC")
        return math.log((1.0 - self.epsilon) / self.epsilon)


@dataclass(frozen=True)
class ChannelOutput:
    """Received word: flipped bits (BSC) or BPSK observations (AWGN)."""

    kind: ChannelKind
    bits: Optional[BinaryVector] = None
    values: Optional[np.ndarray] = None

    @classmethod
    def from_bits(
        cls, bits: Union[BinaryVector, Sequence[int]]
    ) -> "ChannelOutput":
        """BSC output."""
        vector = (
            bits
            if isinstance(bits, BinaryVector)
            else BinaryVector.from_array(bits)
        )
        return cls(kind=ChannelKind.BSC, bits=vector)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "ChannelOutput":
        """AWGN output."""
        arr = np.asarray(values, dtype=np.float64)
        return cls(kind=ChannelKind.AWGN, values=as_reals(arr, arr.shape[0]))

    @classmethod
    def from_noise(cls, noise: Sequence[float]) -> "ChannelOutput":
        """AWGN output 1 - noise; positive noise pushes toward bit 1."""
        return cls.from_values(1.0 - np.asarray(noise, dtype=np.float64))

    @property
    def length(self) -> int:
        """Block length."""
        if self.kind is ChannelKind.BSC:
            return self.bits.length
        return int(self.values.shape[0])


def _check_kind(ch: ChannelModel, out: ChannelOutput) -> None:
    if ch.kind is not out.kind:
        raise ChannelMismatchError(
            f"{out.kind.value} output given to a {ch.kind.value} channel"
        )


def llr(ch: ChannelModel, out: ChannelOutput) -> np.ndarray:
    """Per-bit negative log-likelihood ratios gamma."""
    _check_kind(ch, out)
    if ch.kind is ChannelKind.BSC:
        magnitude = ch.bsc_llr_magnitude
        return np.where(out.bits.to_array() == 1, -magnitude, magnitude)
    return 2.0 * out.values / ch.sigma**2


def llr_batch(ch: ChannelModel, outputs: np.ndarray) -> np.ndarray:
    """LLRs of a (B, n) array of flips (BSC) or observations (AWGN)."""
    if ch.kind is ChannelKind.BSC:
        magnitude = ch.bsc_llr_magnitude
        return np.where(outputs != 0, -magnitude, magnitude)
    return 2.0 * np.asarray(outputs, dtype=np.float64) / ch.sigma**2


def hard_decision(out: ChannelOutput) -> np.ndarray:
    """Bits implied by the output; AWGN observations <= 0 decide 1."""
    if out.kind is ChannelKind.BSC:
        return out.bits.to_array()
    return (out.values <= 0.0).astype(np.uint8)


def sample_zero_codeword(
    ch: ChannelModel, n: int, rng: np.random.Generator
) -> ChannelOutput:
    """Channel output for the transmitted all-zero codeword."""
    if n < 1:
        raise InputError("block length must be at least 1")
    if ch.kind is ChannelKind.BSC:
        return ChannelOutput.from_bits(rng.random(n) < ch.epsilon)
    return ChannelOutput.from_values(1.0 + rng.normal(0.0, ch.sigma, n))


def sample_zero_codeword_batch(
    ch: ChannelModel, n: int, batch: int, rng: np.random.Generator
) -> np.ndarray:
    """(batch, n) flips (uint8, BSC) or observations (float, AWGN)."""
    if ch.kind is ChannelKind.BSC:
        return (rng.random((batch, n)) < ch.epsilon).astype(np.uint8)
    return 1.0 + rng.normal(0.0, ch.sigma, (batch, n))


def log_probability(ch: ChannelModel, out: ChannelOutput) -> float:
    """Log-probability of the output given the zero codeword.

    The AWGN value drops the additive normalization constant, so only
    differences between outputs are meaningful.
    """
    _check_kind(ch, out)
    if ch.kind is ChannelKind.BSC:
        flips = out.bits.weight
        return flips * math.log(ch.epsilon) + (out.length - flips) * math.log(
            1.0 - ch.epsilon
        )
    deviation = out.values - 1.0
    return float(-np.dot(deviation, deviation) / (2.0 * ch.sigma**2))


def ebno_db(sigma: float, rate: float) -> float:
    """Eb/N0 in dB for BPSK with unit symbol energy: 1 / (2 r sigma^2)."""
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma**2))


def sigma_from_ebno_db(ebno: float, rate: float) -> float:
    """Inverse of ebno_db."""
    if rate <= 0.0:
        raise InputError("code rate must be positive")
    linear = 10.0 ** (ebno / 10.0)
    return math.sqrt(1.0 / (2.0 * rate * linear))


def derive_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 generator for worker, trial or batch `index`."""
    return np.random.default_rng(base_seed + index)
