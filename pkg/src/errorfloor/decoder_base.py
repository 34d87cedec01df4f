"""Common decoder interface: does a received word decode to zero?"""

from typing import Iterable, Optional

import numpy as np

from errorfloor.channel import (ChannelKind, ChannelModel, ChannelOutput,
                                llr_batch)
from errorfloor.code_model import TannerGraph
from errorfloor.errors import ChannelMismatchError, InputError
from errorfloor.iter_decode import IterConfig, decode, decode_batch
from errorfloor.logging_config import get_logger
from errorfloor.types import BitsLike, as_bits


class BaseDecoder:
    """Base class for decoders judged on the transmitted all-zero codeword."""

    name = "decoder"

    def __init__(self, graph: TannerGraph):
        """Initialize decoder for a code."""
        self.graph = graph
        self.logger = get_logger(self.__class__.__name__)

    def fails(self, ch: ChannelModel, out: ChannelOutput) -> bool:
        """True when decoding out does not return the zero codeword."""
        raise NotImplementedError

    def fails_batch(self, ch: ChannelModel, outputs: np.ndarray) -> np.ndarray:
        """
        Failure mask of a (B, n) batch.

        Args:
            ch: Channel the batch was drawn from
            outputs: Flip indicators (BSC) or observations (AWGN)

        Returns:
            Boolean array of length B
        """
        wrap = (
            ChannelOutput.from_bits
            if ch.kind is ChannelKind.BSC
            else ChannelOutput.from_values
        )
        return np.array([self.fails(ch, wrap(row)) for row in outputs])

    def fails_bits(
        self, bits: BitsLike, ch: Optional[ChannelModel] = None
    ) -> bool:
        """Failure on a BSC word given as flip indicators or a support."""
        if ch is None:
            raise ChannelMismatchError(f"{self.name} needs a BSC channel")
        out = ChannelOutput.from_bits(as_bits(bits, self.graph.n))
        return self.fails(ch, out)

    def fails_noise(self, ch: ChannelModel, noise: np.ndarray) -> bool:
        """Failure on AWGN observations 1 - noise."""
        return self.fails(ch, ChannelOutput.from_noise(noise))

    def describe(self) -> str:
        """Identifier recorded in instanton records and manifests."""
        return self.name


class IterativeDecoder(BaseDecoder):
    """Gallager, BP or min-sum decoding through iter_decode."""

    def __init__(self, graph: TannerGraph, cfg: IterConfig):
        super().__init__(graph)
        self.cfg = cfg
        self.name = cfg.algorithm.value

    def fails(self, ch: ChannelModel, out: ChannelOutput) -> bool:
        return decode(self.graph, ch, out, self.cfg).failed

    def fails_batch(self, ch: ChannelModel, outputs: np.ndarray) -> np.ndarray:
        outputs = np.asarray(outputs)
        if self.cfg.algorithm.is_hard:
            if ch.kind is ChannelKind.BSC:
                inputs = (outputs != 0).astype(np.uint8)
            else:
                inputs = (outputs <= 0.0).astype(np.uint8)
        else:
            inputs = llr_batch(ch, outputs)
        return decode_batch(self.graph, self.cfg, inputs).failed

    def fails_bits(
        self, bits: BitsLike, ch: Optional[ChannelModel] = None
    ) -> bool:
        if ch is None:
            if not self.cfg.algorithm.is_hard:
                raise ChannelMismatchError(
                    f"{self.name} decoding of BSC words needs epsilon"
                )
            # Gallager decoders ignore epsilon
            ch = ChannelModel.bsc(0.25)
        return super().fails_bits(bits, ch)

    def describe(self) -> str:
        return f"{self.name}/D={self.cfg.max_iterations}"


class SupportOracleDecoder(BaseDecoder):
    """Synthetic decoder failing when the hard decision covers a support.

    Its failure probability on the BSC is known in closed form, which makes
    it a ground truth for the Monte-Carlo pipeline.
    """

    name = "oracle"

    def __init__(self, graph: TannerGraph, support: Iterable[int]):
        super().__init__(graph)
        self.support = np.array(sorted(set(int(i) for i in support)))
        if self.support.size == 0:
            raise InputError("oracle support must be nonempty")
        if self.support.min() < 0 or self.support.max() >= graph.n:
            raise InputError("oracle support outside the code")

    def fails(self, ch: ChannelModel, out: ChannelOutput) -> bool:
        if out.kind is ChannelKind.BSC:
            bits = out.bits.to_array()
        else:
            bits = (out.values <= 0.0).astype(np.uint8)
        return bool(bits[self.support].all())

    def fails_batch(self, ch: ChannelModel, outputs: np.ndarray) -> np.ndarray:
        outputs = np.asarray(outputs)
        if ch.kind is ChannelKind.BSC:
            bits = outputs != 0
        else:
            bits = outputs <= 0.0
        return bits[:, self.support].all(axis=1)

    def fails_bits(
        self, bits: BitsLike, ch: Optional[ChannelModel] = None
    ) -> bool:
        return bool(as_bits(bits, self.graph.n)[self.support].all())

    def describe(self) -> str:
        return f"oracle{list(self.support.tolist())}"
