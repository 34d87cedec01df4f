"""Tests for the common decoder interface."""

import numpy as np
import pytest

from errorfloor.channel import ChannelModel, ChannelOutput
from errorfloor.code_model import TannerGraph, build_tanner_155
from errorfloor.decoder_base import (BaseDecoder, IterativeDecoder,
                                     SupportOracleDecoder)
from errorfloor.errors import ChannelMismatchError, InputError
from errorfloor.iter_decode import Algorithm, IterConfig


class TestBaseDecoder:
    """Test cases for the abstract decoder."""

    def test_fails_is_abstract(self):
        """Test the base class has no decoding rule."""
        decoder = BaseDecoder(TannerGraph(3, 1, [[0, 1, 2]]))
        with pytest.raises(NotImplementedError):
            decoder.fails(
                ChannelModel.bsc(0.1), ChannelOutput.from_bits([0, 0, 0])
            )
        with pytest.raises(ChannelMismatchError):
            decoder.fails_bits([0, 0, 0])


class TestIterativeDecoder:
    """Test cases for the iterative decoder adapter."""

    def setup_method(self):
        """Set up test fixtures."""
        self.g = build_tanner_155()

    def test_describe(self):
        """Test the identifier includes the iteration count."""
        decoder = IterativeDecoder(self.g, IterConfig(Algorithm.BP, 4))
        assert decoder.describe() == "bp/D=4"

    def test_hard_decoder_accepts_bits_without_channel(self):
        """Test Gallager decoders do not need epsilon."""
        decoder = IterativeDecoder(
            self.g, IterConfig(Algorithm.GALLAGER_A, 10)
        )
        assert not decoder.fails_bits(np.zeros(155))

    def test_soft_decoder_needs_channel(self):
        """Test BSC words for BP need a crossover probability."""
        decoder = IterativeDecoder(self.g, IterConfig(Algorithm.BP, 10))
        with pytest.raises(ChannelMismatchError):
            decoder.fails_bits(np.zeros(155))
        assert not decoder.fails_bits(np.zeros(155), ChannelModel.bsc(0.01))

    def test_batch_matches_single(self):
        """Test fails_batch against one decode per frame."""
        ch = ChannelModel.awgn(0.9)
        rng = np.random.default_rng(12)
        outputs = 1.0 + rng.normal(0.0, 0.9, (8, 155))
        for algorithm in (Algorithm.MIN_SUM, Algorithm.GALLAGER_B):
            decoder = IterativeDecoder(self.g, IterConfig(algorithm, 10))
            batch = decoder.fails_batch(ch, outputs)
            single = [
                decoder.fails(ch, ChannelOutput.from_values(row))
                for row in outputs
            ]
            assert batch.tolist() == single


class TestSupportOracleDecoder:
    """Test cases for the synthetic superset decoder."""

    def setup_method(self):
        """Set up test fixtures."""
        self.g = TannerGraph(7, 3, [[0, 1, 2, 4], [0, 1, 3, 5], [0, 2, 3, 6]])
        self.oracle = SupportOracleDecoder(self.g, [1, 3, 5])

    def test_fails_on_supersets_only(self):
        """Test failure exactly when the support is covered."""
        assert self.oracle.fails_bits([0, 1, 0, 1, 0, 1, 0])
        assert self.oracle.fails_bits([1, 1, 1, 1, 1, 1, 1])
        assert not self.oracle.fails_bits([0, 1, 0, 1, 0, 0, 0])

    def test_batch_and_awgn(self):
        """Test the vectorized mask for both channels."""
        flips = np.array([[0, 1, 0, 1, 0, 1, 0], [1, 0, 0, 0, 0, 0, 0]])
        mask = self.oracle.fails_batch(ChannelModel.bsc(0.1), flips)
        assert mask.tolist() == [True, False]
        values = np.where(flips == 1, -0.5, 1.0)
        mask = self.oracle.fails_batch(ChannelModel.awgn(1.0), values)
        assert mask.tolist() == [True, False]
        assert self.oracle.fails(
            ChannelModel.awgn(1.0), ChannelOutput.from_values(values[0])
        )

    def test_validation(self):
        """Test empty and out-of-range supports."""
        with pytest.raises(InputError):
            SupportOracleDecoder(self.g, [])
        with pytest.raises(InputError):
            SupportOracleDecoder(self.g, [7])
        assert self.oracle.describe() == "oracle[1, 3, 5]"
