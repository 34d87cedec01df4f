"""Tests for channel models, LLRs and sampling."""

import math

import numpy as np
import pytest

from errorfloor.channel import (ChannelKind, ChannelModel, ChannelOutput,
                                derive_rng, ebno_db, hard_decision, llr,
                                llr_batch, log_probability,
                                sample_zero_codeword,
                                sample_zero_codeword_batch,
                                sigma_from_ebno_db)
from errorfloor.errors import ChannelMismatchError, InputError


class TestChannelModel:
    """Test cases for channel parameters."""

    def test_parameter_ranges(self):
        """Test rejected channel parameters."""
        with pytest.raises(InputError):
            ChannelModel.bsc(0.5)
        with pytest.raises(InputError):
            ChannelModel.bsc(0.0)
        with pytest.raises(InputError):
            ChannelModel.awgn(0.0)
        with pytest.raises(InputError):
            ChannelModel(kind=ChannelKind.BSC, epsilon=0.1, sigma=1.0)

    def test_ebno_conversion(self):
        """Test Eb/N0 and sigma are inverse."""
        sigma = sigma_from_ebno_db(4.0, 0.5)
        assert ebno_db(sigma, 0.5) == pytest.approx(4.0)
        assert sigma_from_ebno_db(0.0, 0.5) == pytest.approx(1.0)
        ch = ChannelModel.awgn_from_ebno_db(4.0, 0.5)
        assert ch.parameter == pytest.approx(sigma)


class TestLlr:
    """Test cases for log-likelihood ratios."""

    def test_bsc_llr(self):
        """Test the BSC magnitude and sign."""
        ch = ChannelModel.bsc(0.1)
        gamma = llr(ch, ChannelOutput.from_bits([0, 1]))
        assert gamma[0] == pytest.approx(math.log(9))
        assert gamma[1] == pytest.approx(-gamma[0])

    def test_awgn_llr(self):
        """Test 2y/sigma^2."""
        ch = ChannelModel.awgn(1.0)
        assert llr(ch, ChannelOutput.from_values([1.5]))[0] == 3.0

    def test_batch_matches_single(self):
        """Test the batched LLR agrees with the single-word form."""
        ch = ChannelModel.bsc(0.2)
        flips = np.array([[0, 1, 1], [1, 0, 0]], dtype=np.uint8)
        batch = llr_batch(ch, flips)
        for row, bits in zip(batch, flips):
            assert np.allclose(row, llr(ch, ChannelOutput.from_bits(bits)))

    def test_kind_mismatch(self):
        """Test an AWGN output given to a BSC model."""
        with pytest.raises(ChannelMismatchError):
            llr(ChannelModel.bsc(0.1), ChannelOutput.from_values([1.0]))

    def test_noise_convention(self):
        """Test that positive noise moves the observation toward 1."""
        out = ChannelOutput.from_noise([0.25, 1.5])
        assert np.allclose(out.values, [0.75, -0.5])
        assert hard_decision(out).tolist() == [0, 1]


class TestSampling:
    """Test cases for zero-codeword sampling."""

    def test_fixed_seed_is_deterministic(self):
        """Test identical output for identical seeds."""
        ch = ChannelModel.awgn(0.8)
        a = sample_zero_codeword(ch, 20, derive_rng(7, 3))
        b = sample_zero_codeword(ch, 20, derive_rng(7, 3))
        assert np.array_equal(a.values, b.values)

    def test_bsc_flip_statistics(self):
        """Test mean flips within three binomial deviations."""
        ch = ChannelModel.bsc(0.05)
        n, samples = 20, 100_000
        flips = sample_zero_codeword_batch(
            ch, n, samples, np.random.default_rng(1)
        )
        mean = flips.sum(axis=1).mean()
        std = math.sqrt(n * 0.05 * 0.95 / samples)
        assert abs(mean - n * 0.05) < 3 * std

    def test_awgn_moments(self):
        """Test the observation mean and spread."""
        ch = ChannelModel.awgn(0.5)
        values = sample_zero_codeword_batch(
            ch, 10, 20_000, np.random.default_rng(2)
        )
        assert values.mean() == pytest.approx(1.0, abs=0.01)
        assert values.std() == pytest.approx(0.5, abs=0.01)

    def test_rejects_empty_block(self):
        """Test n must be positive."""
        with pytest.raises(InputError):
            sample_zero_codeword(ChannelModel.bsc(0.1), 0, derive_rng(0, 0))


class TestLogProbability:
    """Test cases for output log-probabilities."""

    def test_bsc(self):
        """Test zero flips and two flips."""
        ch = ChannelModel.bsc(0.1)
        zero = ChannelOutput.from_bits([0] * 10)
        assert log_probability(ch, zero) == pytest.approx(10 * math.log(0.9))
        two = ChannelOutput.from_bits([1, 1] + [0] * 8)
        assert log_probability(ch, two) == pytest.approx(
            2 * math.log(0.1) + 8 * math.log(0.9)
        )

    def test_awgn_noise_free(self):
        """Test the all-ones observation has zero log-probability."""
        ch = ChannelModel.awgn(1.0)
        assert log_probability(ch, ChannelOutput.from_values([1.0] * 5)) == 0
