"""Tests for the instanton searches."""

import itertools
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from errorfloor.channel import ChannelKind, ChannelModel, ChannelOutput
from errorfloor.code_model import (TannerGraph, build_tanner_155,
                                   census_trapping_subgraphs)
from errorfloor.constants import DELTA
from errorfloor.decoder_base import IterativeDecoder, SupportOracleDecoder
from errorfloor.errors import (InputError, RetryCapError,
                               SurfaceNotFoundError, ZeroPseudoCodewordError)
from errorfloor.instanton_search import (AmoebaConfig, InstantonRecord,
                                         InstantonSet, SearchSpec,
                                         amoeba_iterative,
                                         awgn_instanton_from_pcw,
                                         critical_number_search,
                                         critical_numbers_for_census,
                                         dominant_support, isa_bsc_lp,
                                         pcs_awgn_lp, pcs_from_noise,
                                         pcs_from_pseudo_codeword,
                                         run_trials, scale_to_error_surface,
                                         surface_certificate,
                                         verify_instanton)
from errorfloor.iter_decode import (Algorithm, IterConfig, Outcome, decode,
                                    extract_trapping_set)
from errorfloor.lp_decode import LpDecoder, PseudoCodeword, w_awgn, w_bsc
from errorfloor.types import BinaryVector, SubgraphClass

HAMMING_CHECKS = [[0, 1, 2, 4], [0, 1, 3, 5], [0, 2, 3, 6]]


def _bsc_record(support, n=7, **kwargs):
    return InstantonRecord(
        channel=ChannelKind.BSC,
        decoder="lp/simplex",
        method="isa",
        length=n,
        weight=len(support),
        support=tuple(support),
        **kwargs,
    )


def _trapped_inside(decoder, ts, subset):
    """Decode the flips of subset and report failure trapped inside ts."""
    g = decoder.graph
    word = BinaryVector.from_support(g.n, subset)
    trace = decode(
        g, ChannelModel.bsc(0.25), ChannelOutput.from_bits(word), decoder.cfg
    )
    if not trace.failed:
        return False
    if trace.outcome is Outcome.FAILURE:
        trapped = extract_trapping_set(trace, g).support
    else:
        trapped = trace.final_support
    return set(trapped) <= set(ts)


class TestAwgnProjection:
    """Test cases for the instanton of a pseudo-codeword."""

    def test_fractional_example(self):
        """Test the projection of (1, 0.5)."""
        noise = awgn_instanton_from_pcw(np.array([1.0, 0.5]))
        assert np.allclose(noise, [1.2, 0.6])
        assert float(noise @ noise) == pytest.approx(w_awgn([1.0, 0.5]))

    def test_codeword_indicator(self):
        """Test a codeword is its own instanton."""
        noise = awgn_instanton_from_pcw(PseudoCodeword(np.array([1, 1, 0])))
        assert np.allclose(noise, [1.0, 1.0, 0.0])

    def test_on_the_plane(self):
        """Test the received word has zero cost against p."""
        p = np.array([0.2, 0.9, 0.4, 0.0])
        noise = awgn_instanton_from_pcw(p)
        assert float(p @ (1.0 - noise)) == pytest.approx(0.0, abs=1e-12)

    def test_zero(self):
        """Test the zero pseudo-codeword has no instanton."""
        with pytest.raises(ZeroPseudoCodewordError):
            awgn_instanton_from_pcw(np.zeros(3))


class TestErrorSurface:
    """Test cases for scale_to_error_surface on a single check."""

    def setup_method(self):
        """Set up test fixtures."""
        self.spc = TannerGraph(3, 1, [[0, 1, 2]])
        self.ch = ChannelModel.awgn(1.0)
        self.e0 = np.array([1.0, 0.0, 0.0])

    def test_bp_threshold(self):
        """Test the analytic BP threshold along one bit."""
        decoder = IterativeDecoder(self.spc, IterConfig(Algorithm.BP, 5))
        s = scale_to_error_surface(decoder, self.ch, self.e0)
        expected = 1.0 + math.atanh(math.tanh(1.0) ** 2)
        assert s == pytest.approx(expected, rel=1e-5)
        assert decoder.fails_noise(self.ch, s * (1 + 1e-6) * self.e0)
        assert not decoder.fails_noise(self.ch, s * (1 - 1e-6) * self.e0)

    def test_min_sum_threshold(self):
        """Test the min-sum threshold along one bit."""
        decoder = IterativeDecoder(self.spc, IterConfig(Algorithm.MIN_SUM, 5))
        s = scale_to_error_surface(decoder, self.ch, self.e0)
        assert s == pytest.approx(2.0, rel=1e-5)

    def test_refinement_is_stable(self):
        """Test a tighter tolerance moves s* by less than the old one."""
        decoder = IterativeDecoder(self.spc, IterConfig(Algorithm.BP, 5))
        coarse = scale_to_error_surface(
            decoder, self.ch, self.e0, tau_surf=1e-4
        )
        fine = scale_to_error_surface(
            decoder, self.ch, self.e0, tau_surf=1e-8
        )
        assert abs(coarse - fine) <= 1e-4 * coarse

    def test_no_failure_below_cap(self):
        """Test a direction pushing away from the decision boundary."""
        decoder = IterativeDecoder(self.spc, IterConfig(Algorithm.BP, 5))
        with pytest.raises(SurfaceNotFoundError):
            scale_to_error_surface(decoder, self.ch, -self.e0)

    def test_direction_must_be_unit(self):
        """Test non-normalized directions are rejected."""
        decoder = IterativeDecoder(self.spc, IterConfig(Algorithm.BP, 5))
        with pytest.raises(InputError):
            scale_to_error_surface(decoder, self.ch, 2 * self.e0)


class TestAmoeba:
    """Test cases for the amoeba search on a single check."""

    def setup_method(self):
        """Set up test fixtures."""
        spc = TannerGraph(3, 1, [[0, 1, 2]])
        self.decoder = IterativeDecoder(spc, IterConfig(Algorithm.MIN_SUM, 5))
        self.ch = ChannelModel.awgn(1.0)
        self.cfg = AmoebaConfig(tau_stop=1e-3, max_evaluations=300)

    def test_record_sits_on_error_surface(self):
        """Test the returned noise fails above and decodes below."""
        record = amoeba_iterative(
            self.decoder, self.ch, self.cfg, np.random.default_rng(1), seed=1
        )
        assert record.method == "amoeba"
        assert surface_certificate(self.decoder, self.ch, record)
        # the closest failure is the midpoint to a weight-two codeword
        assert record.weight > 2.0 * (1 - 1e-4)
        assert record.weight <= record.weight_trajectory[0] + 1e-6

    def test_seed_point(self):
        """Test a seed on the weight-two codeword stays there."""
        record = amoeba_iterative(
            self.decoder,
            self.ch,
            self.cfg,
            np.random.default_rng(2),
            seed_point=[1.0, 1.0, 0.0],
        )
        assert record.weight == pytest.approx(2.0, rel=1e-3)

    def test_restricted_support(self):
        """Test noise stays on the restricted positions."""
        cfg = AmoebaConfig(support=(0,), max_evaluations=50)
        record = amoeba_iterative(
            self.decoder, self.ch, cfg, np.random.default_rng(3)
        )
        assert record.noise[1] == 0.0 and record.noise[2] == 0.0
        assert record.weight == pytest.approx(4.0, rel=1e-4)

    def test_requires_awgn(self):
        """Test the amoeba refuses a BSC model."""
        with pytest.raises(InputError):
            amoeba_iterative(
                self.decoder,
                ChannelModel.bsc(0.1),
                self.cfg,
                np.random.default_rng(0),
            )

    def test_dominant_support(self):
        """Test the fewest positions carrying most of the energy."""
        assert dominant_support([3.0, 0.1, 1.0, 0.0]) == (0, 2)
        assert dominant_support([3.0, 0.1, 1.0, 0.0], mass=0.5) == (0,)
        with pytest.raises(InputError):
            dominant_support([0.0, 0.0])


class TestLpSearches:
    """Test cases for ISA and PCS on the Hamming code."""

    def setup_method(self):
        """Set up test fixtures."""
        self.g = TannerGraph(7, 3, HAMMING_CHECKS)
        self.decoder = LpDecoder(self.g)

    def test_isa_returns_verified_instanton(self):
        """Test ISA output, trajectory and verification."""
        record = isa_bsc_lp(self.decoder, 3, np.random.default_rng(7), seed=7)
        assert record.channel is ChannelKind.BSC
        assert record.weight == len(record.support) >= 2
        trajectory = record.weight_trajectory
        assert all(b <= a for a, b in zip(trajectory, trajectory[1:]))
        assert verify_instanton(self.decoder, record.vector)
        assert record.pseudo_codeword_weight == w_bsc(record.pseudo_codeword)

    def test_isa_weight_never_grows(self):
        """Test the walk never moves to a heavier pseudo-codeword."""
        for seed in range(20):
            flips = 2 + seed % 3
            record = isa_bsc_lp(
                self.decoder, flips, np.random.default_rng(seed), seed=seed
            )
            trajectory = record.weight_trajectory
            assert all(b <= a for a, b in zip(trajectory, trajectory[1:]))
            sizes = [math.ceil((w + 1) / 2) for w in trajectory]
            assert all(b <= a for a, b in zip(sizes, sizes[1:]))
            assert record.weight == sizes[-1]
            assert 1 <= record.steps <= self.g.n

    def test_isa_retry_cap(self):
        """Test a start that never fails exhausts the retries."""
        with pytest.raises(RetryCapError):
            isa_bsc_lp(self.decoder, 1, np.random.default_rng(0), retry_cap=3)

    def test_pcs_from_codeword(self):
        """Test a codeword pseudo-codeword is a fixed point."""
        p = PseudoCodeword(np.array([1, 1, 0, 0, 0, 0, 1], dtype=float))
        record = pcs_from_pseudo_codeword(self.decoder, p)
        assert record.steps == 1
        assert record.weight == pytest.approx(3.0)
        assert np.allclose(record.noise, p.f)

    def test_pcs_weight_matches_pseudo_codeword(self):
        """Test the instanton weight is w_awgn of its pseudo-codeword."""
        record = pcs_awgn_lp(self.decoder, 1.5, np.random.default_rng(5))
        assert record.weight == pytest.approx(
            w_awgn(record.pseudo_codeword), rel=1e-9
        )
        assert record.parameters["strength"] == 1.5

    def test_pcs_restart_from_instanton(self):
        """Test restarting from a converged instanton stops at once."""
        record = pcs_awgn_lp(self.decoder, 1.5, np.random.default_rng(5))
        again = pcs_from_noise(self.decoder, (1 + DELTA) * record.noise)
        assert again.steps == 1
        assert np.allclose(again.noise, record.noise, atol=1e-6)
        assert again.weight == pytest.approx(record.weight, rel=1e-9)
        assert np.allclose(again.pseudo_codeword, record.pseudo_codeword)

    def test_pcs_from_noise_needs_failure(self):
        """Test noise that decodes correctly is rejected."""
        with pytest.raises(InputError):
            pcs_from_noise(self.decoder, np.zeros(7))

    def test_lp_verification(self):
        """Test instanton verification and the superset property."""
        assert verify_instanton(self.decoder, [1, 1, 0, 0, 0, 0, 0])
        assert not verify_instanton(self.decoder, [1, 0, 0, 0, 0, 0, 0])
        for extra in range(2, 7):
            bits = np.zeros(7, dtype=np.uint8)
            bits[[0, 1, extra]] = 1
            assert self.decoder.fails_bits(bits)
            assert not verify_instanton(self.decoder, bits)

    @pytest.mark.slow
    def test_tanner_isa_minimum(self):
        """Test ISA instantons of the Tanner code have size at least 5."""
        decoder = LpDecoder(build_tanner_155())
        for seed in range(10):
            record = isa_bsc_lp(
                decoder, 20, np.random.default_rng(seed), seed=seed
            )
            assert record.weight >= 5
            assert verify_instanton(decoder, record.vector)
            trajectory = record.weight_trajectory
            assert all(b <= a for a, b in zip(trajectory, trajectory[1:]))
            assert record.steps <= decoder.graph.n


class TestCriticalNumbers:
    """Test cases for the critical-number search."""

    def setup_method(self):
        """Set up test fixtures."""
        self.spc = TannerGraph(3, 1, [[0, 1, 2]])
        self.decoder = IterativeDecoder(
            self.spc, IterConfig(Algorithm.MIN_SUM, 5)
        )

    def test_wrong_codeword_inside_set(self):
        """Test two flips converge to a codeword inside the set."""
        result = critical_number_search(self.decoder, (0, 1))
        assert result.critical_number == 2
        assert result.witness.support == (0, 1)
        assert result.attempts == 3

    def test_single_flip_trapped(self):
        """Test one flip traps the decoder on the whole check."""
        result = critical_number_search(self.decoder, (2, 1, 0))
        assert result.critical_number == 1
        assert result.trapping_set == (0, 1, 2)

    def test_size_cap(self):
        """Test exhaustion reports a lower bound."""
        result = critical_number_search(self.decoder, (0, 1), size_cap=1)
        assert result.exhausted
        assert result.lower_bound == 2
        assert result.to_dict()["witness"] is None

    def test_census_sampling(self):
        """Test sampling needs a generator and keeps census order."""
        census = SubgraphClass(a=2, b=2, members=[(1, 2), (0, 1), (0, 2)])
        with pytest.raises(InputError):
            critical_numbers_for_census(self.decoder, census, sample=2)
        results = critical_numbers_for_census(
            self.decoder, census, sample=2, rng=np.random.default_rng(0)
        )
        assert len(results) == 2
        assert results[0].trapping_set < results[1].trapping_set
        assert all(r.critical_number == 2 for r in results)

    def test_witness_is_smallest_trapped_subset(self):
        """Test no strict subset of a witness traps inside the set."""
        hamming = TannerGraph(7, 3, HAMMING_CHECKS)
        decoders = [self.decoder] + [
            IterativeDecoder(hamming, IterConfig(algorithm, 10))
            for algorithm in (
                Algorithm.GALLAGER_A,
                Algorithm.GALLAGER_B,
                Algorithm.MIN_SUM,
            )
        ]
        found = 0
        for decoder in decoders:
            n = decoder.graph.n
            for ts in itertools.combinations(range(n), min(3, n)):
                result = critical_number_search(decoder, ts)
                if result.exhausted:
                    continue
                found += 1
                witness = result.witness.support
                k = result.critical_number
                assert len(witness) == k
                assert _trapped_inside(decoder, ts, witness)
                for size in range(1, k):
                    for subset in itertools.combinations(witness, size):
                        assert not _trapped_inside(decoder, ts, subset)
                if k > 1:
                    smaller = critical_number_search(
                        decoder, ts, size_cap=k - 1
                    )
                    assert smaller.exhausted
                    assert smaller.lower_bound == k
        assert found > 0

    @pytest.mark.slow
    def test_tanner_gallager_a(self):
        """Test critical numbers 3 and 4 of the Tanner trapping sets."""
        g = build_tanner_155()
        decoder = IterativeDecoder(g, IterConfig(Algorithm.GALLAGER_A, 20))
        rng = np.random.default_rng(0)
        for (a, b), expected in [((5, 3), 3), ((4, 4), 4)]:
            census = census_trapping_subgraphs(g, a, b)
            results = critical_numbers_for_census(
                decoder, census, sample=5, rng=rng
            )
            for result in results:
                assert result.critical_number == expected
                assert set(result.witness.support) <= set(
                    result.trapping_set
                )
                if expected == 3:
                    witness = result.witness.support
                    for size in (1, 2):
                        for subset in itertools.combinations(witness, size):
                            assert not decoder.fails_bits(
                                BinaryVector.from_support(g.n, subset)
                            )


class TestVerifyInstanton:
    """Test cases for verify_instanton with the oracle decoder."""

    def test_oracle(self):
        """Test the exact support verifies and others do not."""
        g = TannerGraph(7, 3, HAMMING_CHECKS)
        oracle = SupportOracleDecoder(g, [1, 3, 5])
        assert verify_instanton(oracle, [0, 1, 0, 1, 0, 1, 0])
        assert not verify_instanton(oracle, [0, 1, 0, 1, 0, 1, 1])
        assert not verify_instanton(oracle, [0, 1, 0, 1, 0, 0, 0])


class TestInstantonSet:
    """Test cases for deduplication, histograms and JSON lines."""

    def test_record_validation(self):
        """Test weights must match the stored vector."""
        with pytest.raises(InputError):
            InstantonRecord(
                channel=ChannelKind.BSC,
                decoder="lp/simplex",
                method="isa",
                length=7,
                weight=3,
                support=(0, 1),
            )
        with pytest.raises(InputError):
            InstantonRecord(
                channel=ChannelKind.AWGN,
                decoder="lp/simplex",
                method="pcs",
                length=2,
                weight=1.0,
                noise=np.array([1.0, 1.0]),
            )

    def test_dedup_and_histogram(self):
        """Test totals count every hit and unique counts every support."""
        found = InstantonSet()
        assert found.add(_bsc_record((0, 1)))
        assert not found.add(_bsc_record((1, 0)))
        assert found.add(_bsc_record((2, 3)))
        assert found.add(_bsc_record((0, 1, 6)))
        assert len(found) == 3
        assert found.minimum_weight == 2
        assert found.histogram() == [(2, 3, 2), (3, 1, 1)]
        assert found.histogram_csv().splitlines()[0] == "weight,total,unique"

    def test_awgn_dedup_quantum(self):
        """Test noise vectors equal to 1e-6 count once."""
        found = InstantonSet()
        for shift in (0.0, 1e-9):
            noise = np.array([1.2 + shift, 0.6])
            found.add(
                InstantonRecord(
                    channel=ChannelKind.AWGN,
                    decoder="lp/simplex",
                    method="pcs",
                    length=2,
                    weight=float(noise @ noise),
                    noise=noise,
                )
            )
        assert len(found) == 1
        assert found.histogram() == [(1.8, 2, 1)]

    def test_jsonl_file(self):
        """Test writing and reading instanton files."""
        found = InstantonSet()
        found.add(
            _bsc_record(
                (0, 1), pseudo_codeword=np.array([1.0] * 2 + [0.0] * 5)
            )
        )
        found.add(_bsc_record((2, 5, 6), seed=4))
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "found.jsonl"
            found.write_jsonl(path)
            loaded = InstantonSet.read_jsonl(path)
        assert [r.key() for r in loaded.records] == [
            r.key() for r in found.records
        ]
        assert loaded.records[1].seed == 4

    def test_bad_jsonl_line(self):
        """Test a malformed line names its position."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "bad.jsonl"
            path.write_text('{"channel": "bsc"}\n')
            with pytest.raises(InputError, match=":1:"):
                InstantonSet.read_jsonl(path)


class TestRunTrials:
    """Test cases for the multi-start driver."""

    def setup_method(self):
        """Set up test fixtures."""
        self.g = TannerGraph(7, 3, HAMMING_CHECKS)

    def test_spec_validation(self):
        """Test unsupported methods and incomplete amoeba settings."""
        with pytest.raises(InputError):
            SearchSpec(method="critical", graph=self.g)
        with pytest.raises(InputError):
            SearchSpec(method="amoeba", graph=self.g)

    def test_worker_count_does_not_change_results(self):
        """Test serial and parallel runs find the same instantons."""
        spec = SearchSpec(method="isa", graph=self.g, flips=3)
        serial = run_trials(spec, trials=4, seed=11, workers=1)
        parallel = run_trials(spec, trials=4, seed=11, workers=2)
        assert [r.key() for r in serial.records] == [
            r.key() for r in parallel.records
        ]
        assert [r.seed for r in serial.records] == [
            r.seed for r in parallel.records
        ]

    def test_failed_trials_are_collected(self):
        """Test capped trials land in failures instead of aborting."""
        spec = SearchSpec(method="isa", graph=self.g, flips=1, retry_cap=2)
        found = run_trials(spec, trials=3, seed=0)
        assert len(found) == 0
        assert [f["trial"] for f in found.failures] == [0, 1, 2]
        assert found.failures[0]["error"] == "RetryCapError"

    @pytest.mark.slow
    def test_tanner_pcs_minimum(self):
        """Test the lightest PCS instanton of the Tanner code."""
        spec = SearchSpec(method="pcs", graph=build_tanner_155())
        found = run_trials(spec, trials=2000, seed=0, workers=4)
        assert 16.39 <= found.minimum_weight <= 16.42
