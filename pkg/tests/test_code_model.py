"""Tests for Tanner graphs, alist I/O, diagnostics and the census."""

import itertools
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from errorfloor.code_model import (TannerGraph, build_tanner_155,
                                   census_trapping_subgraphs,
                                   classify_subgraph, code_rate,
                                   enumerate_connected_subsets, gf2_rank,
                                   girth, is_codeword, load_alist,
                                   load_census, load_code, null_space_basis,
                                   relabel, save_alist, save_census,
                                   syndrome)
from errorfloor.errors import AlistParseError, InputError, LengthMismatchError

SPC3_ALIST = "3 1\n1 3\n1 1 1\n3\n1\n1\n1\n1 2 3\n"

HAMMING_CHECKS = [[0, 1, 2, 4], [0, 1, 3, 5], [0, 2, 3, 6]]


def _connected_recount(g: TannerGraph, a: int) -> int:
    """Independent count: grow sets by DFS and deduplicate as frozensets."""
    adjacency = [set() for _ in range(g.n)]
    for row in g.check_neighbors:
        for i in row:
            adjacency[i].update(v for v in row if v != i)
    frontier = {frozenset([v]) for v in range(g.n)}
    for _ in range(a - 1):
        grown = set()
        for s in frontier:
            for v in set().union(*(adjacency[u] for u in s)) - s:
                grown.add(s | {v})
        frontier = grown
    return len(frontier)


class TestTannerGraph:
    """Test cases for graph construction."""

    def test_single_check(self):
        """Test the smallest nonempty code."""
        g = TannerGraph(3, 1, [[2, 0, 1]])
        assert g.check_neighbors == ((0, 1, 2),)
        assert g.var_neighbors == ((0,), (0,), (0,))
        assert g.num_edges == 3

    def test_rejects_out_of_range_and_parallel_edges(self):
        """Test invalid neighbor lists."""
        with pytest.raises(InputError):
            TannerGraph(3, 1, [[0, 1, 3]])
        with pytest.raises(InputError):
            TannerGraph(3, 1, [[0, 1, 1]])

    def test_asymmetric_adjacency(self):
        """Test that both adjacency sides must agree."""
        with pytest.raises(InputError, match="asymmetric"):
            TannerGraph.from_adjacency(3, 1, [[0], [0], []], [[0, 1, 2]])

    def test_parity_check_round_trip(self):
        """Test conversion to and from a parity-check matrix."""
        g = TannerGraph(7, 3, HAMMING_CHECKS)
        assert TannerGraph.from_parity_check(g.to_parity_check()) == g


class TestAlist:
    """Test cases for alist parsing and writing."""

    def test_load_single_check(self):
        """Test parsing a single parity check on three bits."""
        g = load_alist(SPC3_ALIST)
        assert (g.n, g.m) == (3, 1)
        assert g.check_neighbors == ((0, 1, 2),)

    def test_save_starts_with_sizes(self):
        """Test the header of written alist text."""
        text = save_alist(TannerGraph(3, 1, [[0, 1, 2]]))
        assert text.startswith("3 1")
        assert load_alist(text) == TannerGraph(3, 1, [[0, 1, 2]])

    def test_tanner_header(self):
        """Test the first line of the Tanner code alist."""
        assert save_alist(build_tanner_155()).splitlines()[0] == "155 93"

    def test_index_out_of_range_names_line(self):
        """Test a neighbor index beyond n."""
        bad = SPC3_ALIST.replace("1 2 3", "1 2 4")
        with pytest.raises(AlistParseError, match="index out of range") as e:
            load_alist(bad)
        assert e.value.line == 8

    def test_malformed_header(self):
        """Test a header without two integers."""
        with pytest.raises(AlistParseError) as e:
            load_alist("3\n" + SPC3_ALIST)
        assert e.value.line == 1

    def test_asymmetric_alist(self):
        """Test variable and check lists that disagree."""
        text = "3 2\n1 2\n1 1 1\n2 1\n1\n1\n1\n1 2\n3\n"
        with pytest.raises(AlistParseError, match="asymmetric"):
            load_alist(text)

    def test_truncated_file(self):
        """Test an alist that ends early."""
        with pytest.raises(AlistParseError, match="unexpected end"):
            load_alist("3 1\n1 3\n1 1 1\n")

    def test_load_code_from_file(self):
        """Test resolving an alist path."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "spc.alist"
            path.write_text(SPC3_ALIST)
            assert load_code(str(path)).n == 3
        assert load_code("tanner155").n == 155


class TestDiagnostics:
    """Test cases for girth, rank and codeword membership."""

    def setup_method(self):
        """Set up test fixtures."""
        self.spc = TannerGraph(3, 1, [[0, 1, 2]])
        self.hamming = TannerGraph(7, 3, HAMMING_CHECKS)

    def test_girth(self):
        """Test girth of a tree and of a four-cycle."""
        assert girth(self.spc) == math.inf
        assert girth(TannerGraph(2, 2, [[0, 1], [0, 1]])) == 4
        assert girth(self.hamming) == 4

    def test_rank(self):
        """Test GF(2) rank including a duplicate row."""
        assert gf2_rank(self.spc) == 1
        assert gf2_rank(self.hamming) == 3
        doubled = TannerGraph(7, 4, HAMMING_CHECKS + [HAMMING_CHECKS[0]])
        assert gf2_rank(doubled) == 3
        assert code_rate(self.hamming) == pytest.approx(4 / 7)

    def test_syndrome_and_codewords(self):
        """Test syndromes of simple vectors."""
        assert syndrome(self.spc, [0, 0, 0]).is_zero
        assert syndrome(self.spc, [1, 1, 0]).is_zero
        assert not is_codeword(self.spc, [1, 0, 0])
        with pytest.raises(LengthMismatchError):
            syndrome(self.spc, [1, 0])

    def test_null_space_basis(self):
        """Test that every basis vector is a codeword."""
        basis = null_space_basis(self.hamming)
        assert basis.shape == (4, 7)
        for row in basis:
            assert is_codeword(self.hamming, row)


class TestTannerCode:
    """Test cases for the built-in [155,64,20] Tanner code."""

    def setup_method(self):
        """Set up test fixtures."""
        self.g = build_tanner_155()

    def test_structure(self):
        """Test sizes, degrees, girth and rank."""
        assert (self.g.n, self.g.m) == (155, 93)
        assert set(self.g.var_degrees.tolist()) == {3}
        assert set(self.g.check_degrees.tolist()) == {5}
        assert girth(self.g) == 8
        assert gf2_rank(self.g) == 91

    def test_codeword_basis(self):
        """Test that the null-space basis spans 64 dimensions of codewords."""
        basis = null_space_basis(self.g)
        assert basis.shape == (64, 155)
        assert not self.g.parity(basis).any()

    def test_no_weight_one_codeword(self):
        """Test that a single one never satisfies all checks."""
        for row in np.eye(self.g.n, dtype=int):
            assert not is_codeword(self.g, row)


class TestCensus:
    """Test cases for subset enumeration and the trapping-set census."""

    def setup_method(self):
        """Set up test fixtures."""
        self.spc = TannerGraph(3, 1, [[0, 1, 2]])
        self.hamming = TannerGraph(7, 3, HAMMING_CHECKS)

    def test_small_enumerations(self):
        """Test singletons and pairs of a single check."""
        assert len(list(enumerate_connected_subsets(self.spc, 1))) == 3
        assert sorted(enumerate_connected_subsets(self.spc, 2)) == [
            (0, 1),
            (0, 2),
            (1, 2),
        ]

    def test_enumeration_matches_recount(self):
        """Test each connected subset appears once."""
        for a in range(1, 5):
            found = list(enumerate_connected_subsets(self.hamming, a))
            assert len(found) == len(set(found))
            assert len(found) == _connected_recount(self.hamming, a)

    def test_singletons(self):
        """Test (1, d_v) contains every variable."""
        g = build_tanner_155()
        result = census_trapping_subgraphs(g, 1, 3)
        assert result.count == 155

    def test_census_matches_brute_force(self):
        """Test the census against an exhaustive classification."""
        for a, b in [(2, 2), (3, 1), (3, 3), (4, 0)]:
            expected = [
                s
                for s in itertools.combinations(range(7), a)
                if classify_subgraph(self.hamming, s) == (a, b)
            ]
            found = census_trapping_subgraphs(
                self.hamming, a, b, connected=False
            )
            assert found.members == expected

    def test_parallel_matches_serial(self):
        """Test that workers do not change the member list."""
        serial = census_trapping_subgraphs(self.hamming, 3, 1)
        parallel = census_trapping_subgraphs(self.hamming, 3, 1, workers=2)
        assert serial.members == parallel.members

    def test_save_and_load(self):
        """Test census JSON files."""
        census = census_trapping_subgraphs(self.hamming, 2, 2)
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "census.json"
            save_census(census, path)
            assert load_census(path) == census

    def test_relabel(self):
        """Test renamed variables and checks keep the adjacency."""
        g = relabel(self.spc, [2, 0, 1], [0])
        assert g.check_neighbors == ((0, 1, 2),)
        g = relabel(self.hamming, list(range(7)), [2, 0, 1])
        assert g.check_neighbors[2] == tuple(HAMMING_CHECKS[0])

    def test_census_invariant_under_relabeling(self):
        """Test random relabelings map census members one to one."""
        rng = np.random.default_rng(11)
        for _ in range(3):
            var_perm = rng.permutation(7)
            check_perm = rng.permutation(3)
            shuffled = relabel(self.hamming, var_perm, check_perm)
            assert girth(shuffled) == girth(self.hamming)
            for a in range(1, 6):
                for b in range(0, 5):
                    for connected in (True, False):
                        base = census_trapping_subgraphs(
                            self.hamming, a, b, connected=connected
                        )
                        moved = census_trapping_subgraphs(
                            shuffled, a, b, connected=connected
                        )
                        assert moved.count == base.count
                        assert set(moved.members) == {
                            tuple(sorted(int(var_perm[i]) for i in s))
                            for s in base.members
                        }

    @pytest.mark.slow
    def test_tanner_trapping_sets(self):
        """Test the (5,3) and (4,4) counts of the Tanner code."""
        g = build_tanner_155()
        assert census_trapping_subgraphs(g, 5, 3).count == 155
        assert census_trapping_subgraphs(g, 4, 4).count == 465

    @pytest.mark.slow
    def test_tanner_census_invariant_under_relabeling(self):
        """Test the Tanner counts survive a random relabeling."""
        rng = np.random.default_rng(3)
        g = relabel(
            build_tanner_155(), rng.permutation(155), rng.permutation(93)
        )
        assert gf2_rank(g) == 91
        assert census_trapping_subgraphs(g, 5, 3).count == 155
        assert census_trapping_subgraphs(g, 4, 4).count == 465
