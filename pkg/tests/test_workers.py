"""Tests for the process-pool helpers."""

from errorfloor.workers import default_workers, run_ordered


def _power(base, exponent):
    return base**exponent


class TestRunOrdered:
    """Test cases for run_ordered."""

    def test_serial(self):
        """Test results come back in job order."""
        assert run_ordered(_power, [(2, 3), (3, 2), (5, 0)]) == [8, 9, 1]

    def test_pool_keeps_order(self):
        """Test a process pool returns the serial results."""
        jobs = [(k, 2) for k in range(10)]
        assert run_ordered(_power, jobs, workers=3) == run_ordered(
            _power, jobs
        )

    def test_no_jobs(self):
        """Test an empty job list."""
        assert run_ordered(_power, [], workers=4) == []

    def test_default_workers(self):
        """Test at least one worker is available."""
        assert default_workers() >= 1
