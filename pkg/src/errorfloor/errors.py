"""Exceptions and CLI error handling for the errorfloor toolkit."""

from typing import Any, Dict, List, Optional

import click

from errorfloor.constants import EXIT_ALGORITHM, EXIT_INPUT, EXIT_USAGE


class ErrorfloorError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_ALGORITHM


class InputError(ErrorfloorError):
    """Invalid input data or arguments passed to an operation."""

    exit_code = EXIT_INPUT


class AlistParseError(InputError):
    """Malformed alist text; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LengthMismatchError(InputError):
    """Vector length does not match the code length."""


class ChannelMismatchError(InputError):
    """Channel output kind does not match the channel model."""


class DecoderConfigError(InputError):
    """Invalid or incomplete decoder configuration."""


class DegreeCapError(InputError):
    """Check degree exceeds the LP formulation cap."""


class ZeroPseudoCodewordError(InputError):
    """Operation is undefined on the all-zero pseudo-codeword."""


class EmptySpectrumError(InputError):
    """FER prediction requested from an empty instanton spectrum."""


class AlgorithmError(ErrorfloorError):
    """An algorithm hit a cap or failed to converge."""

    exit_code = EXIT_ALGORITHM


class SolverError(AlgorithmError):
    """LP solver failure; never returns a silently wrong optimum."""

    def __init__(self, message: str, stats: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.stats = stats or {}


class RetryCapError(AlgorithmError):
    """Search initialization retries exhausted."""


class ConvergenceError(AlgorithmError):
    """Iterative search did not reach a fixed point within its step cap."""

    def __init__(self, message: str, trajectory: Optional[List[float]] = None):
        super().__init__(message)
        self.trajectory = list(trajectory or [])


class SurfaceNotFoundError(AlgorithmError):
    """No decoding failure found along a direction below the scale cap."""


class ConstructionError(AlgorithmError):
    """Code construction infeasible after the backtrack cap."""

    def __init__(
        self, message: str, diagnostic: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class ErrorfloorGroup(click.Group):
    """Click group mapping usage errors to the documented exit code."""

    def make_context(self, *args: Any, **kwargs: Any) -> click.Context:
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


class ErrorHandler:
    """Centralized error handling and user messaging."""

    @staticmethod
    def handle_toolkit_error(error: ErrorfloorError) -> None:
        """Report a toolkit error and exit with its code."""
        click.echo(f"Error: {error}", err=True)
        raise click.exceptions.Exit(error.exit_code)

    @staticmethod
    def handle_file_error(error: OSError) -> None:
        """Handle unreadable or unwritable files."""
        name = getattr(error, "filename", None) or ""
        reason = getattr(error, "strerror", None) or str(error)
        click.echo(f"Error: cannot access {name}: {reason}", err=True)
        raise click.exceptions.Exit(EXIT_INPUT)

    @staticmethod
    def handle_config_error(error: ValueError) -> None:
        """Handle configuration loading failures."""
        click.echo(f"Error: {error}", err=True)
        raise click.exceptions.Exit(EXIT_INPUT)

    @staticmethod
    def handle_unexpected_error(error: Exception) -> None:
        """Handle unexpected errors."""
        click.echo(f"Unexpected error: {error}", err=True)
        raise click.exceptions.Exit(EXIT_ALGORITHM)
