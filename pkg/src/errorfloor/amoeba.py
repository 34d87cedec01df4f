"""Nelder-Mead downhill simplex over real vectors.

The objective may return math.inf for points it cannot evaluate; such
vertices are treated as worse than every finite one.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from errorfloor.errors import InputError
from errorfloor.logging_config import get_logger

logger = get_logger(__name__)

Objective = Callable[[np.ndarray], float]
Diameter = Callable[[np.ndarray], float]


def simplex_diameter(vertices: np.ndarray) -> float:
    """Largest distance from the first vertex to any other."""
    if vertices.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(vertices[1:] - vertices[0], axis=1).max())


@dataclass
class NelderMeadResult:
    """Best vertex found and the work spent."""

    x: np.ndarray
    fx: float
    evaluations: int
    iterations: int
    converged: bool
    diameter: float
    history: List[float] = field(default_factory=list)


class NelderMead:
    """
    Downhill simplex minimizer.

    Args:
        f: Objective
        reflect: Reflection coefficient
        expand: Expansion coefficient
        contract: Contraction coefficient
        shrink: Shrink coefficient
        tol: Stop once the simplex diameter drops below tol
        max_evaluations: Objective evaluation budget
        diameter: Measure of simplex size, defaults to simplex_diameter
    """

    def __init__(
        self,
        f: Objective,
        reflect: float = 1.0,
        expand: float = 2.0,
        contract: float = 0.5,
        shrink: float = 0.5,
        tol: float = 1e-4,
        max_evaluations: int = 2000,
        diameter: Optional[Diameter] = None,
    ):
        if min(reflect, expand, contract, shrink, tol) <= 0.0:
            raise InputError("Nelder-Mead coefficients must be positive")
        if not expand > reflect or not contract < 1.0 or not shrink < 1.0:
            raise InputError(
                "need expand > reflect, contract < 1 and shrink < 1"
            )
        self.f = f
        self.reflect = reflect
        self.expand = expand
        self.contract = contract
        self.shrink = shrink
        self.tol = tol
        self.max_evaluations = max_evaluations
        self.diameter = diameter or simplex_diameter
        self.evaluations = 0

    def evaluate(self, x: np.ndarray) -> float:
        """Objective value, counted against the budget."""
        self.evaluations += 1
        return float(self.f(x))

    def initial_simplex(
        self, x0: np.ndarray, step: float = 0.1
    ) -> np.ndarray:
        """x0 plus one vertex displaced by step along each axis."""
        x0 = np.asarray(x0, dtype=np.float64)
        vertices = np.tile(x0, (x0.shape[0] + 1, 1))
        vertices[1:] += step * np.eye(x0.shape[0])
        return vertices

    def minimize(
        self, vertices: np.ndarray, values: Optional[np.ndarray] = None
    ) -> NelderMeadResult:
        """
        Run from an initial simplex of N + 1 vertices in N dimensions.

        Args:
            vertices: (N + 1, N) starting simplex
            values: Objective at the vertices if already known

        Returns:
            NelderMeadResult for the best vertex
        """
        simplex = np.array(vertices, dtype=np.float64)
        if simplex.ndim != 2 or simplex.shape[0] != simplex.shape[1] + 1:
            raise InputError("simplex must have shape (N + 1, N)")
        if values is None:
            fx = np.array([self.evaluate(v) for v in simplex])
        else:
            fx = np.asarray(values, dtype=np.float64).copy()

        iterations = 0
        history: List[float] = []
        while True:
            order = np.argsort(fx, kind="stable")
            simplex, fx = simplex[order], fx[order]
            history.append(float(fx[0]))
            size = self.diameter(simplex)
            if size < self.tol:
                converged = True
                break
            if self.evaluations >= self.max_evaluations:
                converged = False
                break
            iterations += 1

            centroid = simplex[:-1].mean(axis=0)
            worst = simplex[-1]
            xr = centroid + self.reflect * (centroid - worst)
            fr = self.evaluate(xr)
            if fr < fx[0]:
                xe = centroid + self.expand * (xr - centroid)
                fe = self.evaluate(xe)
                if fe < fr:
                    simplex[-1], fx[-1] = xe, fe
                else:
                    simplex[-1], fx[-1] = xr, fr
                continue
            if fr < fx[-2]:
                simplex[-1], fx[-1] = xr, fr
                continue

            if fr < fx[-1]:
                xc = centroid + self.contract * (xr - centroid)
                fc = self.evaluate(xc)
                accepted = fc <= fr
            else:
                xc = centroid + self.contract * (worst - centroid)
                fc = self.evaluate(xc)
                accepted = fc < fx[-1]
            if accepted:
                simplex[-1], fx[-1] = xc, fc
                continue

            best = simplex[0]
            for i in range(1, simplex.shape[0]):
                simplex[i] = best + self.shrink * (simplex[i] - best)
                fx[i] = self.evaluate(simplex[i])

        logger.debug(
            f"Nelder-Mead stopped after {iterations} iterations, "
            f"{self.evaluations} evaluations, diameter {size:.3g}"
        )
        return NelderMeadResult(
            x=simplex[0].copy(),
            fx=float(fx[0]),
            evaluations=self.evaluations,
            iterations=iterations,
            converged=converged,
            diameter=size,
            history=history,
        )
