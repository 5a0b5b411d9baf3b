"""Quadratic performance map.

The objective y = Q(input) is unknown to the controller; only its scalar
output is observable. Diagnostics may inspect the true curvature/optimizer,
controller code must go through :func:`MapParams.evaluator`, which exposes
nothing but the input-to-output call.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class MapParams:
    """Parameters of the quadratic map y = optimum + hessian/2 * (x - optimizer)^2.

    Maximization convention: hessian < 0. Construct through :meth:`create`,
    which accepts a positive curvature (minimization) and negates the whole
    objective internally, recording the flip.
    """

    hessian: float
    optimizer: float
    optimum: float
    flipped_for_minimization: bool = False

    @classmethod
    def create(cls, hessian: float, optimizer: float, optimum: float) -> "MapParams":
        if hessian == 0:
            raise ValidationError("map curvature must be nonzero")
        if hessian > 0:
            # minimization problem: work on the negated objective
            return cls(-hessian, optimizer, -optimum, flipped_for_minimization=True)
        return cls(hessian, optimizer, optimum)

    def evaluator(self):
        """Opaque input -> output handle; hides every field from the caller."""
        h, xs, ys = self.hessian, self.optimizer, self.optimum
        return lambda x: ys + 0.5 * h * (x - xs) ** 2


def eval_map(params: MapParams, x: float) -> float:
    """Map output at input x; exact at the optimizer, symmetric about it."""
    return params.optimum + 0.5 * params.hessian * (x - params.optimizer) ** 2
