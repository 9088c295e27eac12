"""Sinc quadrature for negative fractional powers of an elliptic operator.

With the step size ``k`` and nodes ``y_l = l k`` for ``l = -K_minus..K_plus``,

    L^{-beta} ~ sum_l (c_I^(l) I + c_L^(l) L)^{-1},
    c_I^(l) = pi / (2 k sin(pi beta)) * exp(-2 beta y_l),
    c_L^(l) = c_I^(l) * exp(2 y_l).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class QuadratureStep:
    l: int
    y: float
    c_I: float
    c_L: float


@dataclass(frozen=True)
class QuadraturePlan:
    beta: float
    kappa: float
    k: float
    K_minus: int
    K_plus: int
    steps: tuple[QuadratureStep, ...]

    @property
    def c_const(self) -> float:
        return math.pi / (2.0 * self.k * math.sin(math.pi * self.beta))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def apply_scalar(self, lam):
        """Quadrature approximation of ``lam ** -beta`` (for eigenvalues of L)."""
        lam = np.asarray(lam, dtype=np.float64)
        return sum(1.0 / (s.c_I + s.c_L * lam) for s in self.steps)


MAX_STEPS = 1_000_000


def default_step(beta: float, h: float) -> float:
    """k = -1 / (beta ln h), tying the quadrature error to the mesh size."""
    if not 0 < h < 1:
        raise ValueError(f"deriving k from h needs 0 < h < 1, got h={h}")
    return -1.0 / (beta * math.log(h))


def plan(beta: float, kappa: float = 1.0, h: float | None = None, k: float | None = None) -> QuadraturePlan:
    if not 0.25 < beta < 1.0:
        raise ValueError(f"beta must lie in (1/4, 1), got {beta}")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if k is None:
        if h is None:
            raise ValueError("need either h or an explicit quadrature step k")
        k = default_step(beta, h)
    if not k > 0:
        raise ValueError("quadrature step must be positive")

    K_minus = math.ceil(math.pi**2 / (4.0 * k**2 * beta))
    K_plus = math.ceil(math.pi**2 / (4.0 * k**2 * (1.0 - beta)))
    c_const = math.pi / (2.0 * k * math.sin(math.pi * beta))
    if K_minus + K_plus + 1 > MAX_STEPS:
        raise ValueError(f"too many quadrature steps ({K_minus + K_plus + 1}) for beta={beta}, k={k}")
    # largest exponents occur at the two ends of the range
    if max(2.0 * beta * K_minus * k, 2.0 * (1.0 - beta) * K_plus * k) + math.log(c_const) > 700.0:
        raise ValueError(f"quadrature coefficients overflow for beta={beta}, k={k}")
    steps = []
    for l in range(-K_minus, K_plus + 1):
        y = l * k
        # c_L = c_I e^{2y}, written so neither factor overflows on its own
        c_I = c_const * math.exp(-2.0 * beta * y)
        c_L = c_const * math.exp(2.0 * (1.0 - beta) * y)
        steps.append(QuadratureStep(l, y, c_I, c_L))
    return QuadraturePlan(beta, kappa, k, K_minus, K_plus, tuple(steps))


def accumulate(partials: Iterable[np.ndarray]) -> np.ndarray:
    """Sum per-step solutions in the order given (ascending l by convention)."""
    total = None
    for u in partials:
        u = np.asarray(u, dtype=np.float64)
        if total is None:
            total = u.copy()
        elif u.shape != total.shape:
            raise ValueError(f"partial of shape {u.shape} does not match {total.shape}")
        else:
            total += u
    if total is None:
        raise ValueError("nothing to accumulate")
    return total
