"""Numerical checks on flows: Kolmogorov-Chapman residuals, the forward and
backward partial differential equations, and an ODE oracle for exp_mu."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import algebra
from .flows import FlowFamily
from .rules import MulRule, multiply
from .tensor import CubicMatrix

DEFAULT_H = 1e-4


def standard_grid(discrete: bool = False) -> list:
    """Fixed verification triples ``(s, tau, t)``.

    Continuous: ``s in {0, 0.3, 0.7}``, ``tau = s + d/3``, ``t = s + d`` for
    ``d in {0.5, 1, 2}``. Discrete: every integer ``0 <= n < k < m <= 5``.
    """
    if discrete:
        return list(itertools.combinations(range(6), 3))
    return [(s, s + d / 3, s + d) for s in (0.0, 0.3, 0.7) for d in (0.5, 1.0, 2.0)]


def standard_pde_samples() -> list:
    """The continuous standard grid shifted by 0.25 so that ``s - h >= 0``."""
    return [(s + 0.25, tau + 0.25, t + 0.25) for s, tau, t in standard_grid()]


@dataclass
class KceReport:
    grid: list
    residuals: list
    max_entry_residuals: list
    tolerance: float
    label: str = ""

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "flow": self.label,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "pass": self.passed,
            "points": [{"s": s, "tau": tau, "t": t, "residual": r, "max_entry_residual": e}
                       for (s, tau, t), r, e in zip(self.grid, self.residuals, self.max_entry_residuals)],
        }


@dataclass
class PdeReport:
    samples: list
    h: float
    forward: list
    backward: list
    tolerance: float
    label: str = ""

    @property
    def max_forward(self) -> float:
        return max(self.forward) if self.forward else 0.0

    @property
    def max_backward(self) -> float:
        return max(self.backward) if self.backward else 0.0

    @property
    def max_residual(self) -> float:
        return max(self.max_forward, self.max_backward)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "flow": self.label,
            "h": self.h,
            "tolerance": self.tolerance,
            "max_forward": self.max_forward,
            "max_backward": self.max_backward,
            "pass": self.passed,
            "points": [{"s": s, "tau": tau, "t": t, "forward": f, "backward": b}
                       for (s, tau, t), f, b in zip(self.samples, self.forward, self.backward)],
        }


def _ordered(triple) -> tuple:
    s, tau, t = triple
    if not s < tau < t:
        raise ValueError(f"grid point must satisfy s < tau < t, got {triple}")
    return s, tau, t


def check_kce(flow: FlowFamily, grid=None, tol: float = 1e-8) -> KceReport:
    """``||M[s,t] - M[s,tau] * M[tau,t]||_1`` at each grid triple."""
    grid = [tuple(p) for p in (grid if grid is not None else standard_grid(flow.discrete))]
    residuals, entry = [], []
    for point in grid:
        s, tau, t = _ordered(point)
        diff = flow.eval(s, t) - multiply(flow.rule, flow.eval(s, tau), flow.eval(tau, t))
        residuals.append(diff.norm_l1())
        entry.append(diff.max_abs())
    return KceReport(grid, residuals, entry, tol, flow.label)


def check_pde(flow: FlowFamily, samples=None, h: float = DEFAULT_H, tol: float = 1e-6) -> PdeReport:
    """Central-difference residuals of the forward equation
    ``d/ds M[s,t] = (d/ds M[s,tau]) * M[tau,t]`` and the backward equation
    ``d/dt M[s,t] = M[s,tau] * (d/dt M[tau,t])``."""
    if flow.discrete:
        raise ValueError(f"{flow.label} is discrete-time; PDE check needs a continuous family")
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    samples = [tuple(p) for p in (samples if samples is not None else standard_pde_samples())]
    rule = flow.rule
    fwd, bwd = [], []
    for point in samples:
        s, tau, t = _ordered(point)
        if not (s + h < tau < t - h) or s - h < 0:
            raise ValueError(f"step h={h} too large for sample {point}")
        ds_st = (flow.eval(s + h, t) - flow.eval(s - h, t)) / (2 * h)
        ds_stau = (flow.eval(s + h, tau) - flow.eval(s - h, tau)) / (2 * h)
        fwd.append((ds_st - multiply(rule, ds_stau, flow.eval(tau, t))).norm_l1())
        dt_st = (flow.eval(s, t + h) - flow.eval(s, t - h)) / (2 * h)
        dt_taut = (flow.eval(tau, t + h) - flow.eval(tau, t - h)) / (2 * h)
        bwd.append((dt_st - multiply(rule, flow.eval(s, tau), dt_taut)).norm_l1())
    return PdeReport(samples, h, fwd, bwd, tol, flow.label)


def ode_oracle(rule: MulRule, q: CubicMatrix, t_end: float = 1.0, steps: int = 1000) -> CubicMatrix:
    """Classical RK4 for ``dY/dt = q * Y``, ``Y(0) = unit``."""
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    y = algebra.unit_of(rule).flat.copy()
    lmat = rule.left_matrix(q)
    dt = t_end / steps
    for _ in range(steps):
        k1 = lmat @ y
        k2 = lmat @ (y + 0.5 * dt * k1)
        k3 = lmat @ (y + 0.5 * dt * k2)
        k4 = lmat @ (y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return CubicMatrix.from_flat(y)
