"""Shared domain types: problem parameters, exponents, grids and modal series.

All types here are immutable value objects; derived quantities are exposed
as properties so a validated configuration carries everything downstream
modules need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """A parameter violates one of the model's admissibility conditions."""


@dataclass(frozen=True)
class ProblemConfig:
    """Physical parameters of the strip problem.

    l   -- strip width, > 0
    c   -- wave speed, > 0
    eps -- viscosity-scale perturbation parameter, > 0
    """

    l: float
    c: float
    eps: float

    def __post_init__(self):
        for name in ("l", "c", "eps"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive and finite, got {v}")

    @property
    def q(self) -> float:
        return math.pi ** 2 / (2.0 * self.l ** 2)

    @property
    def b(self) -> float:
        return self.q * self.eps

    @property
    def k(self) -> float:
        """Mode index separating oscillatory from monotone modal responses."""
        return 2.0 * self.c * self.l / (math.pi * self.eps)

    def gamma_n(self, n):
        """Sine-basis wavenumber(s) pi*n/l; n may be an int or array."""
        return np.pi * np.asarray(n, dtype=float) / self.l

    def damping(self, n):
        """Modal damping rate b*n^2 == (eps/2)*gamma_n^2."""
        n = np.asarray(n, dtype=float)
        return self.b * n * n


@dataclass(frozen=True)
class ExponentParams:
    """Exponents of the layer-split analysis.

    alpha splits the oscillatory block, beta offsets the mode threshold,
    delta weights time in the error estimate, gamma is the tail exponent.
    """

    alpha: float = 0.8
    beta: float = 0.5
    delta: float = 0.9
    gamma: float = 0.5

    @property
    def beta4(self) -> float:
        """Derived exponent delta*(2*alpha - 1) - 1/2."""
        return self.delta * (2.0 * self.alpha - 1.0) - 0.5

    @property
    def eta(self) -> float:
        return min(self.beta4, self.gamma, 1.0 - self.alpha, 0.5)


@dataclass(frozen=True)
class Grid:
    """Uniform space-time sampling: nx points on [0, l], nt points on [0, t_max]."""

    nx: int
    nt: int
    t_max: float

    def __post_init__(self):
        if self.nx < 3:
            raise ConfigError(f"nx must be >= 3, got {self.nx}")
        if self.nt < 2:
            raise ConfigError(f"nt must be >= 2, got {self.nt}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ConfigError(f"t_max must be positive, got {self.t_max}")

    def x(self, l: float) -> np.ndarray:
        return np.linspace(0.0, l, self.nx)

    def dx(self, l: float) -> float:
        return l / (self.nx - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.nt)

    @property
    def dt(self) -> float:
        return self.t_max / (self.nt - 1)


@dataclass(frozen=True)
class Field:
    """Scalar function sampled on a grid; values[i, j] is the value at (x_i, t_j)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nx, self.grid.nt):
            raise ConfigError(
                f"field shape {v.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.nt})"
            )
        if not np.all(np.isfinite(v)):
            raise ConfigError("field contains non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ModalSeries:
    """Sine-series coefficients of a field over modes n = 1..n_modes.

    coeffs[n-1, j] is the coefficient of sin(gamma_n x) at time t_j.
    tail_bound certifies the discarded remainder in absolute value.
    """

    grid: Grid
    n_modes: int
    coeffs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.n_modes, self.grid.nt):
            raise ConfigError(
                f"coeffs shape {c.shape} does not match "
                f"({self.n_modes}, {self.grid.nt})"
            )
        if self.tail_bound < 0:
            raise ConfigError("tail_bound must be >= 0")
        object.__setattr__(self, "coeffs", c)

    def reconstruct(self, cfg: ProblemConfig) -> Field:
        """Evaluate the series on the grid (lift-free part only)."""
        x = self.grid.x(cfg.l)
        ns = np.arange(1, self.n_modes + 1)
        sines = np.sin(np.outer(cfg.gamma_n(ns), x))  # (N, nx)
        return Field(self.grid, sines.T @ self.coeffs)


def mode_threshold(cfg: ProblemConfig) -> float:
    """Threshold k = 2cl/(pi*eps) between underdamped and overdamped modes."""
    return cfg.k


def validate_config(cfg: ProblemConfig, exps: ExponentParams):
    """Check every admissibility condition; return the pair unchanged.

    Raises ConfigError naming the violated condition and offending value.
    """
    # ProblemConfig positivity is enforced at construction.
    a = exps.alpha
    if not 0.5 < a < 1.0:
        raise ConfigError(f"alpha must satisfy 1/2 < alpha < 1, got {a}")
    if not 0.0 < exps.beta < 1.0:
        raise ConfigError(f"beta must satisfy 0 < beta < 1, got {exps.beta}")
    if not 0.0 < exps.gamma < 1.0:
        raise ConfigError(f"gamma must satisfy 0 < gamma < 1, got {exps.gamma}")
    lo = 1.0 / (2.0 * (2.0 * a - 1.0))
    if not lo < exps.delta < 1.0:
        raise ConfigError(
            f"delta must satisfy 1/(2(2*alpha-1)) = {lo:.6g} < delta < 1, "
            f"got {exps.delta}"
        )
    if exps.beta4 <= 0:
        raise ConfigError(f"derived beta4 = {exps.beta4} must be positive")
    if not 0.0 < exps.eta <= 0.5:
        raise ConfigError(f"derived eta = {exps.eta} must lie in (0, 1/2]")
    return cfg, exps
