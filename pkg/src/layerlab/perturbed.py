"""Perturbed-problem solvers: modal Duhamel convolution against the damped
kernel and assembly of the two asymptotic decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._quadrature import causal_convolution, prefix_simpson_weights
from .core import Field, Grid, ModalSeries, ProblemConfig
from .green import modal_amplitude
from .reduced_wave import ReducedSolution

ADDITIVE = "additive_eps_r"
EXP_DECAY = "exp_decay_w"


@dataclass(frozen=True)
class PerturbedSolution:
    """Error term r (modal) plus, optionally, an assembled field."""

    r_modal: ModalSeries
    decomposition: str
    assembled: Optional[Field] = None


def modal_convolution(f_n: np.ndarray, n: int, cfg: ProblemConfig, grid: Grid) -> np.ndarray:
    """r_n(t_j) = -integral_0^{t_j} f_n(tau) H_n(t_j - tau) dtau.

    The kernel is evaluated in closed form at the quadrature nodes; the
    orthogonality factor (2/l)(l/2) cancels to 1.
    """
    f_n = np.asarray(f_n, dtype=float)
    if f_n.shape != (grid.nt,):
        raise ValueError(f"f_n has shape {f_n.shape}, expected ({grid.nt},)")
    if not np.all(np.isfinite(f_n)):
        raise ValueError("f_n must be finite")
    lags = modal_amplitude(n, grid.t, cfg)
    W = prefix_simpson_weights(grid.nt, grid.dt)
    return -causal_convolution(f_n, lags, W)


def solve_error_term(
    source: ModalSeries,
    cfg: ProblemConfig,
    grid: Grid,
    decomposition: str = EXP_DECAY,
) -> PerturbedSolution:
    """Convolve the modal source mode-by-mode into the error term r.

    For the additive decomposition the error problem carries the forcing with
    the opposite sign (it reads: damped operator applied to r equals -F), so
    the source is negated before the shared convolution.
    """
    if decomposition not in (ADDITIVE, EXP_DECAY):
        raise ValueError(f"unknown decomposition tag {decomposition!r}")
    if source.grid != grid:
        raise ValueError("source grid does not match requested output grid")
    sign = -1.0 if decomposition == ADDITIVE else 1.0
    W = prefix_simpson_weights(grid.nt, grid.dt)
    coeffs = np.empty_like(source.coeffs)
    for i in range(source.n_modes):
        lags = modal_amplitude(i + 1, grid.t, cfg)
        coeffs[i] = -causal_convolution(sign * source.coeffs[i], lags, W)
    r_modal = ModalSeries(grid=grid, n_modes=source.n_modes, coeffs=coeffs)
    return PerturbedSolution(r_modal=r_modal, decomposition=decomposition)


def assemble_solution(
    u0: ReducedSolution,
    r: PerturbedSolution,
    cfg: ProblemConfig,
    decomposition: str,
) -> Field:
    """additive_eps_r: u0 + eps*r;  exp_decay_w: e^{-eps t} u0 + r."""
    if decomposition not in (ADDITIVE, EXP_DECAY):
        raise ValueError(f"unknown decomposition tag {decomposition!r}")
    if r.decomposition != decomposition:
        raise ValueError(
            f"error term was built for {r.decomposition!r}, "
            f"cannot assemble as {decomposition!r}"
        )
    if u0.grid != r.r_modal.grid:
        raise ValueError("grids of u0 and r do not match")
    grid = u0.grid
    u_field = u0.field().values
    r_field = r.r_modal.reconstruct(cfg).values
    if decomposition == ADDITIVE:
        values = u_field + cfg.eps * r_field
    else:
        values = np.exp(-cfg.eps * grid.t)[None, :] * u_field + r_field
    return Field(grid, values)
