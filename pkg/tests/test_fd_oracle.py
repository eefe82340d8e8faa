import math

import numpy as np
import pytest

from layerlab.core import ConfigError, Grid, ProblemConfig
from layerlab.fd_oracle import FdScheme, fd_energy, fd_solve
from layerlab.reduced_wave import IbcData, solve_reduced

CFG = ProblemConfig(l=math.pi, c=1.0, eps=0.1)


def zeros(x):
    return np.zeros_like(x)


def test_zero_data_zero_field():
    grid = Grid(nx=51, nt=101, t_max=1.0)
    out = fd_solve(IbcData(f0=zeros, f1=zeros), CFG, FdScheme.from_grid(grid, CFG), grid)
    assert np.max(np.abs(out.values)) == 0.0


def test_scheme_rejects_bad_spacings():
    with pytest.raises(ConfigError):
        FdScheme(dx=0.0, dt=0.1)
    with pytest.raises(ConfigError):
        FdScheme(dx=0.1, dt=-0.1)


def test_scheme_grid_mismatch_rejected():
    grid = Grid(nx=51, nt=101, t_max=1.0)
    scheme = FdScheme(dx=grid.dx(CFG.l) * 2.0, dt=grid.dt)
    with pytest.raises(ConfigError, match="spacings"):
        fd_solve(IbcData(f0=zeros, f1=zeros), CFG, scheme, grid)


def test_cfl_violation_rejected():
    grid = Grid(nx=401, nt=11, t_max=10.0)  # dt = 1, dx ~ 0.0079
    with pytest.raises(ConfigError, match="CFL"):
        fd_solve(IbcData(f0=zeros, f1=zeros), CFG, FdScheme.from_grid(grid, CFG), grid)


def test_manufactured_solution_convergence():
    # u* = sin(x) e^{-t} solves the equation with f = (c^2 - eps + 1) u*
    cfg = ProblemConfig(l=math.pi, c=1.0, eps=0.2)
    factor = cfg.c ** 2 - cfg.eps + 1.0
    data = IbcData(
        f0=lambda x: np.sin(x),
        f1=lambda x: -np.sin(x),
        source=lambda x, t: factor * np.sin(x) * math.exp(-t),
    )
    errs = []
    for nx, nt in ((51, 101), (101, 201), (201, 401)):
        grid = Grid(nx=nx, nt=nt, t_max=1.0)
        out = fd_solve(data, cfg, FdScheme.from_grid(grid, cfg), grid)
        exact = np.outer(np.sin(grid.x(cfg.l)), np.exp(-grid.t))
        errs.append(np.max(np.abs(out.values - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.7)


def test_energy_nearly_conserved_without_damping():
    cfg = ProblemConfig(l=math.pi, c=1.0, eps=1e-12)
    data = IbcData(f0=lambda x: np.sin(x), f1=zeros)
    grid = Grid(nx=201, nt=801, t_max=4.0)
    out = fd_solve(data, cfg, FdScheme.from_grid(grid, cfg), grid)
    E = fd_energy(out, cfg)
    assert (E.max() - E.min()) / E[0] < 1e-3  # O(dt^2) drift only


def test_energy_monotone_with_damping():
    data = IbcData(f0=lambda x: np.sin(x) + 0.3 * np.sin(3 * x), f1=zeros)
    grid = Grid(nx=201, nt=801, t_max=4.0)
    out = fd_solve(data, CFG, FdScheme.from_grid(grid, CFG), grid)
    E = fd_energy(out, CFG)
    assert np.all(np.diff(E) <= 1e-8 * E[0])


def test_single_mode_decay_rate():
    # envelope of mode n decays like e^{-eps gamma_n^2 t / 2}
    cfg = ProblemConfig(l=math.pi, c=1.0, eps=0.2)
    data = IbcData(f0=lambda x: np.sin(x), f1=zeros)
    grid = Grid(nx=201, nt=3201, t_max=16.0)
    out = fd_solve(data, cfg, FdScheme.from_grid(grid, cfg), grid)
    E = fd_energy(out, cfg)
    # energy decays at twice the amplitude rate: 2 * (eps/2) * gamma_1^2
    slope = np.polyfit(grid.t, np.log(E), 1)[0]
    assert slope == pytest.approx(-cfg.eps * float(cfg.gamma_n(1)) ** 2, rel=0.02)


def test_fd_matches_spectral_solution():
    data = IbcData(
        f0=lambda x: np.sin(x) + 0.2 * np.sin(2 * x),
        f1=lambda x: 0.1 * np.sin(x),
    )
    grid = Grid(nx=201, nt=401, t_max=2.0)
    # eps = 0: the reduced spectral solver and the FD march solve the same PDE
    cfg0 = ProblemConfig(l=math.pi, c=1.0, eps=1e-14)
    fd = fd_solve(data, cfg0, FdScheme.from_grid(grid, cfg0), grid)
    spectral = solve_reduced(data, cfg0, grid, 8)
    diff = np.max(np.abs(fd.values - spectral.field().values))
    assert diff < 5e-4


def test_boundary_values_held():
    data = IbcData(
        f0=lambda x: 0.5 + (np.asarray(x) / math.pi) * (-0.2 - 0.5) + np.sin(x),
        f1=zeros,
        psi0=0.5,
        psi1=-0.2,
    )
    grid = Grid(nx=101, nt=201, t_max=1.0)
    out = fd_solve(data, CFG, FdScheme.from_grid(grid, CFG), grid)
    assert np.allclose(out.values[0, :], 0.5)
    assert np.allclose(out.values[-1, :], -0.2)


def test_incompatible_initial_data_rejected():
    data = IbcData(f0=lambda x: np.cos(x), f1=zeros)  # nonzero at x = 0, l
    grid = Grid(nx=101, nt=201, t_max=1.0)
    with pytest.raises(ConfigError, match="incompatible"):
        fd_solve(data, CFG, FdScheme.from_grid(grid, CFG), grid)
