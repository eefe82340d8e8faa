"""Closed-form envelope constants and certification of sampled quantities.

Implements the uniform bound on the Green series, the error-term envelope,
and the elementary inequalities both proofs rest on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, ExponentParams, ProblemConfig

ZETA2 = math.pi ** 2 / 6.0

# |k - round(k)| below this means k is treated as an integer, which switches
# the threshold offset beta to its integer-k prescription.
INTEGER_K_TOL = 1e-9


def _k_is_integer(cfg: ProblemConfig) -> bool:
    return abs(cfg.k - round(cfg.k)) < INTEGER_K_TOL


def threshold_offset(cfg: ProblemConfig, exps: ExponentParams) -> float:
    """Offset beta used in the oscillatory-block constant; 1 when k is integral."""
    return 1.0 if _k_is_integer(cfg) else exps.beta


def tail_offset(cfg: ProblemConfig, exps: ExponentParams) -> float:
    """Offset beta used in the overdamped-tail constant; 0 when k is integral."""
    return 0.0 if _k_is_integer(cfg) else exps.beta


def n_bar(cfg: ProblemConfig, exps: ExponentParams) -> float:
    """Split index 2cl/(pi eps^alpha) = k * eps^(1-alpha)."""
    return 2.0 * cfg.c * cfg.l / (math.pi * cfg.eps ** exps.alpha)


def oscillatory_root_lower_bound(cfg: ProblemConfig, exps: ExponentParams) -> float:
    """Lower bound on sqrt((k/n)^2 - 1) valid for 1 <= n <= floor(n_bar)."""
    e2 = cfg.eps ** (2.0 * (1.0 - exps.alpha))
    return math.sqrt(1.0 - e2) / cfg.eps ** (1.0 - exps.alpha)


def near_threshold_root_lower_bound(cfg: ProblemConfig, exps: ExponentParams) -> float:
    """Lower bound on sqrt((k/n)^2 - 1) for floor(n_bar)+1 <= n <= floor(k)."""
    beta = threshold_offset(cfg, exps)
    cl = cfg.c * cfg.l
    num = math.sqrt(math.pi * cfg.eps * beta) * math.sqrt(4.0 * cl - beta * math.pi * cfg.eps)
    return num / (2.0 * cl - math.pi * cfg.eps * beta)


@dataclass(frozen=True)
class GreenEnvelopeConstants:
    N_eps: float
    N1_eps: float
    C1_eps: float
    M_eps: float


@dataclass(frozen=True)
class ErrorEnvelopeConstants:
    Z: float
    Y: float
    W: float
    V: float
    U: float
    S: float
    A: float
    eta: float


@dataclass(frozen=True)
class EnvelopeReport:
    """Per-time comparison of a sampled maximum against its envelope."""

    t: np.ndarray
    sampled_max: np.ndarray
    envelope: np.ndarray
    margin_ratio: np.ndarray
    passed: bool


def certify(t, sampled_max, envelope, margin: float = 1.0) -> EnvelopeReport:
    t = np.asarray(t, dtype=float)
    sampled_max = np.asarray(sampled_max, dtype=float)
    envelope = np.asarray(envelope, dtype=float)
    ratio = sampled_max / envelope
    return EnvelopeReport(
        t=t,
        sampled_max=sampled_max,
        envelope=envelope,
        margin_ratio=ratio,
        passed=bool(np.all(ratio <= margin)),
    )


def green_envelope_constants(cfg: ProblemConfig, exps: ExponentParams) -> GreenEnvelopeConstants:
    """Constants N, N1, C1 and M = max{N1 eps^-3/2, C1 eps^-2}."""
    e2 = cfg.eps ** (2.0 * (1.0 - exps.alpha))
    if e2 >= 1.0:
        raise ConfigError(
            f"eps^(2(1-alpha)) = {e2} must be < 1: eps too large for the analysis"
        )
    q, l, c, eps = cfg.q, cfg.l, cfg.c, cfg.eps
    cl = c * l
    N = (2.0 * ZETA2 / (q * l)) / math.sqrt(1.0 - e2)

    b1 = threshold_offset(cfg, exps)
    N1 = (
        2.0
        * ZETA2
        * (2.0 * cl - math.pi * eps * b1)
        / (q * l * math.sqrt(math.pi * b1) * math.sqrt(4.0 * cl - b1 * math.pi * eps))
    )

    b2 = tail_offset(cfg, exps)
    C1 = (
        2.0
        * ZETA2
        * (cl + math.pi * eps * (1.0 - b2))
        / (q * l * math.pi * (1.0 - b2) * (4.0 * cl + math.pi * eps * (1.0 - b2)))
    )

    M = max(N1 * eps ** -1.5, C1 * eps ** -2.0)
    return GreenEnvelopeConstants(N_eps=N, N1_eps=N1, C1_eps=C1, M_eps=M)


def green_envelope(t, consts: GreenEnvelopeConstants, cfg: ProblemConfig, exps: ExponentParams):
    """Uniform bound N eps^-alpha e^{-q t eps} + M e^{-c^2 t / eps^(2 alpha - 1)}."""
    t = np.asarray(t, dtype=float)
    eps, a = cfg.eps, exps.alpha
    out = consts.N_eps * eps ** -a * np.exp(-cfg.q * t * eps) + consts.M_eps * np.exp(
        -cfg.c ** 2 * t / eps ** (2.0 * a - 1.0)
    )
    return float(out) if out.ndim == 0 else out


def error_envelope_constants(
    cfg: ProblemConfig, exps: ExponentParams, A: float
) -> ErrorEnvelopeConstants:
    """Constants Z, Y, W, V, U, S of the error-term envelope.

    A is the data-dependent sup bound computed from the reduced solution.
    """
    if A < 0:
        raise ValueError(f"A must be >= 0, got {A}")
    g = green_envelope_constants(cfg, exps)
    N, N1, C1 = g.N_eps, g.N1_eps, g.C1_eps
    d, gm = exps.delta, exps.gamma
    c2 = cfg.c ** 2
    Z = N / 2.0
    Y = max(2.0 * N, N1)
    W = N1 * (d / math.e) ** d
    V = C1 * ((1.0 + gm) / math.e) ** (1.0 + gm) / (1.0 - gm)
    U = 2.0 * cfg.q * cfg.eps * ZETA2 / c2 + C1 / c2 + cfg.eps / c2
    S = 2.0 * cfg.q * cfg.eps * ZETA2 / c2 + cfg.eps / c2
    return ErrorEnvelopeConstants(Z=Z, Y=Y, W=W, V=V, U=U, S=S, A=A, eta=exps.eta)


def error_envelope(t, consts: ErrorEnvelopeConstants, cfg: ProblemConfig, exps: ExponentParams):
    """Envelope A l eps^eta {t^2 Z + t Y + (t^(2-d)+t^(1-d)) W + t^(1-g) V}
    + A {U e^{-c^2 t/eps} + S}."""
    t = np.asarray(t, dtype=float)
    A, eta = consts.A, consts.eta
    d, gm = exps.delta, exps.gamma
    poly = (
        t ** 2 * consts.Z
        + t * consts.Y
        + (t ** (2.0 - d) + t ** (1.0 - d)) * consts.W
        + t ** (1.0 - gm) * consts.V
    )
    out = A * cfg.l * cfg.eps ** eta * poly + A * (
        consts.U * np.exp(-cfg.c ** 2 * t / cfg.eps) + consts.S
    )
    return float(out) if out.ndim == 0 else out


def exp_power_bound(a: float, x: float) -> tuple[float, float]:
    """Both sides of e^{-x} <= (a/(e x))^a; equality exactly at x = a."""
    if a <= 0 or x <= 0:
        raise ValueError(f"a and x must be positive, got a={a}, x={x}")
    return math.exp(-x), (a / (math.e * x)) ** a


def q_epsilon_horizon(cfg: ProblemConfig, exps: ExponentParams) -> float:
    """Time horizon eps^(-eta/2) of the expanding region Q_eps."""
    return cfg.eps ** (-exps.eta / 2.0)
