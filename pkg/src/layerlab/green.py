"""Modal amplitudes and the Green-function sine series with certified truncation.

Each mode n responds like a damped oscillator h'' + eps*gamma_n^2 h' +
c^2 gamma_n^2 h = 0 with h(0)=0, h'(0)=1; the series kernel is
G(x, xi, t) = (2/l) * sum_n H_n(t) sin(gamma_n x) sin(gamma_n xi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ProblemConfig

# Relative width (in n/k) of the numerical neighborhood treated as critically
# damped; avoids catastrophic cancellation when n is very close to k.
TOL_CRIT = 1e-9


@dataclass(frozen=True)
class ModalAmplitude:
    """Classification of one mode's damped-oscillator response."""

    n: int
    regime: str  # "underdamped" | "critical" | "overdamped"
    damping: float  # a_n = b * n^2
    discriminant_root: float  # sqrt(|1 - (k/n)^2|)


def classify_mode(n: int, cfg: ProblemConfig, tol_crit: float = TOL_CRIT) -> ModalAmplitude:
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    k = cfg.k
    ratio = k / n
    if abs(n - k) <= tol_crit * k:
        regime, s = "critical", 0.0
    elif n < k:
        regime, s = "underdamped", math.sqrt(ratio * ratio - 1.0)
    else:
        regime, s = "overdamped", math.sqrt(1.0 - ratio * ratio)
    return ModalAmplitude(n=n, regime=regime, damping=cfg.damping(n), discriminant_root=s)


def _amplitude_arrays(n, t, cfg: ProblemConfig, tol_crit: float = TOL_CRIT):
    """Vectorized modal amplitude; n and t broadcast against each other."""
    n = np.asarray(n, dtype=float)
    t = np.asarray(t, dtype=float)
    n_b, t_b = np.broadcast_arrays(n, t)
    out = np.zeros(n_b.shape)
    a = cfg.b * n_b * n_b
    ratio = cfg.k / n_b

    crit = np.abs(n_b - cfg.k) <= tol_crit * cfg.k
    under = (n_b < cfg.k) & ~crit
    over = (n_b > cfg.k) & ~crit

    if np.any(crit):
        ac, tc = a[crit], t_b[crit]
        out[crit] = tc * np.exp(-ac * tc)
    if np.any(under):
        au, tu, ru = a[under], t_b[under], ratio[under]
        s = np.sqrt(ru * ru - 1.0)
        out[under] = np.exp(-au * tu) * np.sin(au * tu * s) / (au * s)
    if np.any(over):
        ao, to, ro = a[over], t_b[over], ratio[over]
        s = np.sqrt((1.0 - ro) * (1.0 + ro))
        # 1 - s computed as ratio^2/(1+s): stable for n >> k.
        one_minus_s = ro * ro / (1.0 + s)
        out[over] = np.exp(-ao * to * one_minus_s) * (-np.expm1(-2.0 * ao * to * s)) / (
            2.0 * ao * s
        )
    return out


def modal_amplitude(n: int, t, cfg: ProblemConfig, tol_crit: float = TOL_CRIT):
    """Impulse response of mode n at time(s) t.

    Underdamped (n < k): exp(-a t) sin(a t s)/(a s) with s = sqrt((k/n)^2 - 1);
    overdamped (n > k): the sinh analogue evaluated in a cancellation-free
    exponential form; within tol_crit of n = k: the limit t exp(-a t).
    Finite for arbitrarily large a*t.
    """
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    out = _amplitude_arrays(float(n), t, cfg, tol_crit)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out)
    return out


def truncation_bound(N: int, t: float, cfg: ProblemConfig) -> float:
    """Rigorous bound on the discarded overdamped tail (2/l) sum_{n>N} |H_n(t)|.

    Uses |H_n| <= exp(-c^2 t/eps) / (2 b n sqrt(n^2 - k^2)) and the integral
    comparison sum_{n>N} 1/(n sqrt(n^2-k^2)) <= arcsin(k/N)/k.  Decreasing in
    both N and t.
    """
    if t <= 0:
        raise ValueError(f"truncation bound requires t > 0, got {t}")
    k = cfg.k
    if N < math.ceil(k):
        raise ValueError(
            f"N = {N} must be >= ceil(k) = {math.ceil(k)}: oscillatory modes "
            "are never truncated"
        )
    decay = math.exp(-cfg.c ** 2 * t / cfg.eps)
    comparison = math.asin(min(1.0, k / N)) / k
    return (2.0 / cfg.l) * decay * comparison / (2.0 * cfg.b)


def _modes_for_tol(t: float, cfg: ProblemConfig, tol: float, n_max: int) -> int:
    """Smallest N (>= ceil(k)+1) whose certified tail at time t is < tol."""
    n0 = math.ceil(cfg.k) + 1
    pref = (2.0 / cfg.l) * math.exp(-cfg.c ** 2 * t / cfg.eps) / (2.0 * cfg.b * cfg.k)
    if pref * math.pi / 2.0 < tol:
        return n0
    target = tol / pref
    if target >= 1.0:
        return n0
    n = max(n0, math.ceil(cfg.k / math.sin(target)))
    return min(n, n_max)


def green_eval(
    x: float,
    xi: float,
    t: float,
    cfg: ProblemConfig,
    tol: float,
    n_max: int = 200_000_000,
) -> float:
    """Green function G(x, xi, t) summed until the certified tail is < tol.

    Oscillatory modes (n <= floor(k)) are always summed in full; the
    overdamped tail is truncated with the certificate of truncation_bound.
    Summation ascends in n with compensated accumulation.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0  # every term vanishes at t = 0
    N = _modes_for_tol(t, cfg, tol, n_max)
    chunk = 1_000_000
    partials = []
    for start in range(1, N + 1, chunk):
        ns = np.arange(start, min(start + chunk, N + 1))
        amps = _amplitude_arrays(ns, t, cfg)
        terms = amps * np.sin(cfg.gamma_n(ns) * x) * np.sin(cfg.gamma_n(ns) * xi)
        partials.append(math.fsum(terms))
    return (2.0 / cfg.l) * math.fsum(partials)
