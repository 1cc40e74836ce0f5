"""Radiative lifetimes from singlet-triplet mixing, and decay-curve fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class LifetimeModel:
    """Pure-state lifetimes in ns; band from varying both by the given
    fractional uncertainty (worst-case corners)."""

    tau_a6: float = 2.05
    tau_b5: float = 190.0
    fractional_uncertainty: float = 0.10

    def __post_init__(self):
        if self.tau_a6 <= 0 or self.tau_b5 <= 0:
            raise ValueError("lifetimes must be positive")


def predict_lifetime(f_b5: float, model: LifetimeModel | None = None):
    """(tau_ns, (tau_lo, tau_hi)) for a level with triplet fraction f_b5.

    1/tau = (1-f)/tau_A6 + f/tau_b5; the band evaluates the corners of the
    +/- fractional_uncertainty ranges of both input lifetimes.
    """
    model = model or LifetimeModel()
    if not 0.0 <= f_b5 <= 1.0:
        raise ValueError("mixing fraction must be in [0, 1]")

    def tau(ta, tb):
        return 1.0 / ((1.0 - f_b5) / ta + f_b5 / tb)

    t0 = tau(model.tau_a6, model.tau_b5)
    u = model.fractional_uncertainty
    corners = [
        tau(model.tau_a6 * (1 + sa * u), model.tau_b5 * (1 + sb * u))
        for sa in (-1.0, 1.0)
        for sb in (-1.0, 1.0)
    ]
    return t0, (min(corners), max(corners))


def lifetime_curve(model: LifetimeModel | None = None, num: int = 201):
    """(f, tau, tau_lo, tau_hi) arrays over f in [0, 1] (the summary plot)."""
    model = model or LifetimeModel()
    fs = np.linspace(0.0, 1.0, num)
    taus, los, his = [], [], []
    for f in fs:
        t, (lo, hi) = predict_lifetime(float(f), model)
        taus.append(t)
        los.append(lo)
        his.append(hi)
    return fs, np.array(taus), np.array(los), np.array(his)


def natural_linewidth(tau_ns: float) -> float:
    """Lorentzian FWHM in MHz: gamma = 1/(2 pi tau)."""
    if tau_ns <= 0:
        raise ValueError("lifetime must be positive")
    if math.isinf(tau_ns):
        return 0.0
    return 1e3 / (2.0 * math.pi * tau_ns)


def fit_exponential_decay(samples, p0=None):
    """Weighted fit of A exp(-t/tau) + baseline to (delay_ns, signal) pairs.

    Returns (tau_ns, sigma_tau_ns). Raises on flat data, non-convergence,
    or an unphysical (negative) decay constant.
    """
    import scipy.optimize

    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[0] < 5:
        raise ValueError("need at least 5 (delay, signal) samples")
    t, y = data[:, 0], data[:, 1]
    if np.ptp(y) <= 0 or np.ptp(y) < 0.05 * max(abs(y).max(), 1e-30):
        raise ValueError("no decay present in the samples")
    if p0 is None:
        y0, y1 = y[np.argmin(t)], y[np.argmax(t)]
        tau0 = max((t.max() - t.min()) / 3.0, 1e-3)
        p0 = [y0 - y1, tau0, y1]

    def decay(tt, a, tau, b):
        return a * np.exp(-tt / tau) + b

    try:
        popt, pcov = scipy.optimize.curve_fit(decay, t, y, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise RuntimeError("decay fit did not converge") from exc
    tau = float(popt[1])
    if tau <= 0:
        raise RuntimeError(f"unphysical decay constant {tau:.3g} ns")
    if (t.max() - t.min()) < tau:
        raise ValueError("samples span less than one decay constant")
    sigma = float(np.sqrt(np.abs(pcov[1, 1])))
    return tau, sigma
