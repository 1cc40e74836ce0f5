"""Transition lists, Voigt spectra, and lineshape fitting.

Electric-dipole amplitudes connect the b3Sigma+ components of the upper
eigenvectors to the a3Pi lower state (the singlet A1Pi <- a3Pi moment is
spin-forbidden and set to zero); line strengths therefore scale with the
triplet fraction of the upper level times an angular factor obtained from
the eigenvector recoupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import wofz

from .angular import reduced_on_first, wigner3j
from .constants import CM1_TO_MHZ, TWICE_I_AL, TWICE_I_F
from .levels import Level
from .lifetimes import LifetimeModel, natural_linewidth, predict_lifetime

# Relative sign of the molecule-frame dipole element for the Lambda = -1
# component. Fixed by requiring E1 parity selection (+ <-> - only); the
# test suite guards it.
_DIPOLE_MIRROR_SIGN = -1.0


@dataclass
class Transition:
    """One allowed line; frequency in cm^-1, widths in MHz."""

    frequency: float
    upper: Level
    lower: Level
    strength: float
    lorentzian_width: float = 0.0
    gaussian_width: float = 0.0

    def __repr__(self):
        return (
            f"Transition({self.frequency:.4f} cm-1, S={self.strength:.3g}, "
            f"up F={self.upper.f}{'+' if self.upper.parity > 0 else '-'}"
            f"n{self.upper.n})"
        )


def _dipole_rj(ket_b, ket_a) -> float:
    """J-space reduced E1 element between b5 and a5 signed components."""
    total = 0.0
    for cb, tlb, tsb in ket_b.signed_components():
        om_b = tlb + tsb
        for ca, tla, tsa in ket_a.signed_components():
            if tsb != tsa or tla == 0:
                continue  # spin spectator; Pi component needed on the a side
            om_a = tla + tsa
            q2 = om_b - om_a
            if q2 != -tla:
                continue  # mol-frame dipole component q = -Lambda_a
            mu = 1.0 if tla > 0 else _DIPOLE_MIRROR_SIGN
            w = wigner3j(
                ket_b.j2 / 2.0, 1, ket_a.j2 / 2.0,
                -om_b / 2.0, q2 / 2.0, om_a / 2.0,
            )
            if w == 0.0:
                continue
            phase = -1.0 if round((ket_b.j2 - om_b) / 2.0) % 2 else 1.0
            total += (
                cb * ca * phase
                * math.sqrt((ket_b.j2 + 1.0) * (ket_a.j2 + 1.0)) * w * mu
            )
    return total


def _dipole_element(ku, kl) -> float:
    """F-level reduced E1 element between one upper and one lower ket."""
    if ku.state != "b5":
        return 0.0  # A1Pi <- a3Pi is spin-forbidden
    i1 = TWICE_I_AL / 2.0
    i2 = TWICE_I_F / 2.0
    rj = _dipole_rj(ku, kl)
    if rj == 0.0:
        return 0.0
    rf1 = reduced_on_first(
        ku.j2 / 2.0, kl.j2 / 2.0, i1, ku.f12 / 2.0, kl.f12 / 2.0, 1, rj
    )
    if rf1 == 0.0:
        return 0.0
    return reduced_on_first(
        ku.f12 / 2.0, kl.f12 / 2.0, i2, ku.f2 / 2.0, kl.f2 / 2.0, 1, rf1
    )


def dipole_reduced_matrix(kets_up, kets_low) -> np.ndarray:
    """Parameter-free matrix of F-level reduced E1 elements (cacheable)."""
    out = np.zeros((len(kets_up), len(kets_low)))
    for i, ku in enumerate(kets_up):
        for j, kl in enumerate(kets_low):
            out[i, j] = _dipole_element(ku, kl)
    return out


def transition_amplitude(upper: Level, lower: Level, reduced=None) -> float:
    """F-level reduced E1 amplitude <upper||T1(d)||lower> (relative units)."""
    if reduced is None:
        reduced = dipole_reduced_matrix(upper.kets, lower.kets)
    return float(upper.eigenvector @ reduced @ lower.eigenvector)


def line_strength(upper: Level, lower: Level, reduced=None) -> float:
    """|<u||T1(d)||l>|^2; zero unless parity flips and |dF| <= 1 (0 -/-> 0)."""
    if upper.parity == lower.parity:
        return 0.0
    if abs(upper.f.twice - lower.f.twice) > 2:
        return 0.0
    if upper.f.twice == 0 and lower.f.twice == 0:
        return 0.0
    return transition_amplitude(upper, lower, reduced) ** 2


def transition_list(
    upper_levels,
    lower_levels,
    lifetimes: LifetimeModel | None = None,
    doppler_fwhm_mhz: float = 70.0,
    emission_weight: bool = False,
    min_relative_strength: float = 0.0,
):
    """All selection-rule-allowed lines between two level sets.

    strength is the squared recoupled amplitude (triplet character in, per
    the b5 <- a5 moment); emission_weight additionally multiplies by the
    singlet fraction of the upper level to model UV LIF detection yield.
    """
    out = []
    for up in upper_levels:
        gam = (
            natural_linewidth(predict_lifetime(up.f_b5, lifetimes)[0])
            if lifetimes is not None
            else 0.0
        )
        for lo in lower_levels:
            s = line_strength(up, lo)
            if s <= 0.0:
                continue
            if emission_weight:
                s *= 1.0 - up.f_b5
            out.append(
                Transition(
                    frequency=(up.energy - lo.energy) / CM1_TO_MHZ,
                    upper=up,
                    lower=lo,
                    strength=s,
                    lorentzian_width=gam,
                    gaussian_width=doppler_fwhm_mhz,
                )
            )
    if out and min_relative_strength > 0.0:
        smax = max(t.strength for t in out)
        out = [t for t in out if t.strength >= min_relative_strength * smax]
    out.sort(key=lambda t: t.frequency)
    return out


# ---------------------------------------------------------------------------
# Lineshapes
# ---------------------------------------------------------------------------


def voigt_profile(nu_mhz, gaussian_fwhm, lorentzian_fwhm):
    """Area-normalized Voigt profile via the Faddeeva function (<=1e-6 rel)."""
    nu = np.asarray(nu_mhz, dtype=float)
    gl = max(lorentzian_fwhm, 0.0)
    gg = max(gaussian_fwhm, 0.0)
    if gg < 1e-9:
        hwhm = max(gl / 2.0, 1e-12)
        return (hwhm / math.pi) / (nu**2 + hwhm**2)
    sigma = gg / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    z = (nu + 1j * gl / 2.0) / (sigma * math.sqrt(2.0))
    return np.real(wofz(z)) / (sigma * math.sqrt(2.0 * math.pi))


def slit_doppler_kernel(gaussian_fwhm=70.0, block_fwhm=20.0, step_mhz=1.0):
    """Doppler profile restricted by a slit: Gaussian times block function."""
    half = max(gaussian_fwhm, block_fwhm) * 3.0
    x = np.arange(-half, half + step_mhz, step_mhz)
    sigma = gaussian_fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    g = np.exp(-0.5 * (x / sigma) ** 2)
    g[np.abs(x) > block_fwhm / 2.0] = 0.0
    area = np.trapezoid(g, x)
    return x, g / area


def slit_mode_profile(nu_mhz, lorentzian_fwhm, gaussian_fwhm=70.0,
                      block_fwhm=20.0, step_mhz=1.0):
    """Lorentzian convolved numerically with the slit-restricted Doppler."""
    nu = np.asarray(nu_mhz, dtype=float)
    xk, kern = slit_doppler_kernel(gaussian_fwhm, block_fwhm, step_mhz)
    lo = nu.min() - xk.max()
    hi = nu.max() - xk.min()
    grid = np.arange(lo, hi + step_mhz, step_mhz)
    hwhm = max(lorentzian_fwhm / 2.0, 1e-9)
    lor = (hwhm / math.pi) / (grid**2 + hwhm**2)
    conv = np.convolve(lor, kern, mode="same") * step_mhz
    return np.interp(nu, grid, conv)


def simulate_spectrum(lines, grid_cm1, doppler_fwhm_mhz=70.0, slit_mode=False):
    """Sum of Voigt (or slit-mode) profiles on a sorted cm^-1 grid.

    Lorentzian widths are taken from each line (natural width of the upper
    level); the Gaussian width is the Doppler argument unless slit_mode
    replaces it with the 70 MHz x 20 MHz block kernel.
    """
    grid = np.asarray(grid_cm1, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    out = np.zeros_like(grid)
    for line in lines:
        d_mhz = (grid - line.frequency) * CM1_TO_MHZ
        if slit_mode:
            out += line.strength * slit_mode_profile(d_mhz, line.lorentzian_width)
        else:
            out += line.strength * voigt_profile(
                d_mhz, doppler_fwhm_mhz, line.lorentzian_width
            )
    return out


@dataclass
class LineshapeFit:
    """Result of a single-line profile fit (center in cm^-1, widths MHz)."""

    center: float
    gaussian_fwhm: float
    lorentzian_fwhm: float
    center_uncertainty_mhz: float
    amplitude: float
    offset: float
    model: str = "voigt"

    @property
    def lifetime_ns(self) -> float:
        if self.lorentzian_fwhm <= 0:
            return float("inf")
        return 1e3 / (2.0 * math.pi * self.lorentzian_fwhm)


def fit_lineshape(scan, model="voigt", p0=None):
    """Least-squares Voigt or slit-mode-Lorentzian fit to one scanned line.

    scan: (nu_cm1, intensity) array-like. The scan must cover at least
    three linewidths; non-convergence raises with residual diagnostics.
    """
    import scipy.optimize

    scan = np.asarray(scan, dtype=float)
    nu, inten = scan[:, 0], scan[:, 1]
    span_mhz = (nu.max() - nu.min()) * CM1_TO_MHZ
    if np.ptp(inten) <= 0 or span_mhz <= 0:
        raise ValueError("flat or empty scan")
    if p0 is None:
        c0 = float(nu[np.argmax(inten)])
        p0 = [c0, 70.0, 30.0, float(np.ptp(inten)), float(inten.min())]
    c0, g0, l0, a0, b0 = p0
    if span_mhz < 3.0 * max(g0, l0, 1.0):
        raise ValueError("scan narrower than three linewidths")

    if model == "voigt":
        def profile(x, c, gg, gl, a, b):
            return a * voigt_profile((x - c) * CM1_TO_MHZ, abs(gg), abs(gl)) + b
    elif model == "slit":
        def profile(x, c, gg, gl, a, b):
            return a * slit_mode_profile((x - c) * CM1_TO_MHZ, abs(gl), abs(gg)) + b
    else:
        raise ValueError(f"unknown lineshape model {model!r}")

    try:
        popt, pcov = scipy.optimize.curve_fit(
            profile, nu, inten, p0=[c0, g0, l0, a0, b0], maxfev=20000
        )
    except RuntimeError as exc:
        resid = inten - profile(nu, *p0)
        raise RuntimeError(
            f"lineshape fit did not converge (rms residual "
            f"{np.sqrt(np.mean(resid**2)):.3g})"
        ) from exc
    perr = np.sqrt(np.abs(np.diag(pcov)))
    return LineshapeFit(
        center=float(popt[0]),
        gaussian_fwhm=abs(float(popt[1])),
        lorentzian_fwhm=abs(float(popt[2])),
        center_uncertainty_mhz=float(perr[0]) * CM1_TO_MHZ,
        amplitude=float(popt[3]),
        offset=float(popt[4]),
        model=model,
    )
