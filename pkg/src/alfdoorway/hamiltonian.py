"""Parity/F-blocked effective Hamiltonians for the coupled AlF states.

Builds hyperfine-resolved matrices for A1Pi(v=6), b3Sigma+(v=5), their
spin-orbit coupling, and the lower a3Pi(v=5) state in a single
parity-adapted Hund's case (a) basis |Lambda, S, Sigma; J, Omega; F1; F, p>
with sequential nuclear coupling J + I(Al) = F1, F1 + I(F) = F.

Internal unit is MHz throughout. All parameters enter the matrix linearly,
so each (F, parity) block is represented once by per-parameter coefficient
matrices; evaluating or differentiating the Hamiltonian is then a sum.

Conventions (documented because the cited v=0 analyses do not reprint them):
  * rotation      B [(J^2-Jz^2) + (S^2-Sz^2) - (J+S- + J-S+)]; for the
                  singlet Pi state the diagonal is taken as B*J(J+1) with
                  the constant B*Lambda^2 absorbed into the origin, so
                  E(A, J) = T + B J(J+1) - D [J(J+1)]^2 at zero coupling.
  * spin-spin     (2/3) lambda (3 Sz^2 - S^2)
  * spin-rotation gamma (J.S - S^2)
  * spin-orbit    A Lambda Sigma (a3Pi ladder)
  * Lambda-doubling  o,p,q in the Brown-Merer operator form
                  (o+p+q)/2 (S+^2 + S-^2) - (p+2q)/2 (J+S+ + J-S-)
                  + q/2 (J+^2 + J-^2), attached to Delta Lambda = -/+ 2.
  * hyperfine     a Lambda Iz + bF I.S + c/3 (3 Iz Sz - I.S) per nucleus,
                  quadrupole normalized to the Casimir closed form for the
                  eq0Q term, with the Delta Lambda = 2 element carrying
                  eq2Q/(2 sqrt 6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .angular import (
    HalfInt,
    quadrupole_reduced,
    reduced_on_first,
    scalar_product_element,
    spin_reduced,
    wigner3j,
)
from .constants import CM1_TO_MHZ, TWICE_I_AL, TWICE_I_F

# Sign of all Delta Lambda = +/-2 parity contributions (Lambda doubling and
# eq2Q) relative to the sigma_v phase (-1)^(J-Omega+S-Sigma) used for the
# parity-adapted kets. Resolved against the measured line list: this choice
# makes the 3Pi0 e-levels shift by -(o+p+q), so the fitted Lambda-doubling
# constant composes into A - 2*lambda + (o+p+q) exactly as reported.
LAMBDA_DOUBLING_SIGN = -1.0


@dataclass(frozen=True)
class ElectronicState:
    """Electronic-vibrational state descriptor: |Lambda| and 2S."""

    tag: str
    lam: int
    s2: int


A6 = ElectronicState("A6", 1, 0)
B5 = ElectronicState("b5", 0, 2)
A5 = ElectronicState("a5", 1, 2)

_STATES = {s.tag: s for s in (A6, B5, A5)}

# Parameter attribute names carried by StateParams, in file order.
STATE_PARAM_NAMES = (
    "t",
    "b",
    "d",
    "a_so",
    "lam_ss",
    "gamma_sr",
    "o",
    "p",
    "q",
    "a_al",
    "bf_al",
    "c_al",
    "d_al",
    "eq0q_al",
    "eq2q_al",
    "a_f",
    "bf_f",
    "c_f",
    "d_f",
)


@dataclass
class StateParams:
    """Spectroscopic constants of one state, all in MHz.

    Free/fixed bookkeeping for fitting lives in `free`, a set of attribute
    names; everything else is treated as fixed.
    """

    state: ElectronicState
    t: float = 0.0
    b: float = 0.0
    d: float = 0.0
    a_so: float = 0.0
    lam_ss: float = 0.0
    gamma_sr: float = 0.0
    o: float = 0.0
    p: float = 0.0
    q: float = 0.0
    a_al: float = 0.0
    bf_al: float = 0.0
    c_al: float = 0.0
    d_al: float = 0.0
    eq0q_al: float = 0.0
    eq2q_al: float = 0.0
    a_f: float = 0.0
    bf_f: float = 0.0
    c_f: float = 0.0
    d_f: float = 0.0
    free: set = field(default_factory=set)

    def __post_init__(self):
        if self.b < 0:
            raise ValueError(f"{self.state.tag}: rotational constant must be > 0")

    def copy(self) -> "StateParams":
        return replace(self, free=set(self.free))


@dataclass
class CouplingParams:
    """Spin-orbit interaction between A6 and b5.

    xi_65 in MHz (reported in cm^-1, 1 cm^-1 = 29979.2458 MHz exactly);
    delta_e is the unperturbed A(v=6) - b(v=5) origin separation in MHz,
    used by the bare two/three-level constructors.
    """

    xi_65: float = 0.0
    delta_e: float = 0.0
    free: set = field(default_factory=set)

    @property
    def xi_cm1(self) -> float:
        return self.xi_65 / CM1_TO_MHZ


@dataclass(frozen=True)
class BasisKet:
    """One parity-adapted case (a) basis vector.

    lam/sigma2 describe the canonical signed component (Lambda >= 0 and,
    for Sigma states, Sigma >= 0); the mirror component has both signs
    flipped with a phase fixed by the parity eigenvalue.
    Twice-values keep half-integers exact.
    """

    state: str
    lam: int
    s2: int
    sigma2: int
    j2: int
    f12: int
    f2: int
    parity: int

    @property
    def omega2(self) -> int:
        return 2 * self.lam + self.sigma2

    @property
    def j(self) -> HalfInt:
        return HalfInt.from_twice(self.j2)

    @property
    def f1(self) -> HalfInt:
        return HalfInt.from_twice(self.f12)

    @property
    def f(self) -> HalfInt:
        return HalfInt.from_twice(self.f2)

    @property
    def omega(self) -> HalfInt:
        return HalfInt.from_twice(self.omega2)

    @property
    def sigma(self) -> HalfInt:
        return HalfInt.from_twice(self.sigma2)

    def signed_components(self):
        """(coefficient, 2*Lambda, 2*Sigma) pairs of the parity combination."""
        tl, ts = 2 * self.lam, self.sigma2
        if tl == 0 and ts == 0:
            return [(1.0, 0, 0)]
        s = self.parity * _sigma_v_phase(self.j2, self.omega2, self.s2, self.sigma2)
        r = 1.0 / math.sqrt(2.0)
        return [(r, tl, ts), (s * r, -tl, -ts)]

    def label(self) -> str:
        return (
            f"{self.state}(J={self.j} Om={self.omega} F1={self.f1} "
            f"F={self.f} {'+' if self.parity > 0 else '-'})"
        )


def _sigma_v_phase(j2, omega2, s2, sigma2) -> int:
    exp2 = j2 - omega2 + s2 - sigma2
    if exp2 % 2:
        raise ValueError("parity phase exponent is not an integer")
    return -1 if (exp2 // 2) % 2 else 1


def state_exists_parity(state: ElectronicState, j2: int, sigma2: int, parity: int) -> bool:
    """Whether the (J, Sigma) combination supports a ket of this parity."""
    if state.lam == 0 and sigma2 == 0:
        return _sigma_v_phase(j2, 0, state.s2, 0) == parity
    return True


def build_basis(system, f, parity, n_max: int = 8, i1_2: int = TWICE_I_AL, i2_2: int = TWICE_I_F):
    """Complete, duplicate-free, deterministically ordered ket list.

    system: iterable of ElectronicState (e.g. (A6, B5) or (A5,)) or one of
    the strings "A6+b5" / "a5". n_max bounds the rotational ladder
    (J <= n_max + 1). Returns [] when no ket carries this F and parity.
    """
    if isinstance(system, str):
        system = {"A6+b5": (A6, B5), "a5": (A5,)}[system.replace(" ", "")]
    f2 = HalfInt(f).twice
    parity = 1 if parity in (1, "+", "+1") else -1
    j2_max = 2 * (n_max + 1)
    kets = []
    for state in system:
        for j2 in range(state.s2 % 2, j2_max + 1, 2):
            for f12 in range(abs(j2 - i1_2), j2 + i1_2 + 1, 2):
                if not (abs(f12 - i2_2) <= f2 <= f12 + i2_2):
                    continue
                for sigma2 in range(-state.s2, state.s2 + 1, 2):
                    if state.lam == 0 and sigma2 < 0:
                        continue  # canonical component has Sigma >= 0
                    omega2 = 2 * state.lam + sigma2
                    if abs(omega2) > j2:
                        continue
                    if not state_exists_parity(state, j2, sigma2, parity):
                        continue
                    kets.append(
                        BasisKet(
                            state=state.tag,
                            lam=state.lam,
                            s2=state.s2,
                            sigma2=sigma2,
                            j2=j2,
                            f12=f12,
                            f2=f2,
                            parity=parity,
                        )
                    )
    order = {state.tag: i for i, state in enumerate(system)}
    kets.sort(key=lambda k: (order[k.state], k.j2, k.f12, k.omega2, k.sigma2))
    return kets


# ---------------------------------------------------------------------------
# Signed-basis matrix elements (within one state, diagonal in J/F1/F).
# Components are (2*Lambda, 2*Sigma); x = J(J+1).
# ---------------------------------------------------------------------------


def _ladder_j(x, om):
    v = x - om * (om - 1)
    return math.sqrt(v) if v > 0 else 0.0


def _ladder_s(s, sig):
    v = s * (s + 1) - sig * (sig + 1)
    return math.sqrt(v) if v > 0 else 0.0


def _fine_structure_coeffs(state: ElectronicState, j2, ci, cj):
    """{param_name: coefficient} between two signed components, same J."""
    tli, tsi = ci
    tlj, tsj = cj
    s = state.s2 / 2.0
    x = (j2 / 2.0) * (j2 / 2.0 + 1.0)
    li, si_ = tli / 2.0, tsi / 2.0
    lj, sj_ = tlj / 2.0, tsj / 2.0
    omi, omj = li + si_, lj + sj_
    out = {}

    if ci == cj:
        out["t"] = 1.0
        if state.s2 == 0:
            # singlet Pi convention: B J(J+1), Lambda^2 absorbed in T
            out["b"] = x
            out["d"] = -(x * x)
        else:
            out["b"] = x - omj * omj + s * (s + 1.0) - sj_ * sj_
        out["a_so"] = lj * sj_
        out["lam_ss"] = (2.0 / 3.0) * (3.0 * sj_ * sj_ - s * (s + 1.0))
        out["gamma_sr"] = omj * sj_ - s * (s + 1.0)

    if tli == tlj and state.s2 > 0:
        # Delta Sigma = Delta Omega = +/-1: -2B (J.S ladder) + gamma (J.S ladder)
        if tsi == tsj + 2:  # <Sigma+1, Omega+1| ... J- S+ ...
            lad = 0.5 * _ladder_j(x, omj + 1) * _ladder_s(s, sj_)
            out["b"] = out.get("b", 0.0) - 2.0 * lad
            out["gamma_sr"] = out.get("gamma_sr", 0.0) + lad
        elif tsi == tsj - 2:  # <Sigma-1, Omega-1| ... J+ S- ...
            lad = 0.5 * _ladder_j(x, omj) * _ladder_s(s, sj_ - 1.0)
            out["b"] = out.get("b", 0.0) - 2.0 * lad
            out["gamma_sr"] = out.get("gamma_sr", 0.0) + lad

    if tli == tlj - 4 or tli == tlj + 4:
        _lambda_doubling_coeffs(out, s, x, tsi, tsj, omi, omj, tli < tlj)

    return out


def _lambda_doubling_coeffs(out, s, x, tsi, tsj, omi, omj, lowering):
    """Brown-Merer Lambda-doubling terms for Delta Lambda = -/+2."""
    sj_ = tsj / 2.0
    g = LAMBDA_DOUBLING_SIGN
    if lowering:  # Lambda_i = Lambda_j - 2: pairs with S+^2, J+S+, J+^2
        if tsi == tsj + 4:
            v = 0.5 * _ladder_s(s, sj_) * _ladder_s(s, sj_ + 1.0) * g
            out["o"] = out.get("o", 0.0) + v
            out["p"] = out.get("p", 0.0) + v
            out["q"] = out.get("q", 0.0) + v
        elif tsi == tsj + 2 and abs(omi - (omj - 1.0)) < 1e-9:
            v = 0.5 * _ladder_j(x, omj) * _ladder_s(s, sj_) * g
            out["p"] = out.get("p", 0.0) - v
            out["q"] = out.get("q", 0.0) - 2.0 * v
        elif tsi == tsj and abs(omi - (omj - 2.0)) < 1e-9:
            v = 0.5 * _ladder_j(x, omj) * _ladder_j(x, omj - 1.0) * g
            out["q"] = out.get("q", 0.0) + v
    else:  # Lambda_i = Lambda_j + 2: S-^2, J-S-, J-^2
        if tsi == tsj - 4:
            v = 0.5 * _ladder_s(s, sj_ - 1.0) * _ladder_s(s, sj_ - 2.0) * g
            out["o"] = out.get("o", 0.0) + v
            out["p"] = out.get("p", 0.0) + v
            out["q"] = out.get("q", 0.0) + v
        elif tsi == tsj - 2 and abs(omi - (omj + 1.0)) < 1e-9:
            v = 0.5 * _ladder_j(x, omj + 1.0) * _ladder_s(s, sj_ - 1.0) * g
            out["p"] = out.get("p", 0.0) - v
            out["q"] = out.get("q", 0.0) - 2.0 * v
        elif tsi == tsj and abs(omi - (omj + 2.0)) < 1e-9:
            v = 0.5 * _ladder_j(x, omj + 1.0) * _ladder_j(x, omj + 2.0) * g
            out["q"] = out.get("q", 0.0) + v


# ---------------------------------------------------------------------------
# Hyperfine: rank-k electronic/rotational tensors coupled to each nuclear
# spin through the sequential scheme. Electronic mol-frame elements are
# returned per constant so every parameter stays linear.
# ---------------------------------------------------------------------------


def _spin_t1(s2, tsp, ts, q2) -> float:
    """<S Sigma'|T^1_q(S)|S Sigma> in the molecule frame."""
    s = s2 / 2.0
    w = wigner3j(s, 1, s, -tsp / 2.0, q2 / 2.0, ts / 2.0)
    if w == 0.0:
        return 0.0
    phase = -1.0 if round(s - tsp / 2.0) % 2 else 1.0
    return phase * w * spin_reduced(s)


def _magnetic_mol_elements(state, ci, cj):
    """{(param, q2): value} of T^1 mol-frame elements between components."""
    tli, tsi = ci
    tlj, tsj = cj
    out = {}
    if tli == tlj:
        lamj = tlj / 2.0
        if tsi == tsj:
            out[("a", 0)] = lamj
        if state.s2 > 0:
            for q2 in (-2, 0, 2):
                if tsi != tsj + q2:
                    continue
                t1 = _spin_t1(state.s2, tsi, tsj, q2)
                if t1 == 0.0:
                    continue
                if q2 == 0:
                    out[("bf", 0)] = out.get(("bf", 0), 0.0) + t1
                    out[("c", 0)] = out.get(("c", 0), 0.0) + (2.0 / 3.0) * t1
                else:
                    out[("bf", q2)] = t1
                    out[("c", q2)] = -(1.0 / 3.0) * t1
    elif state.s2 > 0 and abs(tli - tlj) == 4:
        # Delta Lambda = -/+2 hyperfine (d-term): pairs with S+/- so the
        # space tensor component is q = -/+1
        s = state.s2 / 2.0
        sj_ = tsj / 2.0
        if tli == tlj - 4 and tsi == tsj + 2:
            out[("d", -2)] = 0.5 * _ladder_s(s, sj_) * LAMBDA_DOUBLING_SIGN
        elif tli == tlj + 4 and tsi == tsj - 2:
            out[("d", 2)] = 0.5 * _ladder_s(s, sj_ - 1.0) * LAMBDA_DOUBLING_SIGN
    return out


def _quadrupole_mol_elements(ci, cj):
    """{(param, q2): value} of T^2(grad E) elements, params eq0q/eq2q."""
    tli, tsi = ci
    tlj, tsj = cj
    out = {}
    if tsi != tsj:
        return out
    # Sign pinned to the Casimir closed form E_Q = -eqQ [3/4 C(C+1) - ...]
    # for a 1Sigma rotor, the convention the eqQ literature values assume.
    if tli == tlj:
        out[("eq0q", 0)] = 0.5
    elif abs(tli - tlj) == 4:
        q2 = tli - tlj  # 2*(Lambda_i - Lambda_j) = 2*q
        out[("eq2q", q2)] = LAMBDA_DOUBLING_SIGN / (2.0 * math.sqrt(6.0))
    return out


def _rj_reduced(j2p, om2p, j2, om2, k, emol) -> float:
    """J-space reduced element of a molecule-frame rank-k tensor."""
    q = (om2p - om2) / 2.0
    w = wigner3j(j2p / 2.0, k, j2 / 2.0, -om2p / 2.0, q, om2 / 2.0)
    if w == 0.0:
        return 0.0
    phase = -1.0 if round((j2p - om2p) / 2.0) % 2 else 1.0
    return phase * math.sqrt((j2p + 1.0) * (j2 + 1.0)) * w * emol


def _hyperfine_coeffs(state, keti: BasisKet, ketj: BasisKet, i1_2, i2_2):
    """{param_name: coefficient} of all hyperfine terms between two kets."""
    out = {}
    i1 = i1_2 / 2.0
    i2 = i2_2 / 2.0
    f1p, f1 = keti.f12 / 2.0, ketj.f12 / 2.0
    f = ketj.f2 / 2.0
    jp2, j2 = keti.j2, ketj.j2

    red_i1 = spin_reduced(i1) if i1_2 > 0 else 0.0
    red_i2 = spin_reduced(i2) if i2_2 > 0 else 0.0
    red_q1 = quadrupole_reduced(i1)

    for coef_i, tli, tsi in keti.signed_components():
        om2i = tli + tsi
        for coef_j, tlj, tsj in ketj.signed_components():
            om2j = tlj + tsj
            w = coef_i * coef_j
            mag = _magnetic_mol_elements(state, (tli, tsi), (tlj, tsj))
            for (kind, q2), emol in mag.items():
                rj = _rj_reduced(jp2, om2i, j2, om2j, 1, emol)
                if rj == 0.0:
                    continue
                # nucleus 1 (Al): scalar within F1
                if keti.f12 == ketj.f12 and red_i1:
                    v1 = scalar_product_element(
                        jp2 / 2.0, i1, j2 / 2.0, i1, f1, 1, rj, red_i1
                    )
                    _add(out, f"{kind}_al", w * v1)
                # nucleus 2 (F)
                if red_i2:
                    rf1 = reduced_on_first(jp2 / 2.0, j2 / 2.0, i1, f1p, f1, 1, rj)
                    if rf1 != 0.0:
                        v2 = scalar_product_element(f1p, i2, f1, i2, f, 1, rf1, red_i2)
                        _add(out, f"{kind}_f", w * v2)
            if red_q1:
                quad = _quadrupole_mol_elements((tli, tsi), (tlj, tsj))
                for (kind, q2), emol in quad.items():
                    if keti.f12 != ketj.f12:
                        continue
                    rj = _rj_reduced(jp2, om2i, j2, om2j, 2, emol)
                    if rj == 0.0:
                        continue
                    v1 = scalar_product_element(
                        jp2 / 2.0, i1, j2 / 2.0, i1, f1, 2, rj, red_q1
                    )
                    _add(out, f"{kind}_al", w * v1)
    return out


def _add(d, key, val):
    if val != 0.0:
        d[key] = d.get(key, 0.0) + val


# ---------------------------------------------------------------------------
# Public element-level operations.
# ---------------------------------------------------------------------------


def element_coefficients(keti: BasisKet, ketj: BasisKet, i1_2=TWICE_I_AL, i2_2=TWICE_I_F):
    """All within-state parameter coefficients between two basis kets.

    Returns {} between kets of different states (the coupling operator is
    handled by spin_orbit_coupling). Keys are StateParams attribute names.
    """
    if keti.state != ketj.state or keti.parity != ketj.parity or keti.f2 != ketj.f2:
        return {}
    state = _STATES.get(keti.state) or ElectronicState(keti.state, keti.lam, keti.s2)
    out = {}
    if keti.j2 == ketj.j2 and keti.f12 == ketj.f12:
        for coef_i, tli, tsi in keti.signed_components():
            for coef_j, tlj, tsj in ketj.signed_components():
                fs = _fine_structure_coeffs(state, ketj.j2, (tli, tsi), (tlj, tsj))
                for key, val in fs.items():
                    _add(out, key, coef_i * coef_j * val)
    hf = _hyperfine_coeffs(state, keti, ketj, i1_2, i2_2)
    for key, val in hf.items():
        _add(out, key, val)
    return out


def rotational_and_fine_structure(keti: BasisKet, ketj: BasisKet, params: StateParams) -> float:
    """Origin + rotation + centrifugal + spin-orbit + spin-spin +
    spin-rotation + Lambda-doubling matrix element, MHz."""
    if keti.state != ketj.state:
        raise ValueError("kets must belong to the same state")
    coeffs = element_coefficients(keti, ketj)
    fine = ("t", "b", "d", "a_so", "lam_ss", "gamma_sr", "o", "p", "q")
    return sum(coeffs.get(k, 0.0) * getattr(params, k) for k in fine)


def hyperfine(keti: BasisKet, ketj: BasisKet, params: StateParams) -> float:
    """Magnetic + quadrupole hyperfine matrix element, MHz."""
    if keti.state != ketj.state:
        raise ValueError("kets must belong to the same state")
    if keti.f2 != ketj.f2 or keti.parity != ketj.parity:
        raise ValueError("kets must share F and parity")
    coeffs = element_coefficients(keti, ketj)
    hf = (
        "a_al", "bf_al", "c_al", "d_al", "eq0q_al", "eq2q_al",
        "a_f", "bf_f", "c_f", "d_f",
    )
    return sum(coeffs.get(k, 0.0) * getattr(params, k) for k in hf)


def spin_orbit_coupling(ket_a: BasisKet, ket_b: BasisKet, xi: float) -> float:
    """A1Pi ~ b3Sigma+ spin-orbit element in MHz for interaction constant xi.

    Nonzero only between kets sharing J, F1, F and parity, with one ket in
    each state; the signed-component element is -xi/sqrt(2), which
    reproduces the e-level 2x2 and f-level 3x3 perturbation matrices.
    """
    pair = {ket_a.state, ket_b.state}
    if pair != {"A6", "b5"}:
        return 0.0
    if ket_a.state != "A6":
        ket_a, ket_b = ket_b, ket_a
    if (
        ket_a.j2 != ket_b.j2
        or ket_a.f12 != ket_b.f12
        or ket_a.f2 != ket_b.f2
        or ket_a.parity != ket_b.parity
    ):
        return 0.0
    total = 0.0
    for ca, tla, tsa in ket_a.signed_components():
        for cb, tlb, tsb in ket_b.signed_components():
            # <b, Lambda=0, Sigma=+/-1 | H_SO | A, Lambda=+/-1, Sigma=0>
            if tlb == 0 and tsa == 0 and tsb == tla:
                total += ca * cb * (-xi / math.sqrt(2.0))
    return total


@dataclass
class HamiltonianBlock:
    """One (F, parity) block: kets, evaluated matrix, parameter matrices.

    param_matrices holds one coefficient matrix per "<state>.<param>" key
    (plus "coupling.xi"), so H = sum_k value_k * M_k exactly.
    """

    f: HalfInt
    parity: int
    kets: list
    matrix: np.ndarray
    param_matrices: dict

    @property
    def dim(self) -> int:
        return len(self.kets)

    def evaluate(self, values: dict) -> np.ndarray:
        h = np.zeros((self.dim, self.dim))
        for key, mat in self.param_matrices.items():
            v = values.get(key, 0.0)
            if v:
                h += v * mat
        return h


def block_param_matrices(kets, i1_2=TWICE_I_AL, i2_2=TWICE_I_F):
    """Per-parameter coefficient matrices for a ket list (symmetric)."""
    n = len(kets)
    mats: dict = {}

    def mat(key):
        if key not in mats:
            mats[key] = np.zeros((n, n))
        return mats[key]

    for i in range(n):
        for j in range(i, n):
            ki, kj = kets[i], kets[j]
            if ki.state == kj.state:
                for key, val in element_coefficients(ki, kj, i1_2, i2_2).items():
                    m = mat(f"{ki.state}.{key}")
                    m[i, j] = val
                    m[j, i] = val
            else:
                v = spin_orbit_coupling(ki, kj, 1.0)
                if v != 0.0:
                    m = mat("coupling.xi")
                    m[i, j] = v
                    m[j, i] = v
    return mats


def params_to_values(params_by_state, coupling: CouplingParams | None = None) -> dict:
    """Flatten StateParams/CouplingParams into {"tag.attr": value}."""
    values = {}
    for sp in params_by_state:
        for name in STATE_PARAM_NAMES:
            values[f"{sp.state.tag}.{name}"] = getattr(sp, name)
    if coupling is not None:
        values["coupling.xi"] = coupling.xi_65
    return values


def assemble_block(
    system,
    f,
    parity,
    params_a: StateParams | None = None,
    params_b: StateParams | None = None,
    coupling: CouplingParams | None = None,
    n_max: int = 8,
) -> HamiltonianBlock:
    """Symmetric (F, parity) Hamiltonian block in MHz.

    system "A6+b5" takes params_a for the Pi state and params_b for the
    Sigma state; system "a5" takes params_a alone.
    """
    sps = [p for p in (params_a, params_b) if p is not None]
    for sp in sps:
        for name in STATE_PARAM_NAMES:
            if not np.isfinite(getattr(sp, name)):
                raise ValueError(f"non-finite parameter {sp.state.tag}.{name}")
    if coupling is not None and not np.isfinite(coupling.xi_65):
        raise ValueError("non-finite coupling parameter xi")
    kets = build_basis(system, f, parity, n_max=n_max)
    mats = block_param_matrices(kets)
    values = params_to_values(sps, coupling)
    dim = len(kets)
    h = np.zeros((dim, dim))
    for key, m in mats.items():
        v = values.get(key, 0.0)
        if v:
            h += v * m
    block = HamiltonianBlock(
        f=HalfInt(f), parity=1 if parity in (1, "+", "+1") else -1,
        kets=kets, matrix=h, param_matrices=mats,
    )
    asym = float(np.max(np.abs(h - h.T))) if dim else 0.0
    if asym > 1e-6:
        raise AssertionError(f"block F={f} p={parity} asymmetric by {asym} MHz")
    return block


def perturbation_2x2(e_a: float, e_b: float, xi: float) -> np.ndarray:
    """Bare e-level interaction matrix [[E_A, -xi/sqrt2], [-xi/sqrt2, E_b]]."""
    v = -xi / math.sqrt(2.0)
    return np.array([[e_a, v], [v, e_b]])


def perturbation_3x3(e_a: float, e_b1: float, e_b3: float, xi: float, j: int) -> np.ndarray:
    """Bare f-level interaction matrix between A(J) and the b F1/F3 levels."""
    x = j
    c1 = math.sqrt((x + 1.0) / (4.0 * x + 2.0)) * xi
    c3 = math.sqrt(x / (4.0 * x + 2.0)) * xi
    return np.array(
        [
            [e_a, c1, c3],
            [c1, e_b1, 0.0],
            [c3, 0.0, e_b3],
        ]
    )
