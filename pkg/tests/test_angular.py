"""Wigner symbols and recoupling formulas against independent oracles."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alfdoorway.angular import (
    HalfInt,
    clebsch_gordan,
    quadrupole_reduced,
    reduced_on_first,
    reduced_on_second,
    scalar_product_element,
    spin_reduced,
    wigner3j,
    wigner6j,
)


def test_halfint_arithmetic():
    a = HalfInt(1.5)
    b = HalfInt(1)
    assert (a + b).twice == 5
    assert (a - b) == HalfInt(0.5)
    assert abs(-a) == a
    assert repr(a) == "3/2"
    assert float(a) == 1.5
    assert not a.is_integer and b.is_integer
    with pytest.raises(ValueError):
        HalfInt(0.3)


def test_3j_closed_forms():
    # Racah closed forms.
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), rel=1e-14)
    assert wigner3j(0.5, 0.5, 1, 0.5, -0.5, 0) == pytest.approx(
        1 / math.sqrt(6), rel=1e-14
    )
    # Triangle-rule violation returns 0 by convention.
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0
    # m-sum violation.
    assert wigner3j(1, 1, 2, 1, 1, 1) == 0.0


def test_6j_closed_forms():
    # {j1 j2 j3; 0 j3 j2} = (-1)^(j1+j2+j3)/sqrt((2j2+1)(2j3+1)) pattern,
    # here with one argument zero.
    for j1, j2 in [(1, 1), (2, 1), (1.5, 0.5), (2.5, 1.5)]:
        for j3 in np.arange(abs(j1 - j2), j1 + j2 + 1):
            expect = (-1) ** round(j1 + j2 + j3) / math.sqrt(
                (2 * j2 + 1) * (2 * j3 + 1)
            )
            assert wigner6j(j1, j2, j3, 0, j3, j2) == pytest.approx(expect, rel=1e-12)
    assert wigner6j(0.5, 0.5, 1, 0.5, 0.5, 1) == pytest.approx(1 / 6, rel=1e-12)
    # Triangle violation.
    assert wigner6j(1, 1, 3, 1, 1, 1) == 0.0


def _halfints(max_twice):
    return [t / 2 for t in range(0, max_twice + 1)]


def test_3j_against_sympy_grid():
    sympy_wigner = pytest.importorskip("sympy.physics.wigner")
    rng = np.random.default_rng(7)
    count = 0
    for _ in range(400):
        tj1, tj2 = rng.integers(0, 16, size=2)
        tj3 = rng.integers(abs(tj1 - tj2), tj1 + tj2 + 1)
        if (tj1 + tj2 + tj3) % 2:
            continue
        tm1 = rng.integers(-tj1, tj1 + 1)
        if (tm1 + tj1) % 2:
            continue
        tm2 = rng.integers(-tj2, tj2 + 1)
        if (tm2 + tj2) % 2:
            continue
        tm3 = -tm1 - tm2
        if abs(tm3) > tj3:
            continue
        import sympy

        ours = wigner3j(tj1 / 2, tj2 / 2, tj3 / 2, tm1 / 2, tm2 / 2, tm3 / 2)
        ref = float(
            sympy_wigner.wigner_3j(
                sympy.Rational(tj1, 2),
                sympy.Rational(tj2, 2),
                sympy.Rational(tj3, 2),
                sympy.Rational(tm1, 2),
                sympy.Rational(tm2, 2),
                sympy.Rational(tm3, 2),
            )
        )
        assert ours == pytest.approx(ref, rel=1e-12, abs=1e-13)
        count += 1
    assert count > 50


def test_6j_against_sum_over_3j():
    # {j1 j2 j3; j4 j5 j6} contracted with all six projections: the defining
    # sum over products of four 3j symbols.
    def sixj_oracle(j1, j2, j3, j4, j5, j6):
        total = 0.0
        tms = lambda j: [t / 2 for t in range(-round(2 * j), round(2 * j) + 1, 2)]
        for m1, m2, m5 in itertools.product(tms(j1), tms(j2), tms(j5)):
            m3 = -m1 - m2
            m6 = m5 - m1
            m4 = m5 + m3
            if abs(m3) > j3 or abs(m6) > j6 or abs(m4) > j4:
                continue
            phase = (-1) ** round(
                (j1 - m1) + (j2 - m2) + (j3 - m3) + (j4 - m4) + (j5 - m5) + (j6 - m6)
            )
            total += (
                phase
                * wigner3j(j1, j2, j3, -m1, -m2, -m3)
                * wigner3j(j1, j5, j6, m1, -m5, m6)
                * wigner3j(j4, j2, j6, m4, m2, -m6)
                * wigner3j(j4, j5, j3, -m4, m5, m3)
            )
        return total

    cases = [
        (1, 1, 1, 1, 1, 1),
        (0.5, 0.5, 1, 0.5, 0.5, 1),
        (1.5, 1, 0.5, 1, 1.5, 1.5),
        (2, 1.5, 0.5, 1.5, 1, 1.5),
        (2.5, 2, 1.5, 2, 1.5, 1),
    ]
    for js in cases:
        assert wigner6j(*js) == pytest.approx(sixj_oracle(*js), rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    tj1=st.integers(0, 12),
    tj2=st.integers(0, 12),
    seed=st.integers(0, 10**6),
)
def test_3j_orthogonality(tj1, tj2, seed):
    # sum over (m1, m2) at fixed m3 of (2 j3 + 1) 3j(...)^2 = 1.
    rng = np.random.default_rng(seed)
    tj3s = list(range(abs(tj1 - tj2), tj1 + tj2 + 1, 2))
    tj3 = int(rng.choice(tj3s))
    tm3 = int(rng.choice(range(-tj3, tj3 + 1, 2)))
    total = 0.0
    for tm1 in range(-tj1, tj1 + 1, 2):
        tm2 = -tm1 - tm3
        if abs(tm2) > tj2:
            continue
        w = wigner3j(tj1 / 2, tj2 / 2, tj3 / 2, tm1 / 2, tm2 / 2, tm3 / 2)
        total += (tj3 + 1) * w * w
    assert total == pytest.approx(1.0, rel=1e-12)


def test_3j_permutation_symmetry():
    js = (1.5, 2, 2.5)
    ms = (0.5, -1, 0.5)
    base = wigner3j(*js, *ms)
    # Even permutation invariance.
    assert wigner3j(js[1], js[2], js[0], ms[1], ms[2], ms[0]) == pytest.approx(
        base, rel=1e-12
    )
    # Odd permutation picks up (-1)^(j1+j2+j3).
    phase = (-1) ** round(sum(js))
    assert wigner3j(js[1], js[0], js[2], ms[1], ms[0], ms[2]) == pytest.approx(
        phase * base, rel=1e-12
    )


# ---------------------------------------------------------------------------
# Brute-force oracle for the composite-system recoupling formulas: build
# explicit tensor-operator matrices with Wigner-Eckart on each subsystem,
# couple with Clebsch-Gordan coefficients and compare matrix elements.
# ---------------------------------------------------------------------------


def _tensor_matrix(jp, j, k, q, reduced):
    """Matrix <jp mp|T^k_q|j m> with rows mp, cols m."""
    tjp, tj = round(2 * jp), round(2 * j)
    mat = np.zeros((tjp + 1, tj + 1))
    for ip, tmp_ in enumerate(range(-tjp, tjp + 1, 2)):
        for i, tm in enumerate(range(-tj, tj + 1, 2)):
            mat[ip, i] = (
                (-1) ** round(jp - tmp_ / 2)
                * wigner3j(jp, k, j, -tmp_ / 2, q, tm / 2)
                * reduced
            )
    return mat


def _coupled_vector(j1, j2, J, M):
    """|(j1 j2) J M> expansion coefficients in the |m1>|m2> product basis."""
    tj1, tj2 = round(2 * j1), round(2 * j2)
    vec = np.zeros((tj1 + 1) * (tj2 + 1))
    for i1, tm1 in enumerate(range(-tj1, tj1 + 1, 2)):
        for i2, tm2 in enumerate(range(-tj2, tj2 + 1, 2)):
            if tm1 + tm2 != round(2 * M):
                continue
            vec[i1 * (tj2 + 1) + i2] = clebsch_gordan(
                j1, tm1 / 2, j2, tm2 / 2, J, M
            )
    return vec


def _scalar_product_matrix(j1p, j2p, j1, j2, k, r1, r2):
    """T^k(1).U^k(2) in the product basis, bra (j1p,j2p), ket (j1,j2)."""
    dim_bra = (round(2 * j1p) + 1) * (round(2 * j2p) + 1)
    dim_ket = (round(2 * j1) + 1) * (round(2 * j2) + 1)
    out = np.zeros((dim_bra, dim_ket))
    for q2 in np.arange(-k, k + 1):
        t1 = _tensor_matrix(j1p, j1, k, q2, r1)
        t2 = _tensor_matrix(j2p, j2, k, -q2, r2)
        out += (-1) ** round(q2) * np.kron(t1, t2)
    return out


def test_scalar_product_element_oracle():
    rng = np.random.default_rng(3)
    cases = [
        (1, 0.5, 1, 0.5, 1),
        (1, 2.5, 1, 2.5, 1),
        (2, 2.5, 1, 2.5, 2),
        (1.5, 0.5, 1.5, 0.5, 1),
        (2, 1, 2, 1, 2),
    ]
    for j1p, j2p, j1, j2, k in cases:
        r1, r2 = rng.normal(size=2)
        for J in np.arange(
            max(abs(j1p - j2p), abs(j1 - j2)), min(j1p + j2p, j1 + j2) + 1
        ):
            op = _scalar_product_matrix(j1p, j2p, j1, j2, k, r1, r2)
            M = -J if J > 0 else 0
            bra = _coupled_vector(j1p, j2p, J, M)
            ket = _coupled_vector(j1, j2, J, M)
            ref = bra @ op @ ket
            ours = scalar_product_element(j1p, j2p, j1, j2, J, k, r1, r2)
            assert ours == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_reduced_on_subsystems_oracle():
    rng = np.random.default_rng(5)
    for j1p, j1, j2, k in [(1, 2, 0.5, 1), (2, 2, 2.5, 2), (0.5, 1.5, 1, 1)]:
        r1 = rng.normal()
        for Jp in np.arange(abs(j1p - j2), j1p + j2 + 1):
            for J in np.arange(abs(j1 - j2), j1 + j2 + 1):
                if abs(Jp - J) > k or Jp + J < k:
                    continue
                # Oracle: Wigner-Eckart on the q=0 component in coupled basis.
                M = min(Jp, J)
                w = (-1) ** round(Jp - M) * wigner3j(Jp, k, J, -M, 0, M)
                if abs(w) < 1e-14:
                    continue
                q0 = _tensor_matrix(j1p, j1, k, 0, r1)
                op = np.kron(q0, np.eye(round(2 * j2) + 1))
                bra = _coupled_vector(j1p, j2, Jp, M)
                ket = _coupled_vector(j1, j2, J, M)
                ref = (bra @ op @ ket) / w
                ours = reduced_on_first(j1p, j1, j2, Jp, J, k, r1)
                assert ours == pytest.approx(ref, rel=1e-10, abs=1e-12)
    for j2p, j2, j1, k in [(1, 2, 0.5, 1), (1.5, 1.5, 2.5, 1)]:
        r2 = rng.normal()
        for Jp in np.arange(abs(j1 - j2p), j1 + j2p + 1):
            for J in np.arange(abs(j1 - j2), j1 + j2 + 1):
                if abs(Jp - J) > k or Jp + J < k:
                    continue
                M = min(Jp, J)
                w = (-1) ** round(Jp - M) * wigner3j(Jp, k, J, -M, 0, M)
                if abs(w) < 1e-14:
                    continue
                q0 = _tensor_matrix(j2p, j2, k, 0, r2)
                op = np.kron(np.eye(round(2 * j1) + 1), q0)
                bra = _coupled_vector(j1, j2p, Jp, M)
                ket = _coupled_vector(j1, j2, J, M)
                ref = (bra @ op @ ket) / w
                ours = reduced_on_second(j1, j2p, j2, Jp, J, k, r2)
                assert ours == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_spin_reduced_consistency():
    # <j||J||j> must reproduce <j m|Jz|j m> = m through Wigner-Eckart.
    for j in [0.5, 1, 2.5]:
        m = j
        w = (-1) ** round(j - m) * wigner3j(j, 1, j, -m, 0, m)
        assert w * spin_reduced(j) == pytest.approx(m, rel=1e-12)


def test_quadrupole_reduced_convention():
    # <I, m=I|T^2_0(Q)|I, m=I> = 1/2 by construction; I=1/2 has none.
    for i in [1, 1.5, 2.5]:
        w = (-1) ** round(i - i) * wigner3j(i, 2, i, -i, 0, i)
        assert w * quadrupole_reduced(i) == pytest.approx(0.5, rel=1e-12)
    assert quadrupole_reduced(0.5) == 0.0
