"""Diagonalization, eigenstate labeling, and composition fractions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angular import HalfInt
from .constants import CM1_TO_MHZ
from .hamiltonian import (
    A5,
    A6,
    B5,
    CouplingParams,
    HamiltonianBlock,
    StateParams,
    assemble_block,
    build_basis,
    block_param_matrices,
    params_to_values,
)

DEGENERACY_TOL_MHZ = 1e-3  # levels closer than 1 kHz are ordered by f_b5


@dataclass
class Level:
    """One eigenstate of an (F, parity) block.

    energy is the absolute term value in MHz; n counts from 1 for the
    lowest level of the same (F, parity); f_b5 is the squared-amplitude
    fraction on b5 kets (0 for pure a5 blocks); j_fractions maps J to its
    squared-amplitude weight; dominant_n is None unless the level has
    more b5 than A6 character.
    """

    energy: float
    f: HalfInt
    parity: int
    n: int
    f_b5: float
    j_fractions: dict
    dominant_j: HalfInt
    dominant_n: HalfInt | None
    omega_fractions: dict = field(default_factory=dict)
    dominant_omega: HalfInt | None = None
    eigenvector: np.ndarray = None
    kets: list = None
    block_key: tuple | None = None

    @property
    def energy_cm1(self) -> float:
        return self.energy / CM1_TO_MHZ

    def key(self):
        return (self.f.twice, self.parity, self.n)

    def __repr__(self):
        p = "+" if self.parity > 0 else "-"
        return (
            f"Level(F={self.f}{p} n={self.n} E={self.energy_cm1:.4f} cm-1 "
            f"fb5={self.f_b5:.3f} J~{self.dominant_j})"
        )


def mixing_fraction(level: Level) -> float:
    """Triplet character: sum of squared amplitudes over b5 kets."""
    if level.kets is None:
        return level.f_b5
    w = sum(
        float(c) ** 2
        for c, k in zip(level.eigenvector, level.kets)
        if k.state == "b5"
    )
    return w


def _n_fractions_b5(vec, kets):
    """Case-(b) N composition of the b5 part of an eigenvector.

    The two f-parity kets of each (J, F1) pair map onto N = J -/+ 1 through
    the parameter-free rotational eigenvectors; e-parity kets are N = J.
    """
    from .hamiltonian import build_basis as _bb  # local alias, no cycle

    fracs: dict = {}
    groups: dict = {}
    for i, k in enumerate(kets):
        if k.state != "b5":
            continue
        groups.setdefault((k.j2, k.f12), []).append(i)
    for (j2, _), idx in groups.items():
        j = j2 // 2
        sub = [kets[i] for i in idx]
        amps = np.array([vec[i] for i in idx])
        if len(idx) == 1:
            n = j  # e level: N = J
            fracs[n] = fracs.get(n, 0.0) + float(amps[0] ** 2)
            continue
        # f pair: diagonalize the bare rotational operator on the pair
        mats = block_param_matrices(sub)
        hb = mats["b5.b"]
        w, v = np.linalg.eigh(hb)
        for col, x in zip(v.T, w):
            n = round((-1 + np.sqrt(1 + 4 * x)) / 2)
            amp = float(np.dot(col, amps))
            fracs[n] = fracs.get(n, 0.0) + amp * amp
    return fracs


def diagonalize(block: HamiltonianBlock) -> list[Level]:
    """Ascending-energy levels of one block with composition labels."""
    if block.dim == 0:
        return []
    try:
        w, v = np.linalg.eigh(block.matrix)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"diagonalization failed for block F={block.f} parity={block.parity}"
        ) from exc
    gram = v.T @ v - np.eye(block.dim)
    if np.max(np.abs(gram)) > 1e-9:
        raise RuntimeError(
            f"eigenvectors not orthonormal for block F={block.f} p={block.parity}"
        )
    levels = []
    for wi, vec in zip(w, v.T):
        fb5 = sum(
            float(c) ** 2 for c, k in zip(vec, block.kets) if k.state == "b5"
        )
        jf: dict = {}
        of: dict = {}
        for c, k in zip(vec, block.kets):
            jf[k.j2] = jf.get(k.j2, 0.0) + float(c) ** 2
            if k.state == "a5":
                om = abs(k.omega2)
                of[om] = of.get(om, 0.0) + float(c) ** 2
        # ties toward lower J
        dom_j2 = max(sorted(jf), key=lambda j2: (jf[j2], -j2))
        nfr = _n_fractions_b5(vec, block.kets) if fb5 > 0 else {}
        dom_n = None
        if fb5 > 0.5 and nfr:
            dom_n = HalfInt(max(sorted(nfr), key=lambda n: (nfr[n], -n)))
        dom_om = None
        if of:
            dom2 = max(sorted(of), key=lambda o2: (of[o2], -o2))
            dom_om = HalfInt.from_twice(dom2)
        levels.append(
            Level(
                energy=float(wi),
                f=block.f,
                parity=block.parity,
                n=0,
                f_b5=fb5,
                j_fractions={HalfInt.from_twice(j2): fr for j2, fr in jf.items()},
                dominant_j=HalfInt.from_twice(dom_j2),
                dominant_n=dom_n,
                omega_fractions={HalfInt.from_twice(o2): fr for o2, fr in of.items()},
                dominant_omega=dom_om,
                eigenvector=vec.copy(),
                kets=block.kets,
            )
        )
    return label_levels(levels)


def label_levels(levels: list[Level]) -> list[Level]:
    """Assign the counting index n per (F, parity), ordered by energy.

    Degenerate pairs (within 1 kHz) are ordered by descending f_b5, then
    ascending dominant J, to keep the output deterministic.
    """
    def sort_key(lv: Level):
        return (
            round(lv.energy / DEGENERACY_TOL_MHZ),
            -lv.f_b5,
            lv.dominant_j.twice,
        )

    by_fp: dict = {}
    for lv in levels:
        by_fp.setdefault((lv.f.twice, lv.parity), []).append(lv)
    out = []
    for group in by_fp.values():
        group.sort(key=sort_key)
        for n, lv in enumerate(group, start=1):
            lv.n = n
        out.extend(group)
    out.sort(key=lambda lv: (lv.f.twice, -lv.parity, lv.energy))
    return out


def solve_system(system, params, coupling=None, f_max=8.0, n_max: int = 8):
    """Diagonalize every (F, parity) block of a system.

    params: list of StateParams in system order. Returns {(2F, parity):
    list[Level]} including empty blocks.
    """
    out = {}
    pa = params[0]
    pb = params[1] if len(params) > 1 else None
    f2 = HalfInt(f_max).twice
    start = f2 % 2
    for tf in range(start, f2 + 1, 2):
        for parity in (1, -1):
            block = assemble_block(
                system, tf / 2.0, parity, pa, pb, coupling, n_max=n_max
            )
            out[(tf, parity)] = diagonalize(block) if block.dim else []
    return out


def unperturbed_ladder(
    params_a: StateParams,
    params_b: StateParams,
    e_or_f: str,
    j_values,
    reduce_offset_cm1: float = 0.0,
    reduce_slope_cm1: float = 0.0,
):
    """Unperturbed (xi = 0) rotational energies for the overview diagrams.

    Hyperfine-free energies of the A and b states for the requested parity
    stack, optionally reduced by offset + slope*J(J+1) (both in cm^-1, as
    used in the published overview figure). Returns {"A6": [(J, E_cm1)],
    "b5": [(J, E_cm1, N)]}.
    """
    coupling = CouplingParams(xi_65=0.0)
    out = {"A6": [], "b5": []}
    for j in j_values:
        parity = _parity_for(e_or_f, j)
        kets = build_basis((A6, B5), j, parity, n_max=max(j_values) + 2, i1_2=0, i2_2=0)
        mats = block_param_matrices(kets, 0, 0)
        values = params_to_values([params_a, params_b], coupling)
        dim = len(kets)
        h = np.zeros((dim, dim))
        for key, m in mats.items():
            v = values.get(key, 0.0)
            if v:
                h += v * m
        w, v = np.linalg.eigh(h)
        red = (reduce_offset_cm1 + reduce_slope_cm1 * j * (j + 1)) * CM1_TO_MHZ
        for wi, vec in zip(w, v.T):
            i = int(np.argmax(vec**2))
            k = kets[i]
            e_red = (wi - red) / CM1_TO_MHZ
            if k.state == "A6":
                out["A6"].append((j, e_red))
            else:
                x = wi - params_b.t
                n = round((-1 + np.sqrt(max(1 + 4 * x / params_b.b, 0))) / 2)
                out["b5"].append((j, e_red, n))
    return out


def _parity_for(e_or_f: str, j: int) -> int:
    sign = 1 if e_or_f == "e" else -1
    return sign * (1 if j % 2 == 0 else -1)


def unperturbed_separation(
    params_a: StateParams, params_b: StateParams, j: int = 1, n: int = 2
) -> dict:
    """Unperturbed A(J) - b(N) separation at zero spin-orbit coupling, cm^-1.

    The A level is T + B J(J+1) (Lambda doubling off). For the triplet N
    level two conventions are reported: "rotation_only" extrapolates
    T + B N(N+1), while "cog" places the level at the (2J+1)-weighted
    center of gravity of its fine-structure multiplet, i.e. the convention
    of a case-(b) formulated spin-spin/spin-rotation operator. Positive
    values mean the A level lies below the b level.
    """
    e_a = params_a.t + params_a.b * j * (j + 1) - params_a.d * (j * (j + 1)) ** 2
    e_b_rot = params_b.t + params_b.b * n * (n + 1)
    # fine-structure multiplet of N at xi = 0 (no nuclei)
    levels = []
    for jj in range(max(n - 1, 0), n + 2):
        parity = 1 if n % 2 == 0 else -1
        kets = build_basis((B5,), jj, parity, n_max=n + 3, i1_2=0, i2_2=0)
        if not kets:
            continue
        mats = block_param_matrices(kets, 0, 0)
        values = params_to_values([params_b])
        h = np.zeros((len(kets),) * 2)
        for key, m in mats.items():
            v = values.get(key, 0.0)
            if v:
                h += v * m
        w = np.linalg.eigvalsh(h)
        i = int(np.argmin(np.abs(w - e_b_rot)))
        levels.append((2 * jj + 1, float(w[i])))
    cog = sum(g * e for g, e in levels) / sum(g for g, _ in levels)
    return {
        "rotation_only": (e_b_rot - e_a) / CM1_TO_MHZ,
        "cog": (cog - e_a) / CM1_TO_MHZ,
    }
