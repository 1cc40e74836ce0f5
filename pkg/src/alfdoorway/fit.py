"""Nonlinear least-squares fit of the model parameters to the line list.

The Hamiltonian is linear in every parameter, so each (F, parity) block is
cached once as per-parameter coefficient matrices; evaluation is a matrix
sum and the residual Jacobian follows from Hellmann-Feynman derivatives
v^T (dH/dtheta) v of the bound eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .angular import HalfInt
from .constants import CM1_TO_MHZ
from .hamiltonian import A5, A6, B5, build_basis, block_param_matrices
from .levels import Level, diagonalize, label_levels
from .params import ParameterSet

DEFAULT_SIGMA_MHZ = 10.0  # wavemeter accuracy of the measured frequencies


@dataclass
class LineRecord:
    """One observed transition of the line list (frequencies in cm^-1)."""

    nu_exp: float
    jp: int
    fp: int
    pp: int
    np_: int
    omega: int
    j: int
    f: int
    p: int
    n: int
    fb5: float | None = None
    oc_table: float | None = None
    sigma_mhz: float = DEFAULT_SIGMA_MHZ
    index: int = 0

    @property
    def weight(self) -> float:
        return 1.0 / self.sigma_mhz**2

    def upper_label(self):
        return (self.fp, self.pp, self.np_)

    def lower_label(self):
        return (self.omega, self.j, self.f, self.p, self.n)


@dataclass
class Assignment:
    """Binding of records to model levels plus diagnostics."""

    upper: dict = field(default_factory=dict)  # record index -> (f2, parity, n)
    lower: dict = field(default_factory=dict)
    unmatched: list = field(default_factory=list)
    ambiguous: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def ok(self, rec: LineRecord) -> bool:
        return rec.index in self.upper and rec.index in self.lower


class DoorwayModel:
    """Cached block structure for the A6//b5 upper and a5 lower systems."""

    def __init__(self, n_max: int = 8, f_max_upper: int = 8, f_max_lower: int = 7):
        self.n_max = n_max
        self.blocks = {}
        for f in range(0, f_max_upper + 1):
            for parity in (1, -1):
                kets = build_basis((A6, B5), f, parity, n_max=n_max)
                if kets:
                    self.blocks[("up", 2 * f, parity)] = (
                        kets,
                        block_param_matrices(kets),
                    )
        for f in range(0, f_max_lower + 1):
            for parity in (1, -1):
                kets = build_basis((A5,), f, parity, n_max=n_max)
                if kets:
                    self.blocks[("low", 2 * f, parity)] = (
                        kets,
                        block_param_matrices(kets),
                    )

    def matrices(self, which, f2, parity):
        return self.blocks[(which, f2, parity)]

    def dipole_reduced(self, upkey, lowkey):
        """Cached parameter-free reduced E1 matrix between two blocks."""
        if not hasattr(self, "_dipole_cache"):
            self._dipole_cache = {}
        key = (upkey, lowkey)
        if key not in self._dipole_cache:
            from .spectra import dipole_reduced_matrix

            self._dipole_cache[key] = dipole_reduced_matrix(
                self.blocks[upkey][0], self.blocks[lowkey][0]
            )
        return self._dipole_cache[key]

    def line_strength(self, upper, lower) -> float:
        """Fast line strength using the cached reduced matrices."""
        if upper.parity == lower.parity:
            return 0.0
        if abs(upper.f.twice - lower.f.twice) > 2:
            return 0.0
        if upper.f.twice == 0 and lower.f.twice == 0:
            return 0.0
        red = self.dipole_reduced(upper.block_key, lower.block_key)
        return float(upper.eigenvector @ red @ lower.eigenvector) ** 2

    def eigensolve(self, ps: ParameterSet):
        """Diagonalize every block; returns {blockkey: (energies, vectors,
        levels)} with levels carrying the per-block counting index n."""
        values = dict(ps.values)
        values.setdefault("coupling.xi", 0.0)
        out = {}
        for key, (kets, mats) in self.blocks.items():
            dim = len(kets)
            h = np.zeros((dim, dim))
            for pkey, m in mats.items():
                v = values.get(pkey, 0.0)
                if v:
                    h += v * m
            w, vec = np.linalg.eigh(h)
            out[key] = (w, vec, kets)
        return out

    def levels(self, ps: ParameterSet) -> dict:
        """Labeled Level lists per block key (list order = energy order)."""
        solved = self.eigensolve(ps)
        return {
            key: _levels_from_eig(w, vec, kets, key)
            for key, (w, vec, kets) in solved.items()
        }


def _levels_from_eig(w, vec, kets, key) -> list[Level]:
    from .levels import _n_fractions_b5

    levels = []
    for wi, v in zip(w, vec.T):
        fb5 = sum(float(c) ** 2 for c, k in zip(v, kets) if k.state == "b5")
        jf, of = {}, {}
        for c, k in zip(v, kets):
            jf[k.j2] = jf.get(k.j2, 0.0) + float(c) ** 2
            if k.state == "a5":
                of[abs(k.omega2)] = of.get(abs(k.omega2), 0.0) + float(c) ** 2
        dom_j2 = max(sorted(jf), key=lambda j2: (jf[j2], -j2))
        dom_om = None
        if of:
            dom_om = HalfInt.from_twice(
                max(sorted(of), key=lambda o2: (of[o2], -o2))
            )
        dom_n = None
        if fb5 > 0.5:
            nfr = _n_fractions_b5(v, kets)
            if nfr:
                dom_n = HalfInt(max(sorted(nfr), key=lambda n: (nfr[n], -n)))
        levels.append(
            Level(
                energy=float(wi),
                f=HalfInt.from_twice(key[1]),
                parity=key[2],
                n=0,
                f_b5=fb5,
                j_fractions={HalfInt.from_twice(j2): x for j2, x in jf.items()},
                dominant_j=HalfInt.from_twice(dom_j2),
                dominant_n=dom_n,
                omega_fractions={HalfInt.from_twice(o2): x for o2, x in of.items()},
                dominant_omega=dom_om,
                eigenvector=v.copy(),
                kets=kets,
                block_key=key,
            )
        )
    return label_levels(levels)


# ---------------------------------------------------------------------------
# Line assignment
# ---------------------------------------------------------------------------


def assign_lines(
    records,
    model: DoorwayModel,
    ps: ParameterSet,
    window_cm1: float = 0.08,
    strength_gate: float = 0.3,
) -> Assignment:
    """Bind every record to one model level on each side.

    Lower candidates are restricted by (dominant Omega, dominant J, F, p).
    The printed lower labels of the line list do not always distinguish
    the two hyperfine levels sharing (J, F), so for each row the lower
    level is chosen among candidates whose computed line strength to the
    bound upper level is at least `strength_gate` of the strongest
    candidate, nearest prediction first. Rows sharing an upper label are
    forced onto a common upper level; upper candidates are screened by a
    nonzero strength as well. Unmatched or ambiguous rows are reported
    and excluded.
    """
    levels = model.levels(ps)
    asn = Assignment()

    lower_cands = {}
    for rec in records:
        if rec.pp == rec.p:
            asn.unmatched.append((rec.index, "parity-forbidden combination"))
            continue
        cands = [
            lv
            for lv in levels.get(("low", 2 * rec.f, rec.p), [])
            if lv.dominant_omega == HalfInt(rec.omega)
            and lv.dominant_j == HalfInt(rec.j)
        ]
        if not cands:
            asn.unmatched.append((rec.index, "no lower-level candidate"))
            continue
        lower_cands[rec.index] = cands

    # group rows by upper label; pick the common upper level jointly
    groups: dict = {}
    for rec in records:
        if rec.index in lower_cands:
            groups.setdefault(rec.upper_label(), []).append(rec)

    label_to_level = {}
    for label, recs in groups.items():
        fp, pp, _ = label
        ups = levels.get(("up", 2 * fp, pp), [])
        # cheap prefilter: an upper candidate must predict at least one row
        # within twice the window
        win = 2.0 * window_cm1 * CM1_TO_MHZ
        ups = [
            up
            for up in ups
            if all(
                min(
                    abs(up.energy - lo.energy - rec.nu_exp * CM1_TO_MHZ)
                    for lo in lower_cands[rec.index]
                )
                < win
                for rec in recs
            )
        ]
        if not ups:
            for rec in recs:
                asn.unmatched.append((rec.index, "no upper-level candidate"))
            continue
        best = None
        for up in ups:
            cost = 0.0
            pick = {}
            usable = True
            for rec in recs:
                cands = lower_cands[rec.index]
                ss = [model.line_strength(up, lo) for lo in cands]
                smax = max(ss)
                if smax <= 0.0:
                    usable = False
                    break
                ok = [i for i, s in enumerate(ss) if s >= strength_gate * smax]
                devs = [
                    abs(up.energy - cands[i].energy - rec.nu_exp * CM1_TO_MHZ)
                    for i in ok
                ]
                i = ok[int(np.argmin(devs))]
                cost += min(devs)
                pick[rec.index] = i
            if not usable:
                continue
            # prefer the level whose counting index matches the printed n'
            # (ties broken by prediction distance); the printed index wins
            # only among candidates already inside the window
            rank = (
                abs(up.n - label[2])
                if cost / len(recs) <= window_cm1 * CM1_TO_MHZ
                else 1000 + abs(up.n - label[2])
            )
            if best is None or (rank, cost) < (best[0], best[1]):
                best = (rank, cost, up, pick)
        if best is None:
            for rec in recs:
                asn.unmatched.append((rec.index, "no strength-allowed candidate"))
            continue
        _, cost, up, pick = best
        if cost / len(recs) > window_cm1 * CM1_TO_MHZ:
            for rec in recs:
                asn.unmatched.append((rec.index, "no prediction inside window"))
            continue
        label_to_level[label] = up
        for rec in recs:
            lo = lower_cands[rec.index][pick[rec.index]]
            asn.upper[rec.index] = ("up", 2 * fp, pp, up.n)
            asn.lower[rec.index] = ("low", 2 * rec.f, rec.p, lo.n)
            if up.n != rec.np_:
                asn.notes.append(
                    f"row {rec.index}: model n'={up.n} vs table n'={rec.np_}"
                )

    # distinct labels must not collapse onto one model level
    seen: dict = {}
    for label, lv in label_to_level.items():
        key = (label[0], label[1], lv.n)
        if key in seen and seen[key] != label:
            asn.ambiguous.append((seen[key], label))
        seen[key] = label
    return asn


# ---------------------------------------------------------------------------
# Residuals, Jacobian, and the least-squares driver
# ---------------------------------------------------------------------------


class ResidualEvaluator:
    """Weighted residuals r = (nu_exp - nu_calc)/sigma and their Jacobian."""

    def __init__(self, records, model: DoorwayModel, assignment: Assignment):
        self.records = [r for r in records if assignment.ok(r)]
        self.model = model
        self.assignment = assignment

    def bound_keys(self):
        ups = [self.assignment.upper[r.index] for r in self.records]
        los = [self.assignment.lower[r.index] for r in self.records]
        return ups, los

    def _solve(self, ps: ParameterSet):
        solved = self.model.eigensolve(ps)
        # map (which,f2,p,n) -> (energy, vector, blockkey)
        table = {}
        for key, (w, vec, kets) in solved.items():
            order = np.argsort(w, kind="stable")
            for n, i in enumerate(order, start=1):
                table[(key[0], key[1], key[2], n)] = (w[i], vec[:, i], key)
        return table

    def residuals(self, ps: ParameterSet) -> np.ndarray:
        table = self._solve(ps)
        out = np.zeros(len(self.records))
        for i, rec in enumerate(self.records):
            eu = table[self.assignment.upper[rec.index]][0]
            el = table[self.assignment.lower[rec.index]][0]
            out[i] = (rec.nu_exp * CM1_TO_MHZ - (eu - el)) / rec.sigma_mhz
        return out

    def residuals_and_jacobian(self, ps: ParameterSet, free_keys):
        table = self._solve(ps)
        nrec, npar = len(self.records), len(free_keys)
        r = np.zeros(nrec)
        jac = np.zeros((nrec, npar))
        # Hellmann-Feynman: dE/dtheta = v^T M_theta v, accumulated per level
        deriv_cache: dict = {}

        def level_derivs(lkey):
            if lkey in deriv_cache:
                return deriv_cache[lkey]
            energy, vec, key = table[lkey]
            kets, mats = self.model.blocks[key]
            d = np.zeros(npar)
            for ip, pkey in enumerate(free_keys):
                m = mats.get(pkey)
                if m is not None:
                    d[ip] = vec @ m @ vec
            deriv_cache[lkey] = (energy, d)
            return deriv_cache[lkey]

        for i, rec in enumerate(self.records):
            eu, du = level_derivs(self.assignment.upper[rec.index])
            el, dl = level_derivs(self.assignment.lower[rec.index])
            r[i] = (rec.nu_exp * CM1_TO_MHZ - (eu - el)) / rec.sigma_mhz
            jac[i] = -(du - dl) / rec.sigma_mhz
        return r, jac


@dataclass
class FitReport:
    """Converged parameter values, uncertainties and residual diagnostics."""

    params: ParameterSet
    free_keys: list
    uncertainties: dict  # SD*sqrt(Q) per free key, MHz
    sd_mhz: float
    residuals_mhz: np.ndarray
    records: list
    correlation: np.ndarray
    cost: float
    nfev: int
    success: bool
    message: str
    correlated_pairs: list = field(default_factory=list)
    assignment: Assignment | None = None

    def summary(self) -> str:
        lines = [
            f"fit: {len(self.records)} lines, {len(self.free_keys)} free parameters",
            f"standard deviation of the fit: {self.sd_mhz:.2f} MHz",
        ]
        for k in self.free_keys:
            v = self.params.values[k]
            u = self.uncertainties[k]
            if k in ("coupling.xi", "A6.t", "b5.t", "a5.t"):
                lines.append(
                    f"  {k:12s} = {v / CM1_TO_MHZ:12.6f} cm-1  "
                    f"({u / CM1_TO_MHZ:.6f})"
                )
            else:
                lines.append(f"  {k:12s} = {v:12.4f} MHz  ({u:.4f})")
        for a, b, c in self.correlated_pairs:
            lines.append(f"  strongly correlated: {a} / {b} (r={c:+.4f})")
        return "\n".join(lines)


def least_squares(
    records,
    ps: ParameterSet,
    model: DoorwayModel | None = None,
    assignment: Assignment | None = None,
    max_nfev: int = 200,
    reassign: bool = True,
) -> FitReport:
    """Levenberg-Marquardt-style minimization of the weighted residuals.

    Fixed parameters are honored through ps.free; convergence thresholds
    are a relative cost change below 1e-10 or a step norm below 1e-8.
    Re-assignment after convergence (once) guards against level crossings
    while the parameters move.
    """
    model = model or DoorwayModel()
    if assignment is None:
        assignment = assign_lines(records, model, ps)
    free_keys = ps.free_keys()
    if not free_keys:
        raise ValueError("no free parameters")
    nrec = sum(1 for r in records if assignment.ok(r))
    if nrec <= len(free_keys):
        raise ValueError("fewer lines than free parameters")

    for _round in range(2):
        ev = ResidualEvaluator(records, model, assignment)
        x0 = np.array([ps.values[k] for k in free_keys])

        def fun(x):
            trial = ps.copy()
            for k, v in zip(free_keys, x):
                trial.values[k] = v
            return ev.residuals(trial)

        def jac(x):
            trial = ps.copy()
            for k, v in zip(free_keys, x):
                trial.values[k] = v
            _, j = ev.residuals_and_jacobian(trial, free_keys)
            return j

        sol = scipy.optimize.least_squares(
            fun,
            x0,
            jac=jac,
            method="trf",
            x_scale="jac",
            ftol=1e-10,
            xtol=1e-8,
            gtol=1e-12,
            max_nfev=max_nfev,
        )
        for k, v in zip(free_keys, sol.x):
            ps.values[k] = v
        new_assignment = assign_lines(records, model, ps)
        if not reassign or _assignments_equal(assignment, new_assignment):
            break
        assignment = new_assignment

    r, j = ev.residuals_and_jacobian(ps, free_keys)
    ndof = len(r) - len(free_keys)
    sigma = np.array([rec.sigma_mhz for rec in ev.records])
    sd = float(np.sqrt(np.sum((r * sigma) ** 2) / ndof))
    jtj = j.T @ j
    try:
        cov = np.linalg.inv(jtj)
        # SD*sqrt(Q): fit SD times the inverse-curvature diagonal. The
        # Jacobian carries 1/sigma, so sd (in MHz) must be divided by sigma
        # once to match; with the uniform 10 MHz weights this reduces to
        # the usual scaled-covariance uncertainty.
        unc = {
            k: float(sd / ev.records[0].sigma_mhz * np.sqrt(cov[i, i]))
            for i, k in enumerate(free_keys)
        }
        d = np.sqrt(np.diag(cov))
        corr = cov / np.outer(d, d)
    except np.linalg.LinAlgError:
        cov = np.full((len(free_keys),) * 2, np.nan)
        unc = {k: float("nan") for k in free_keys}
        corr = cov
    pairs = [
        (free_keys[i], free_keys[j_], float(corr[i, j_]))
        for i in range(len(free_keys))
        for j_ in range(i + 1, len(free_keys))
        if abs(corr[i, j_]) > 0.999
    ]
    return FitReport(
        params=ps,
        free_keys=free_keys,
        uncertainties=unc,
        sd_mhz=sd,
        residuals_mhz=r * sigma,
        records=ev.records,
        correlation=corr,
        cost=float(sol.cost),
        nfev=sol.nfev,
        success=bool(sol.success),
        message=str(sol.message),
        correlated_pairs=pairs,
        assignment=assignment,
    )


def _assignments_equal(a: Assignment, b: Assignment) -> bool:
    return a.upper == b.upper and a.lower == b.lower


def residuals_at(records, ps: ParameterSet, model=None, assignment=None):
    """nu_exp - nu_calc per assigned record, MHz (diagnostic, no fit)."""
    model = model or DoorwayModel()
    if assignment is None:
        assignment = assign_lines(records, model, ps)
    ev = ResidualEvaluator(records, model, assignment)
    r = ev.residuals(ps)
    sigma = np.array([rec.sigma_mhz for rec in ev.records])
    return ev.records, r * sigma, assignment


def combination_differences(records, assignment: Assignment | None = None):
    """Upper-level energy differences from records sharing one lower level.

    Pairs are formed within identical lower assignments when an assignment
    is given (the printed lower labels alone can be ambiguous); sigma of a
    difference combines both line uncertainties in quadrature.
    """
    groups: dict = {}
    for rec in records:
        if assignment is not None:
            if rec.index not in assignment.lower:
                continue
            key = assignment.lower[rec.index]
        else:
            key = rec.lower_label()
        groups.setdefault(key, []).append(rec)
    out = []
    for key, recs in groups.items():
        for i in range(len(recs)):
            for j_ in range(i + 1, len(recs)):
                a, b = recs[i], recs[j_]
                out.append(
                    {
                        "lower": key,
                        "rows": (a.index, b.index),
                        "upper_labels": (a.upper_label(), b.upper_label()),
                        "delta_mhz": (a.nu_exp - b.nu_exp) * CM1_TO_MHZ,
                        "sigma_mhz": float(np.hypot(a.sigma_mhz, b.sigma_mhz)),
                    }
                )
    return out
