"""Parameter sets and the flat key-value parameter file format.

Keys follow the published table naming with a state tag prefix, e.g.

    b5.bF_Al  = 1340.8 MHz   free
    A6.B      = 15583.2120 MHz  fixed
    coupling.xi = 1.1220 cm-1  free

Values are stored in MHz internally; `cm-1` units in the file are converted
on load (1 cm-1 = 29979.2458 MHz exactly).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .constants import CM1_TO_MHZ
from .hamiltonian import A5, A6, B5, CouplingParams, StateParams

# file-key <-> StateParams attribute
_KEY_TO_ATTR = {
    "T": "t",
    "B": "b",
    "D": "d",
    "A": "a_so",
    "lambda": "lam_ss",
    "gamma": "gamma_sr",
    "o": "o",
    "p": "p",
    "q": "q",
    "a_Al": "a_al",
    "bF_Al": "bf_al",
    "c_Al": "c_al",
    "d_Al": "d_al",
    "eq0Q_Al": "eq0q_al",
    "eq2Q_Al": "eq2q_al",
    "a_F": "a_f",
    "bF_F": "bf_f",
    "c_F": "c_f",
    "d_F": "d_f",
}
_ATTR_TO_KEY = {v: k for k, v in _KEY_TO_ATTR.items()}
_STATE_BY_TAG = {"A6": A6, "b5": B5, "a5": A5}


@dataclass
class ParameterSet:
    """All model parameters with their fixed/free flags.

    values maps "tag.attr" (internal attribute names) to MHz; free is the
    subset of keys varied in a fit.
    """

    values: dict = field(default_factory=dict)
    free: set = field(default_factory=set)

    def copy(self) -> "ParameterSet":
        return ParameterSet(dict(self.values), set(self.free))

    def state_params(self, tag: str) -> StateParams:
        state = _STATE_BY_TAG[tag]
        kwargs = {}
        for attr in _ATTR_TO_KEY:
            key = f"{tag}.{attr}"
            if key in self.values:
                kwargs[attr] = self.values[key]
        freeset = {k.split(".", 1)[1] for k in self.free if k.startswith(tag + ".")}
        return StateParams(state, free=freeset, **kwargs)

    def coupling(self) -> CouplingParams:
        return CouplingParams(
            xi_65=self.values.get("coupling.xi", 0.0),
            delta_e=self.values.get("coupling.delta_e", 0.0),
            free={"xi_65"} if "coupling.xi" in self.free else set(),
        )

    def set(self, key: str, value: float, free: bool | None = None):
        self.values[key] = value
        if free is True:
            self.free.add(key)
        elif free is False:
            self.free.discard(key)

    def free_keys(self) -> list:
        return sorted(self.free)

    def __getitem__(self, key: str) -> float:
        return self.values[key]


def _parse_key(token: str) -> str:
    tag, _, name = token.partition(".")
    if tag == "coupling":
        if name not in ("xi", "delta_e"):
            raise ValueError(f"unknown coupling parameter {token!r}")
        return token
    if tag not in _STATE_BY_TAG:
        raise ValueError(f"unknown state tag in {token!r}")
    if name not in _KEY_TO_ATTR:
        raise ValueError(f"unknown parameter name in {token!r}")
    return f"{tag}.{_KEY_TO_ATTR[name]}"


def _format_key(key: str) -> str:
    tag, _, attr = key.partition(".")
    if tag == "coupling":
        return key
    return f"{tag}.{_ATTR_TO_KEY[attr]}"


def load_params(path) -> ParameterSet:
    """Read a flat key-value parameter file (MHz or cm-1 units)."""
    ps = ParameterSet()
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key_tok, _, rest = line.partition("=")
            key = _parse_key(key_tok.strip())
            fields = rest.split()
            value = float(fields[0])
            unit = "MHz"
            flag = "fixed"
            for tok in fields[1:]:
                if tok in ("MHz", "cm-1", "cm^-1"):
                    unit = tok
                elif tok in ("fixed", "free"):
                    flag = tok
                else:
                    raise ValueError(f"unexpected token {tok!r}")
            if unit != "MHz":
                value *= CM1_TO_MHZ
            ps.set(key, value, free=(flag == "free"))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: cannot parse {raw!r}: {exc}") from None
    return ps


def dump_params(ps: ParameterSet, path=None) -> str:
    """Write a parameter file; origins and xi are emitted in cm-1."""
    lines = ["# AlF A6 // b5 model parameters (MHz unless noted)"]
    cm_keys = {"coupling.xi", "A6.t", "b5.t", "a5.t", "a5.a_so"}
    for key in sorted(ps.values):
        val = ps.values[key]
        flag = "free" if key in ps.free else "fixed"
        if key in cm_keys:
            lines.append(
                f"{_format_key(key):12s} = {val / CM1_TO_MHZ:.6f} cm-1  {flag}"
            )
        else:
            lines.append(f"{_format_key(key):12s} = {val:.4f} MHz  {flag}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def default_params() -> ParameterSet:
    """Shipped model parameters (the packaged fit of the shipped line list)."""
    from importlib.resources import files

    return load_params(files("alfdoorway.data").joinpath("params_default.txt"))
