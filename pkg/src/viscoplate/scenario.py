"""Run configuration: INI files, named presets, and the effective config.

A Scenario is a flat bag of primitives (numbers and spec strings).  The
heavier objects (basis, kernels, damping laws) are built on demand, so two
scenarios are equal exactly when their configs are.  Config files are INI
with the sections [space], [time], [physics], [initial], [output] and
[diagnostics]; unknown sections or keys are rejected by name.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import ScenarioError
from .kernels import (
    parse_damping_spec,
    parse_kernel_spec,
    parse_modulus_spec,
    parse_xi_spec,
)
from .spectral import build_basis, project_initial

_SCHEMA = {
    "space": {"dim": int, "n": int, "L": float, "quad_order": int},
    "time": {"dt": float, "T": float},
    "physics": {
        "rho": float, "k": float, "sigma": float,
        "kernel": str, "damping": str, "xi": str, "modulus": str,
    },
    "initial": {"u": str, "v": str},
    "output": {"dir": str, "stride": int},
    "diagnostics": {
        "a": float, "eps0": float, "eps1": float,
        "t0": float, "t1": float, "delta": float, "lyap_eps": float,
    },
}

_FIELD_OF = {
    ("space", "dim"): "spatial_dim",
    ("space", "n"): "n",
    ("space", "L"): "L",
    ("space", "quad_order"): "quad_order",
    ("time", "dt"): "dt",
    ("time", "T"): "T",
    ("physics", "rho"): "rho",
    ("physics", "k"): "k",
    ("physics", "sigma"): "sigma",
    ("physics", "kernel"): "kernel",
    ("physics", "damping"): "damping",
    ("physics", "xi"): "xi",
    ("physics", "modulus"): "modulus",
    ("initial", "u"): "initial_u",
    ("initial", "v"): "initial_v",
    ("output", "dir"): "out_dir",
    ("output", "stride"): "stride",
    ("diagnostics", "a"): "a",
    ("diagnostics", "eps0"): "eps0",
    ("diagnostics", "eps1"): "eps1",
    ("diagnostics", "t0"): "t0",
    ("diagnostics", "t1"): "t1",
    ("diagnostics", "delta"): "delta",
    ("diagnostics", "lyap_eps"): "lyap_eps",
}


@dataclass(frozen=True)
class Scenario:
    spatial_dim: int = 1
    n: int = 8
    L: float = 1.0
    quad_order: int | None = None
    dt: float = 1e-2
    T: float = 10.0
    rho: float = 0.0
    k: float = 0.5
    sigma: float = 1e-8
    kernel: str = "exp(0.5,1.0)"
    damping: str = "damp-linear(1)"
    xi: str | None = None
    modulus: str | None = None
    initial_u: str = "mode(1,0.04)"
    initial_v: str = "zero"
    out_dir: str = "out"
    stride: int = 1
    a: float | None = None
    eps0: float = 0.5
    eps1: float = 0.5
    t0: float = 0.0
    t1: float | None = None
    delta: float = 0.5
    lyap_eps: float = 1e-2

    # --- derived builders -------------------------------------------------

    def make_basis(self):
        return build_basis(self.spatial_dim, self.n, L=self.L, quad_order=self.quad_order)

    def physical_params(self):
        from .dynamics import PhysicalParams

        return PhysicalParams(
            rho=self.rho, k=self.k,
            kernel=parse_kernel_spec(self.kernel),
            damping=parse_damping_spec(self.damping),
            sigma=self.sigma,
        )

    def xi_weight(self):
        if self.xi is not None:
            return parse_xi_spec(self.xi)
        return parse_kernel_spec(self.kernel).natural_xi()

    def memory_modulus(self):
        if self.modulus is not None:
            return parse_modulus_spec(self.modulus)
        return parse_kernel_spec(self.kernel).natural_modulus()

    def tail_start(self) -> float:
        return self.t1 if self.t1 is not None else 0.25 * self.T

    def initial_coeffs(self, basis, grams):
        return (
            _initial_vector(self.initial_u, basis, grams),
            _initial_vector(self.initial_v, basis, grams),
        )

    def validate(self) -> list:
        """Collect every semantic problem; empty list means valid."""
        errs = []
        if self.spatial_dim not in (1, 2):
            errs.append("space.dim must be 1 or 2")
        if self.n < 1:
            errs.append("space.n must be >= 1")
        if self.L <= 0:
            errs.append("space.L must be positive")
        if self.dt <= 0:
            errs.append("time.dt must be positive")
        if self.T < 0:
            errs.append("time.T must be nonnegative")
        if self.rho < 0:
            errs.append("physics.rho must be nonnegative")
        if self.k < 0:
            errs.append("physics.k must be nonnegative")
        if self.stride < 1:
            errs.append("output.stride must be >= 1")
        if not 0 < self.delta < 1:
            errs.append("diagnostics.delta must lie in (0, 1)")
        for name, spec, parser in (
            ("physics.kernel", self.kernel, parse_kernel_spec),
            ("physics.damping", self.damping, parse_damping_spec),
        ):
            try:
                parser(spec)
            except Exception as exc:
                errs.append(f"{name}: {exc}")
        if self.xi is not None:
            try:
                parse_xi_spec(self.xi)
            except Exception as exc:
                errs.append(f"physics.xi: {exc}")
        if self.modulus is not None:
            try:
                parse_modulus_spec(self.modulus)
            except Exception as exc:
                errs.append(f"physics.modulus: {exc}")
        dim = self.n**self.spatial_dim
        for name, spec in (("initial.u", self.initial_u), ("initial.v", self.initial_v)):
            try:
                _check_initial_spec(spec, dim)
            except Exception as exc:
                errs.append(f"{name}: {exc}")
        return errs


# --- initial data -------------------------------------------------------


def _check_initial_spec(spec: str, dim: int) -> None:
    spec = spec.strip()
    if spec == "zero":
        return
    if spec.startswith("table(") and spec.endswith(")"):
        return
    for part in spec.split("+"):
        part = part.strip()
        if not (part.startswith("mode(") and part.endswith(")")):
            raise ScenarioError(f"unrecognized initial-data term {part!r}")
        args = part[5:-1].split(",")
        if len(args) != 2:
            raise ScenarioError(f"mode term needs (index, amplitude), got {part!r}")
        j = int(args[0])
        float(args[1])
        if not 1 <= j <= dim:
            raise ScenarioError(f"mode index {j} outside 1..{dim}")


def _initial_vector(spec: str, basis, grams) -> np.ndarray:
    spec = spec.strip()
    g = np.zeros(basis.dim)
    if spec == "zero":
        return g
    if spec.startswith("table(") and spec.endswith(")"):
        path = spec[6:-1].strip()
        if basis.spatial_dim != 1:
            raise ScenarioError("tabulated initial data is one-dimensional only")
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        if data.shape[1] != 2:
            raise ScenarioError("tabulated initial data needs two columns (x, value)")
        xs, vals = data[:, 0], data[:, 1]
        return project_initial(lambda x: np.interp(x, xs, vals), basis, grams)
    for part in spec.split("+"):
        part = part.strip()
        args = part[5:-1].split(",")
        g[int(args[0]) - 1] += float(args[1])
    return g


# --- parsing ------------------------------------------------------------


def _set_field(kwargs: dict, errors: list, section: str, key: str, raw: str) -> None:
    schema = _SCHEMA.get(section)
    if schema is None or key not in schema:
        errors.append(f"unknown key [{section}] {key}")
        return
    typ = schema[key]
    try:
        value = raw.strip() if typ is str else typ(raw.strip())
    except ValueError:
        errors.append(f"[{section}] {key}: cannot parse {raw!r} as {typ.__name__}")
        return
    kwargs[_FIELD_OF[(section, key)]] = value


def parse_scenario_text(text: str, origin: str = "<config>") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive: T and t differ
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ScenarioError(f"config parse error: {exc}") from exc
    errors: list = []
    kwargs: dict = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in cp.items(section):
            _set_field(kwargs, errors, section, key, raw)
    if errors:
        raise ScenarioError("; ".join(errors))
    scn = Scenario(**kwargs)
    problems = scn.validate()
    if problems:
        raise ScenarioError("; ".join(problems))
    return scn


def parse_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read(), origin=path)


def effective_config(scn: Scenario) -> str:
    """Every field written out explicitly; reparsing yields an equal Scenario."""
    out = io.StringIO()
    by_section: dict = {}
    for (section, key), fname in _FIELD_OF.items():
        value = getattr(scn, fname)
        if value is None:
            continue
        by_section.setdefault(section, []).append((key, value))
    for section in _SCHEMA:
        items = by_section.get(section)
        if not items:
            continue
        out.write(f"[{section}]\n")
        for key, value in items:
            text = repr(value) if isinstance(value, float) else str(value)
            out.write(f"{key} = {text}\n")
        out.write("\n")
    return out.getvalue()


# --- presets ------------------------------------------------------------

PRESETS = {
    "exp-linear": Scenario(
        kernel="exp(0.5,1.0)", damping="damp-linear(1)", rho=0.0, k=0.5, a=0.25
    ),
    "exp-cubic": Scenario(
        kernel="exp(0.5,1.0)", damping="damp-cubic(0.5)", rho=0.0, k=0.5, a=0.25
    ),
    "power-linear": Scenario(
        kernel="power(0.5,2.0)", damping="damp-linear(1)", rho=0.0, k=0.5, a=0.25
    ),
    "power-cubic": Scenario(
        kernel="power(0.5,2.0)", damping="damp-cubic(0.5)", rho=0.0, k=0.5, a=0.25
    ),
    "exp-fast-linear": Scenario(
        kernel="exp(0.3,2.0)", damping="damp-linear(0.5)", rho=1.0, k=0.5, sigma=0.0, a=0.25
    ),
    "power-steep-cubic": Scenario(
        kernel="power(0.4,3.0)", damping="damp-cubic(0.5)", rho=1.0, k=0.5, sigma=0.0, a=0.25
    ),
    "conservative": Scenario(
        kernel="none", damping="none", rho=0.0, k=0.0, sigma=0.0,
        initial_u="mode(1,0.1)", dt=1e-3, T=62.832, a=0.25,
    ),
    "well-certified": Scenario(
        kernel="exp(0.5,1.0)", damping="damp-linear(1)", rho=0.0, k=2.0, a=0.25, T=10.0
    ),
}


def load_scenario(name_or_path: str) -> Scenario:
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    import os

    if os.path.exists(name_or_path):
        return parse_scenario(name_or_path)
    raise ScenarioError(
        f"{name_or_path!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a config file"
    )


def with_overrides(scn: Scenario, **kwargs) -> Scenario:
    return replace(scn, **kwargs)
