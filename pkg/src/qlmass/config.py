"""Scenario files: a small TOML schema describing one full run.

Example::

    [ambient]
    n = 3
    k = 1.0

    [surface]
    kind = "perturbed_sphere"   # sphere | perturbed_sphere | profile
    r0 = 1.0
    amp = 0.05
    mode = 2
    N = 128
    # file = "shape.txt"        # kind = "profile": header "n k N", then N radii

    [boundary]
    mode = "scale"              # scale | profile
    alpha = 0.9                 # H = alpha * H0
    # file = "H.txt"            # mode = "profile": header "n k N", then N values

    [flow]
    t_end = 2.0
    dt = 0.01
    delta_convex = 0.5

    [exterior]
    rho_max = 10.0
    levels = 2000

    [solver]
    tolerance = 1e-10
    eps_causal = 1e-8
    monotone_allowance = 2e-3

    [mass]
    zeta_seed = 0
    zeta_count = 8

    [output]
    dir = "out"

Relative file paths are resolved against the directory of the scenario file.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .geometry import RadialSurface
from .minkowski import AmbientSpace


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "ambient": {"n": 3, "k": 1.0},
    "surface": {"kind": "sphere", "r0": 1.0, "amp": 0.0, "mode": 2, "N": 128},
    "boundary": {"mode": "scale", "alpha": 1.0},
    "flow": {"t_end": 2.0, "dt": 0.01, "delta_convex": 0.5},
    "exterior": {"rho_max": 10.0, "levels": 2000},
    "solver": {"tolerance": 1e-10, "eps_causal": 1e-8, "monotone_allowance": 2e-3},
    "mass": {"zeta_seed": 0, "zeta_count": 8},
    "output": {"dir": "out"},
}

_KINDS = ("sphere", "perturbed_sphere", "profile")


def _merge(raw: dict) -> dict:
    out = copy.deepcopy(DEFAULTS)
    for section, values in raw.items():
        if section not in out:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, val in values.items():
            allowed = set(out[section]) | ({"file"} if section in ("surface", "boundary") else set())
            if key not in allowed:
                raise ConfigError(f"unknown key {section}.{key}")
            out[section][key] = val
    return out


def read_columns(path: Path, names) -> dict:
    """Numeric columns of a comma-separated file with a header row; ``#`` lines are skipped."""
    with open(path, newline="") as fh:
        rows = [line for line in fh if line.strip() and not line.startswith("#")]
    reader = csv.DictReader(rows)
    missing = [nm for nm in names if nm not in (reader.fieldnames or [])]
    if missing:
        raise ConfigError(f"{path}: missing columns {missing}")
    data = {nm: [] for nm in names}
    for row in reader:
        for nm in names:
            data[nm].append(float(row[nm]))
    return {nm: np.array(v) for nm, v in data.items()}


def read_profile_file(path: Path):
    """Plain-text per-cell profile: a header line ``n k N`` then N numbers.

    Lines starting with ``#`` are ignored; values may be split over lines.
    """
    tokens = []
    with open(path) as fh:
        for line in fh:
            if line.strip() and not line.lstrip().startswith("#"):
                tokens.extend(line.replace(",", " ").split())
    try:
        n, k, N = int(tokens[0]), float(tokens[1]), int(tokens[2])
        values = np.array([float(x) for x in tokens[3:]])
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: expected a header 'n k N' followed by N values") from exc
    if values.size != N:
        raise ConfigError(f"{path}: header says N={N} but {values.size} values follow")
    return n, k, values


def write_profile_file(path, n: int, k: float, values):
    values = np.asarray(values, dtype=float)
    lines = [f"{n} {k!r} {values.size}"] + ["%.17g" % x for x in values]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class Scenario:
    data: dict
    base_dir: Path

    @classmethod
    def from_dict(cls, raw: dict, base_dir=".") -> "Scenario":
        sc = cls(_merge(raw), Path(base_dir))
        sc.validate()
        return sc

    @classmethod
    def from_toml(cls, path) -> "Scenario":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw, path.parent)

    def section(self, name: str) -> dict:
        return self.data[name]

    def resolve(self, name) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.base_dir / p

    def validate(self):
        d = self.data
        try:
            AmbientSpace(int(d["ambient"]["n"]), float(d["ambient"]["k"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[ambient]: {exc}") from exc
        s = d["surface"]
        if s["kind"] not in _KINDS:
            raise ConfigError(f"surface.kind must be one of {_KINDS}")
        if s["kind"] == "profile":
            if "file" not in s or not self.resolve(s["file"]).is_file():
                raise ConfigError("surface.file must name an existing profile file")
        elif float(s["r0"]) <= 0 or int(s["N"]) < 2:
            raise ConfigError("surface needs r0 > 0 and N >= 2")
        b = d["boundary"]
        if b["mode"] == "scale":
            if not 0 < float(b["alpha"]) <= 1:
                raise ConfigError("boundary.alpha must lie in (0, 1]")
        elif b["mode"] == "profile":
            if "file" not in b or not self.resolve(b["file"]).is_file():
                raise ConfigError("boundary.file must name an existing file")
        else:
            raise ConfigError("boundary.mode must be 'scale' or 'profile'")
        f = d["flow"]
        if float(f["t_end"]) <= 0 or float(f["dt"]) <= 0 or float(f["delta_convex"]) <= 0:
            raise ConfigError("flow.t_end, flow.dt and flow.delta_convex must be positive")
        e = d["exterior"]
        if float(e["rho_max"]) <= 0 or int(e["levels"]) < 1:
            raise ConfigError("exterior.rho_max must be positive and exterior.levels >= 1")
        for key, val in d["solver"].items():
            if float(val) <= 0:
                raise ConfigError(f"solver.{key} must be positive")
        if int(d["mass"]["zeta_count"]) < 0:
            raise ConfigError("mass.zeta_count must be non-negative")

    @property
    def ambient(self) -> AmbientSpace:
        a = self.data["ambient"]
        return AmbientSpace(int(a["n"]), float(a["k"]))

    def surface(self) -> RadialSurface:
        s = self.data["surface"]
        amb = self.ambient
        try:
            if s["kind"] == "sphere":
                return RadialSurface.sphere(amb, float(s["r0"]), int(s["N"]))
            if s["kind"] == "perturbed_sphere":
                return RadialSurface.perturbed_sphere(amb, float(s["r0"]), float(s["amp"]),
                                                      int(s["mode"]), int(s["N"]))
            return RadialSurface.profile(amb, self._profile(s["file"]))
        except ValueError as exc:
            raise ConfigError(f"[surface]: {exc}") from exc

    def boundary_H(self, H0: np.ndarray) -> np.ndarray:
        b = self.data["boundary"]
        if b["mode"] == "scale":
            return float(b["alpha"]) * H0
        H = self._profile(b["file"])
        if H.shape != H0.shape:
            raise ConfigError("boundary profile and surface use different grids")
        return H

    def _profile(self, name) -> np.ndarray:
        n, k, values = read_profile_file(self.resolve(name))
        amb = self.ambient
        if n != amb.n or k != amb.k:
            raise ConfigError(f"{name}: profile header (n={n}, k={k}) does not match [ambient]")
        return values

    @property
    def output_dir(self) -> Path:
        return self.resolve(self.data["output"]["dir"])

    def canonical(self) -> dict:
        """Resolved settings plus the digests of any referenced files."""
        d = copy.deepcopy(self.data)
        d.pop("output")
        for section in ("surface", "boundary"):
            if "file" in d[section]:
                blob = self.resolve(d[section]["file"]).read_bytes()
                d[section]["file"] = hashlib.sha256(blob).hexdigest()
        return d

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def parse_surface_spec(spec: str) -> dict:
    """``sphere:r0=1`` or ``perturbed_sphere:r0=1,amp=0.05,mode=2`` or ``profile:@path``."""
    kind, _, rest = spec.partition(":")
    if kind not in _KINDS:
        raise ConfigError(f"unknown surface kind {kind!r}")
    if kind == "profile":
        if not rest:
            raise ConfigError("profile surfaces need a file: profile:@shape.txt")
        return {"kind": kind, "file": rest[1:] if rest.startswith("@") else rest}
    out = {"kind": kind}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq or key not in ("r0", "amp", "mode", "N"):
            raise ConfigError(f"bad surface parameter {item!r}")
        try:
            out[key] = int(val) if key in ("mode", "N") else float(val)
        except ValueError as exc:
            raise ConfigError(f"bad value in {item!r}") from exc
    return out
