"""Species configuration and phase-shift tables.

A species file is JSON::

    {
      "name": "Rb",
      "polarizability_au": 319.2,
      "mass_amu": 86.909,
      "quantum_defects": [3.131, 2.646],
      "phase_shifts": {
        "2": {"model": "born"},
        "1": {"model": "table", "path": "rb_p.csv", "interpolation": "pchip"}
      },
      "partner": {"name": "Rb", "mass_amu": 86.909}
    }

``partner`` is optional; without it the molecule is homonuclear.  Table
paths are resolved relative to the species file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import AMU_TO_ELECTRON_MASS
from .scattering import PhaseShiftModel

DATA_DIR = Path(__file__).with_name("data")


class ConfigError(ValueError):
    """Invalid or inconsistent user input."""


def data_dir() -> Path:
    """Directory holding bundled species files, overridable by ``RYDLINE_DATA``."""
    env = os.environ.get("RYDLINE_DATA")
    return Path(env) if env else DATA_DIR


@dataclass(frozen=True)
class PhaseShiftTable:
    L: int
    k: np.ndarray
    delta: np.ndarray
    source: str = ""

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        d = np.asarray(self.delta, dtype=float)
        if k.ndim != 1 or k.shape != d.shape:
            raise ConfigError("phase-shift table needs matching 1-D k and delta columns")
        if len(k) < 4:
            raise ConfigError(f"phase-shift table needs at least 4 rows, got {len(k)}")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(d))):
            raise ConfigError("phase-shift table contains NaN or infinite entries")
        if np.any(np.diff(k) <= 0):
            raise ConfigError("phase-shift table momenta must be strictly increasing")
        if k[0] < 0:
            raise ConfigError("phase-shift table momenta must be non-negative")
        if self.L >= 1 and k[0] == 0 and abs(d[0]) > 1e-8:
            raise ConfigError(f"L={self.L} table violates the threshold law: delta(0) = {d[0]:g}")
        k.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "delta", d)


@dataclass(frozen=True)
class SpeciesData:
    name: str
    polarizability: float
    mass_amu: float
    quantum_defects: tuple[float, ...] = ()
    phase_shift_sources: dict = field(default_factory=dict)
    partner_mass_amu: float | None = None
    source_path: str | None = None

    def __post_init__(self):
        if not self.polarizability > 0:
            raise ConfigError("polarizability must be positive")
        if not self.mass_amu > 0:
            raise ConfigError("mass must be positive")
        if self.partner_mass_amu is not None and not self.partner_mass_amu > 0:
            raise ConfigError("partner mass must be positive")

    @property
    def atomic_mass(self) -> float:
        """Atomic mass in electron masses."""
        return self.mass_amu * AMU_TO_ELECTRON_MASS

    @property
    def partner_mass(self) -> float | None:
        return None if self.partner_mass_amu is None else self.partner_mass_amu * AMU_TO_ELECTRON_MASS

    @property
    def reduced_mass(self) -> float:
        """Nuclear reduced mass m_AB in electron masses."""
        other = self.atomic_mass if self.partner_mass is None else self.partner_mass
        return self.atomic_mass * other / (self.atomic_mass + other)

    def quantum_defect(self, l: int) -> float:
        return self.quantum_defects[l] if l < len(self.quantum_defects) else 0.0

    def phase_model(self, L: int, force_born: bool = False) -> PhaseShiftModel:
        """Phase-shift model for partial wave ``L``.

        Without an explicit entry, ``L >= 2`` falls back to the Born form.
        """
        if force_born:
            return PhaseShiftModel.born(L, self.polarizability)
        src = self.phase_shift_sources.get(L)
        if src is None or src.get("model", "born") == "born":
            if L < 2:
                raise ConfigError(f"no phase-shift table configured for L={L} (Born form needs L >= 2)")
            return PhaseShiftModel.born(L, self.polarizability)
        table = src.get("table")
        if table is None:
            table = load_phase_table(src["path"], L)
        return PhaseShiftModel.from_table(table, src.get("interpolation", "pchip"))


def _positive(raw, key):
    try:
        val = float(raw[key])
    except KeyError:
        raise ConfigError(f"missing field {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"malformed field {key!r}: {raw[key]!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"malformed field {key!r}: {raw[key]!r}")
    return val


def species_from_dict(raw: dict, base_dir: Path | None = None, source_path: str | None = None) -> SpeciesData:
    if not isinstance(raw, dict):
        raise ConfigError("species config must be a JSON object")
    name = str(raw.get("name", "unnamed"))
    alpha = _positive(raw, "polarizability_au")
    mass_amu = _positive(raw, "mass_amu")
    if alpha <= 0:
        raise ConfigError("polarizability must be positive")
    if mass_amu <= 0:
        raise ConfigError("mass must be positive")
    defects = raw.get("quantum_defects", []) or []
    try:
        defects = tuple(float(x) for x in defects)
    except (TypeError, ValueError):
        raise ConfigError(f"malformed field 'quantum_defects': {raw.get('quantum_defects')!r}") from None
    sources = {}
    for key, desc in (raw.get("phase_shifts") or {}).items():
        try:
            L = int(key)
        except ValueError:
            raise ConfigError(f"phase_shifts key must be an integer partial wave, got {key!r}") from None
        if not isinstance(desc, dict) or desc.get("model") not in ("born", "table"):
            raise ConfigError(f"phase_shifts[{key}] must be {{'model': 'born'}} or {{'model': 'table', 'path': ...}}")
        desc = dict(desc)
        if desc["model"] == "table":
            if "path" not in desc:
                raise ConfigError(f"phase_shifts[{key}] table entry needs a 'path'")
            p = Path(desc["path"])
            if not p.is_absolute() and base_dir is not None:
                p = base_dir / p
            desc["path"] = str(p)
        sources[L] = desc
    partner = raw.get("partner")
    partner_mass = None
    if partner is not None:
        partner_mass = _positive(partner, "mass_amu")
    return SpeciesData(
        name=name,
        polarizability=alpha,
        mass_amu=mass_amu,
        quantum_defects=defects,
        phase_shift_sources=sources,
        partner_mass_amu=partner_mass,
        source_path=source_path,
    )


def resolve_species_path(spec: str | os.PathLike) -> Path:
    """Accept a file path or a bare species name looked up in :func:`data_dir`."""
    p = Path(spec)
    if p.exists():
        return p
    cand = data_dir() / f"{spec}.json"
    if cand.exists():
        return cand
    raise ConfigError(f"species file not found: {spec}")


def load_species(path: str | os.PathLike) -> SpeciesData:
    p = resolve_species_path(path)
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed species file {p}: {exc}") from None
    return species_from_dict(raw, base_dir=p.parent, source_path=str(p))


def species_to_dict(sp: SpeciesData) -> dict:
    out = {
        "name": sp.name,
        "polarizability_au": sp.polarizability,
        "mass_amu": sp.mass_amu,
        "quantum_defects": list(sp.quantum_defects),
        "phase_shifts": {str(L): {k: v for k, v in d.items() if k != "table"} for L, d in sorted(sp.phase_shift_sources.items())},
    }
    if sp.partner_mass_amu is not None:
        out["partner"] = {"mass_amu": sp.partner_mass_amu}
    return out


def dump_species(sp: SpeciesData, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(species_to_dict(sp), indent=2, sort_keys=True) + "\n")


def species_hash(sp: SpeciesData) -> str:
    blob = json.dumps(species_to_dict(sp), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def load_phase_table(path: str | os.PathLike, L: int) -> PhaseShiftTable:
    """Read a ``k,delta`` CSV (atomic units, radians)."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"phase-shift table not found: {p}")
    rows = []
    with p.open(newline="") as fh:
        reader = csv.reader(line for line in fh if line.strip() and not line.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"phase-shift table {p} is empty")
        if [h.strip().lower() for h in header] != ["k", "delta"]:
            raise ConfigError(f"phase-shift table {p} must start with the header 'k,delta'")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ConfigError(f"{p}:{lineno}: expected two columns")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ConfigError(f"{p}:{lineno}: non-numeric entry") from None
    if not rows:
        raise ConfigError(f"phase-shift table {p} has no data rows")
    arr = np.array(rows)
    return PhaseShiftTable(L=L, k=arr[:, 0], delta=arr[:, 1], source=str(p))


def write_phase_table(table: PhaseShiftTable, path: str | os.PathLike) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("k,delta\n")
        for k, d in zip(table.k, table.delta):
            fh.write(f"{float(k)!r},{float(d)!r}\n")
