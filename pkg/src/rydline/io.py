"""CSV/JSON artifacts and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from .constants import HARTREE_TO_GHZ
from .curves import PotentialCurve


def _num(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_curve_csv(curve: PotentialCurve, path, species: str = "", included_L=None) -> Path:
    """Curve CSV with ``# key: value`` header comments."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if included_L is None:
        included_L = curve.meta.get("included_L", [curve.L] if curve.L is not None else [])
    header = {
        "species": species,
        "n": curve.n_ref,
        "M": curve.M,
        "label": curve.label,
        "L": "" if curve.L is None else curve.L,
        "included_L": ",".join(str(L) for L in included_L),
        "provenance": curve.provenance,
        "includes_polarization": str(curve.includes_polarization).lower(),
    }
    with path.open("w", newline="") as fh:
        for k, v in header.items():
            fh.write(f"# {k}: {v}\n")
        fh.write("R,V_hartree,V_GHz\n")
        for R, V in zip(curve.R, curve.V):
            fh.write(f"{_num(R)},{_num(V)},{_num(V * HARTREE_TO_GHZ)}\n")
    return path


def read_curve_csv(path) -> tuple[PotentialCurve, dict]:
    path = Path(path)
    meta, rows = {}, []
    with path.open() as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = v.strip()
            elif line.strip() and not line.startswith("R,"):
                rows.append([float(x) for x in line.split(",")[:2]])
    if not rows:
        raise ValueError(f"curve file {path} has no samples")
    arr = np.array(rows)
    L = int(meta["L"]) if meta.get("L") else None
    curve = PotentialCurve(
        M=int(meta.get("M", 0)),
        label=meta.get("label", ""),
        n_ref=int(meta["n"]),
        R=arr[:, 0],
        V=arr[:, 1],
        provenance=meta.get("provenance", "diagonalization"),
        includes_polarization=meta.get("includes_polarization", "false") == "true",
        L=L,
    )
    return curve, meta


def write_table_csv(path, columns: dict, header: dict | None = None) -> Path:
    """Generic CSV: optional ``# key: value`` lines then named columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    with path.open("w", newline="") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow(["" if (isinstance(x, float) and np.isnan(x)) else (_num(x) if np.issubdtype(type(x), np.floating) else x) for x in row])
    return path


def read_table_csv(path) -> dict:
    path = Path(path)
    with path.open() as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(lines)
    names = next(reader)
    data = {k: [] for k in names}
    for row in reader:
        for k, x in zip(names, row):
            data[k].append(float(x) if x != "" else np.nan)
    return {k: np.array(v) for k, v in data.items()}


def write_spectrum_csv(path, spectrum, V_eff=None, delta_eps=None) -> Path:
    e = spectrum.energies
    n = len(e)
    V_eff = np.full(n, np.nan) if V_eff is None else np.asarray(V_eff)
    de = np.full(n, np.nan)
    if delta_eps is not None:
        de[1:] = delta_eps
    return write_table_csv(
        path,
        {"v": spectrum.v, "epsilon_hartree": e, "epsilon_GHz": e * HARTREE_TO_GHZ, "V_eff": V_eff, "delta_eps": de},
        header={"m_AB": spectrum.m_AB, "J": spectrum.J, "wall_R": spectrum.wall_R, "box_R": spectrum.box_R, "curve": spectrum.curve_label},
    )


def write_wavefunction_csv(path, z, rho, value) -> Path:
    z, rho, value = (np.ravel(a) for a in np.broadcast_arrays(z, rho, value))
    return write_table_csv(path, {"z": z, "rho": rho, "value": value})


def config_hash(config: dict) -> str:
    blob = json.dumps(_jsonable(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def versions() -> dict:
    import numba
    import scipy

    from . import __version__, kernels

    return {
        "rydline": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "kernel_backend": kernels.BACKEND,
    }


def write_manifest(out_dir, command: str, config: dict, species_digest: str | None, outputs) -> Path:
    """Manifest with config and species hashes; contains no timestamps."""
    outputs = sorted(str(Path(p).name) for p in outputs)
    man = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "species_hash": species_digest,
        "versions": versions(),
        "outputs": outputs,
    }
    return write_json(Path(out_dir) / f"manifest_{command}.json", man)
