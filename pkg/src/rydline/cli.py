"""Command-line front end.

Every subcommand writes plot-ready CSV/JSON into ``--out`` together with a
manifest (config hash, species hash, library versions) and prints a one-line
summary per curve or spectrum.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import basis as rb
from . import io as rio
from .constants import HARTREE_TO_GHZ, MOLECULE_LABELS, SYMMETRY_M
from .species import ConfigError, load_species, species_hash, species_to_dict

LABEL_L = {v: k for k, v in MOLECULE_LABELS.items()}


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _parse_L(text: str) -> list[int]:
    try:
        Ls = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise ConfigError(f"--L expects a comma-separated list of integers, got {text!r}") from None
    if not Ls or min(Ls) < 0:
        raise ConfigError("--L needs non-negative partial waves")
    return Ls


def _energy(x, units):
    return (x * HARTREE_TO_GHZ, "GHz") if units == "ghz" else (x, "Eh")


def _r_grid(args, n, allow_beyond=False):
    rc = rb.classical_radius(n)
    r_max = rc if args.r_max is None else args.r_max
    r_min = args.r_min
    if args.points < 2:
        raise ConfigError("--points must be at least 2")
    if not 0 < r_min < r_max:
        raise ConfigError(f"need 0 < r-min < r-max, got {r_min:g}, {r_max:g}")
    if r_max > rc and not allow_beyond:
        raise ConfigError(f"R={r_max:g} beyond classical radius {rc:g} (R_c = 2 n^2 for n={n})")
    return np.linspace(r_min, r_max, args.points)


def _species(args):
    return load_species(args.species)


def _models(sp, Ls, args):
    born = not args.tables
    return {L: sp.phase_model(L, force_born=born and L >= 2) for L in Ls}


def _check_table_range(models, n, R_grid):
    k = rb.local_momentum(n, R_grid)[0]
    for L, m in models.items():
        lo, hi = m.k_range
        bad = (k < lo) | (k > hi)
        if np.any(bad):
            R_bad = R_grid[np.argmax(bad)]
            raise ConfigError(f"R={R_bad:g} gives k={k[np.argmax(bad)]:.5g} outside the L={L} phase-shift table range [{lo:.5g}, {hi:.5g}]")


def _basis(sp, args, M):
    defects = sp.quantum_defects if args.quantum_defects else ()
    return rb.build_basis(args.n, M, defects, window=args.window)


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _finish(args, sp, outputs):
    rio.write_manifest(_out(args), args.command, _config(args), species_hash(sp) if sp is not None else None, outputs)


def _symmetry(args) -> int:
    return SYMMETRY_M[args.symmetry]


def _selected(curves, label):
    if label:
        return [c for c in curves if c.label == label]
    return [c for c in curves if c.label != "manifold"]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_species(args):
    sp = _species(args)
    out = _out(args)
    path = rio.write_json(out / "species.json", {"species": species_to_dict(sp), "reduced_mass_me": sp.reduced_mass, "hash": species_hash(sp)})
    alpha_bars = {}
    from .scattering import born_coefficient

    for L in (2, 3, 4):
        alpha_bars[L] = born_coefficient(L, sp.polarizability)
    print(f"species {sp.name}: alpha={sp.polarizability:g} a0^3, m_AB={sp.reduced_mass:.6g} me, " + ", ".join(f"alpha_bar_{L}={v:.6g}" for L, v in alpha_bars.items()))
    _finish(args, sp, [path])


def cmd_pec(args):
    from .pec import adiabatic_curves

    sp = _species(args)
    M = _symmetry(args)
    Ls = _parse_L(args.L)
    R = _r_grid(args, args.n)
    models = _models(sp, Ls, args)
    _check_table_range(models, args.n, R)
    chans = _basis(sp, args, M)
    curves, _ = adiabatic_curves(chans, M, R, species=sp, included_L=Ls, include_polarization=args.with_polarization, models=models, n_ref=args.n, keep_states=False)
    out = _out(args)
    written = []
    for i, c in enumerate(_selected(curves, args.label)):
        p = rio.write_curve_csv(c, out / f"pec_{args.symmetry}_{c.label}_{i}.csv", species=sp.name, included_L=Ls)
        written.append(p)
        j = int(np.argmin(c.V))
        e, u = _energy(c.V[j], args.units)
        print(f"{c.label} M={M}: min {e:.6g} {u} at R={c.R[j]:.6g} a0 -> {p.name}")
    if not written:
        print(f"no shifted curves for M={M} with L={Ls}")
    _finish(args, sp, written)


def cmd_ionpair(args):
    from .ionpair import expansion_curve, model_curve

    sp = _species(args)
    Ls = _parse_L(args.L)
    R = _r_grid(args, args.n, allow_beyond=True)
    out = _out(args)
    written = []
    for L in Ls:
        model = sp.phase_model(L, force_born=not args.tables)
        c = model_curve(model, args.n, R)
        written.append(rio.write_curve_csv(c, out / f"ionpair_L{L}.csv", species=sp.name, included_L=[L]))
        if L >= 2:
            xc = expansion_curve(sp.polarizability, L, args.n, R)
            written.append(rio.write_curve_csv(xc, out / f"expansion_L{L}.csv", species=sp.name, included_L=[L]))
        j = int(np.argmin(c.V))
        e, u = _energy(c.V[j], args.units)
        print(f"ion-pair L={L}: min {e:.6g} {u} at R={c.R[j]:.6g} a0")
    _finish(args, sp, written)


def cmd_charge(args):
    from .ionpair import effective_charge

    sp = _species(args)
    R = _r_grid(args, args.n)
    out = _out(args)
    cols = {"R": R}
    for L in _parse_L(args.L):
        model = sp.phase_model(L, force_born=not args.tables)
        q = effective_charge(model, args.n, R)
        cols[f"Q_L{L}"] = q
        print(f"charge L={L}: Q in [{q.min():.6g}, {q.max():.6g}] e, n^3 |Q| = {np.mean(np.abs(q)) * args.n**3:.6g}")
    p = rio.write_table_csv(out / "charge.csv", cols, header={"species": sp.name, "n": args.n})
    _finish(args, sp, [p])


def cmd_softcore(args):
    from .pec import adiabatic_curves, find_curve
    from .softcore import calibrate_beta, softcore_curves

    sp = _species(args)
    M = _symmetry(args)
    R = _r_grid(args, args.n)
    beta = args.beta if args.beta is not None else calibrate_beta(sp.polarizability)
    chans = rb.build_basis(args.n, M)
    sc, _ = softcore_curves(chans, M, R, sp.polarizability, beta)
    label = args.label or MOLECULE_LABELS[max(2, M)]
    L = LABEL_L[label]
    out = _out(args)
    written = []
    s_curve = find_curve(sc, label)
    written.append(rio.write_curve_csv(s_curve, out / f"softcore_{args.symmetry}_{label}.csv", species=sp.name, included_L=[L]))
    summary = {"beta": beta, "label": label, "M": M}
    if L <= 2:
        pc, _ = adiabatic_curves(chans, M, R, species=sp, included_L=[L], born=True, keep_states=False)
        p_curve = find_curve(pc, label)
        rel = np.abs(s_curve.V / p_curve.V - 1.0)
        summary["max_relative_deviation"] = float(rel.max())
        written.append(rio.write_curve_csv(p_curve, out / f"pseudopotential_{args.symmetry}_{label}.csv", species=sp.name, included_L=[L]))
        print(f"soft-core {label} M={M}: beta={beta:.6g} a0, max |V_sc/V_pp - 1| = {rel.max():.4g} on R=[{R[0]:g},{R[-1]:g}]")
    else:
        print(f"soft-core {label} M={M}: beta={beta:.6g} a0")
    written.append(rio.write_json(out / "softcore_summary.json", summary))
    _finish(args, sp, written)


def _state_at(sp, args, M, R_point):
    from .pec import adiabatic_curves, find_curve

    chans = _basis(sp, args, M)
    Ls = _parse_L(args.L)
    curves, states = adiabatic_curves(chans, M, np.array([R_point]), species=sp, included_L=Ls, models=_models(sp, Ls, args), n_ref=args.n)
    label = args.label or MOLECULE_LABELS[max(Ls)]
    c = find_curve(curves, label)
    return states[curves.index(c)][0]


def cmd_wavefunction(args):
    from .pec import electronic_wavefunction, ring_node_count

    sp = _species(args)
    M = _symmetry(args)
    R0 = args.R if args.R is not None else float(args.n**2)
    if R0 > rb.classical_radius(args.n):
        raise ConfigError(f"R={R0:g} beyond classical radius {rb.classical_radius(args.n):g}")
    st = _state_at(sp, args, M, R0)
    ext = args.extent
    z = np.linspace(R0 - ext, R0 + ext, args.grid)
    rho = np.linspace(0.0, ext, args.grid // 2 + 1)
    Z, P = np.meshgrid(z, rho, indexing="ij")
    fields = electronic_wavefunction(st, Z, P)
    out = _out(args)
    written = [rio.write_wavefunction_csv(out / f"wavefunction_{k}.csv", Z, P, v) for k, v in fields.items()]
    nodes = ring_node_count(st, radius=args.ring_radius)
    print(f"{st.label} M={M} at R={R0:g}: E={st.eigenvalue:.6g} Eh, ring nodes (radius {args.ring_radius:g}) = {nodes}")
    _finish(args, sp, written)


def cmd_dipole(args):
    from .pec import adiabatic_curves, dipole_moment, find_curve

    sp = _species(args)
    M = _symmetry(args)
    Ls = _parse_L(args.L)
    R = _r_grid(args, args.n)
    chans = _basis(sp, args, M)
    curves, states = adiabatic_curves(chans, M, R, species=sp, included_L=Ls, models=_models(sp, Ls, args), n_ref=args.n)
    label = args.label or MOLECULE_LABELS[max(Ls)]
    c = find_curve(curves, label)
    d = np.array([dipole_moment(s) for s in states[curves.index(c)]])
    out = _out(args)
    p = rio.write_table_csv(out / f"dipole_{args.symmetry}_{label}.csv", {"R": R, "d_au": d[:, 0], "d_debye": d[:, 1]}, header={"species": sp.name, "n": args.n, "M": M, "label": label})
    j = int(np.argmax(np.abs(d[:, 1])))
    print(f"{label} M={M}: max |d| = {abs(d[j, 1]):.6g} D at R={R[j]:.6g} a0")
    _finish(args, sp, [p])


def cmd_vibr(args):
    from .ionpair import model_curve, series_constants
    from .pec import adiabatic_curves, find_curve
    from .vibronic import analyze, bound_states, potential_function

    sp = _species(args)
    M = _symmetry(args)
    L = max(_parse_L(args.L))
    mass_amu = args.mass_amu if args.mass_amu is not None else sp.mass_amu
    from .constants import AMU_TO_ELECTRON_MASS

    if args.mass_amu is not None:
        m_AB = 0.5 * mass_amu * AMU_TO_ELECTRON_MASS
    else:
        m_AB = sp.reduced_mass
    rc = rb.classical_radius(args.n)
    if args.curve:
        curve, _ = rio.read_curve_csv(args.curve)
    elif args.source == "ionpair":
        curve = model_curve(sp.phase_model(L, force_born=not args.tables), args.n, np.linspace(args.wall, rc, args.points), M=M)
    else:
        R = np.linspace(args.wall, rc, args.points)[:-1]
        curves, _ = adiabatic_curves(_basis(sp, args, M), M, R, species=sp, included_L=[L], models=_models(sp, [L], args), n_ref=args.n, keep_states=False)
        curve = find_curve(curves, MOLECULE_LABELS[L])
    alpha = sp.polarizability if (args.with_polarization and not curve.includes_polarization) else None
    V = potential_function(curve, alpha=alpha)
    spec = bound_states(V, m_AB, J=args.J, wall_R=args.wall, box_R=3.0 * args.n**2, curve_label=curve.label)
    const = series_constants(L, args.n, m_AB, alpha=sp.polarizability)
    out = _out(args)
    written = [rio.write_json(out / "constants.json", const.to_dict())]
    summary = {"n_levels": len(spec), "v_max": const.v_max}
    Veff = de = None
    if len(spec) >= 10:
        res = analyze(spec, const, window=args.window_fraction)
        Veff, de = res["V_eff"], res["delta_eps"]
        summary.update({k: v for k, v in res.items() if k not in ("V_eff", "delta_eps")})
    written.append(rio.write_spectrum_csv(out / "spectrum.csv", spec, Veff, de))
    written.append(rio.write_json(out / "spectrum_summary.json", summary))
    msg = f"{curve.label} M={M} n={args.n}: {len(spec)} bound levels (v_max = {const.v_max})"
    if "V_eff_fit" in summary:
        f = summary["V_eff_fit"]
        msg += f", V_eff slope {f['slope']:.4f}, R^2 {f['r2']:.6f}, eta {f['eta_unit_slope']:.4f}"
    print(msg)
    _finish(args, sp, written)


def cmd_analyze(args):
    from .ionpair import SeriesConstants
    from .vibronic import VibrationalSpectrum, analyze

    data = rio.read_table_csv(args.spectrum)
    const = SeriesConstants.from_dict(rio.read_json(args.constants))
    spec = VibrationalSpectrum(v=data["v"].astype(int), energies=data["epsilon_hartree"], m_AB=const.m_AB, J=0, wall_R=np.nan, box_R=np.nan, step=np.nan)
    res = analyze(spec, const, window=args.window_fraction)
    out = _out(args)
    report = {k: v for k, v in res.items() if k not in ("V_eff", "delta_eps")}
    p = rio.write_json(out / "analysis.json", report)
    f, g = report["V_eff_fit"], report["delta_eps_fit"]
    print(f"eta = {f['eta']:.6g} (unit slope {f['eta_unit_slope']:.6g}), V_eff slope {f['slope']:.6g}, R^2 {f['r2']:.6g}; delta_eps slope {g['slope']:.6g}, R^2 {g['r2']:.6g}")
    rio.write_manifest(out, args.command, _config(args), None, [p])


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p, r_min=100.0, points=200, L="2", r_max=None):
    p.add_argument("--species", default="rb", help="species JSON file or bundled name (default: rb)")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--symmetry", choices=sorted(SYMMETRY_M, key=SYMMETRY_M.get), default="delta")
    p.add_argument("--L", default=L, help="comma-separated partial waves")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--born", action="store_true", help="Born phase shifts for L >= 2 (default)")
    g.add_argument("--tables", action="store_true", help="use tabulated phase shifts from the species file")
    p.add_argument("--r-min", type=float, default=r_min)
    p.add_argument("--r-max", type=float, default=r_max, help="largest R (default: R_c = 2 n^2)" if r_max is None else None)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--with-polarization", action="store_true")
    p.add_argument("--quantum-defects", action="store_true", help="include the species quantum defects in the basis")
    p.add_argument("--window", type=float, default=1.0, help="basis window in effective quantum number")
    p.add_argument("--label", default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--units", choices=("au", "ghz"), default="au")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rydline", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("species", help="validate and summarise a species file")
    _common(p)
    p.set_defaults(func=cmd_species)

    p = sub.add_parser("pec", help="pseudopotential curves by diagonalisation")
    _common(p)
    p.set_defaults(func=cmd_pec)

    p = sub.add_parser("ionpair", help="ion-pair model and large-n expansion curves")
    _common(p, r_min=30.0)
    p.set_defaults(func=cmd_ionpair)

    p = sub.add_parser("charge", help="effective perturber charge")
    _common(p, r_min=50.0)
    p.set_defaults(func=cmd_charge)

    p = sub.add_parser("softcore-check", help="soft-core perturbation theory versus pseudopotential")
    _common(p, r_min=300.0, points=10, r_max=1200.0)
    p.add_argument("--beta", type=float, default=None, help="core radius (default: calibrated)")
    p.set_defaults(func=cmd_softcore)

    p = sub.add_parser("wavefunction", help="electronic wavefunction maps near the perturber")
    _common(p)
    p.add_argument("--R", type=float, default=None, help="internuclear distance (default n^2)")
    p.add_argument("--extent", type=float, default=100.0)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--ring-radius", type=float, default=20.0)
    p.set_defaults(func=cmd_wavefunction)

    p = sub.add_parser("dipole", help="electronic dipole moment along a curve")
    _common(p, points=60)
    p.set_defaults(func=cmd_dipole)

    p = sub.add_parser("vibr", help="vibrational levels on a curve")
    _common(p, points=3541)
    p.add_argument("--source", choices=("ionpair", "diagonalization"), default="ionpair")
    p.add_argument("--curve", default=None, help="curve CSV to use instead of --source")
    p.add_argument("--mass-amu", type=float, default=None, help="atomic mass for a homonuclear dimer")
    p.add_argument("--wall", type=float, default=30.0)
    p.add_argument("--J", type=int, default=0)
    p.add_argument("--window-fraction", type=float, default=0.3)
    p.set_defaults(func=cmd_vibr)

    p = sub.add_parser("analyze", help="Rydberg-series analysis of a spectrum CSV")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--constants", required=True)
    p.add_argument("--window-fraction", type=float, default=0.3)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_analyze)
    return ap


def _tag(args, exc) -> str:
    mod = type(exc).__module__.rsplit(".", 1)[-1]
    return args.command if mod in ("builtins", "species") else f"{args.command}/{mod}"


def run(argv=None) -> int:
    from .basis import NumericalError
    from .pec import BasisError
    from .scattering import PhaseShiftRangeError
    from .softcore import QuadratureError
    from .vibronic import SpectrumError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        args.func(args)
    except (NumericalError, QuadratureError, SpectrumError, np.linalg.LinAlgError) as exc:
        print(f"error [{_tag(args, exc)}]: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, PhaseShiftRangeError, BasisError, ValueError, FileNotFoundError, NotImplementedError) as exc:
        print(f"error [{_tag(args, exc)}]: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
