"""Command-line front end.

Subcommands:

* ``cdh spectrum``   -- lowest-k eigenenergies over a coupling grid (CSV)
* ``cdh observable`` -- all requested observables at a single point (JSON)
* ``cdh sweep``      -- observables over a (lambda, Delta) grid (CSV)
* ``cdh validate``   -- run the cross-builder/route/limit invariant suite (JSON)

All physical inputs are dimensionless ratios (lambda/Omega, Delta/Omega,
gamma/Omega) with Omega setting the energy scale. Outputs are deterministic:
identical bytes for repeated runs and for any worker count. Per-point wall
times are all zero unless --timings is passed, keeping the default output
reproducible.

Exit codes: 0 success, 1 config error, 2 numerical failure in a sweep point,
3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from cdh import boson, observables as obs_mod
from cdh.cdh import (
    DickeHeisenbergModel,
    RabiModel,
    Truncation,
    build_bare,
    build_cdh_dicke_heisenberg_closed_form,
    build_cdh_generic,
    build_cdh_rabi_closed_form,
    deep_strong_limit_cdh,
    dressing_values,
    squared_coupling_prefactor,
    system_hamiltonian,
)
from cdh.operators import ChainGeometry, pauli, sum_site_operator

SWEEP_HEADER = (
    "lambda_over_omega,delta_over_omega,representation,M_or_N,M_P,L,"
    "gamma_x,gamma_y,gamma_z,observable,value,wall_time_ms"
)
SPECTRUM_HEADER = "lambda_over_omega,delta_over_omega,representation,M_or_N,nu,energy,abs_dev_vs_ref"

CHAIN_ONLY = {"entropy", "structure_x", "structure_y", "structure_z"}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    steps: int

    def points(self) -> list[float]:
        if self.steps == 1:
            return [self.lo]
        return list(np.linspace(self.lo, self.hi, self.steps))


@dataclass(frozen=True)
class RunConfig:
    kind: str
    omega: float
    delta_over_omega: float
    lambda_over_omega: float
    gamma_over_omega: tuple[float, float, float]
    length: int
    periodic: bool
    truncation: Truncation
    representation: str
    grid_lambda: Axis
    grid_delta: Axis
    observables: tuple[str, ...]
    output_path: str | None


def _axis(raw, fallback: float) -> Axis:
    if raw is None:
        return Axis(fallback, fallback, 1)
    lo, hi, steps = float(raw["min"]), float(raw["max"]), int(raw["steps"])
    if lo > hi:
        raise ConfigError(f"grid axis has min {lo} > max {hi}")
    if steps < 1:
        raise ConfigError(f"grid axis needs steps >= 1, got {steps}")
    return Axis(lo, hi, steps)


def parse_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc

    model = raw.get("model", {})
    kind = model.get("kind", "rabi")
    if kind not in ("rabi", "dicke_heisenberg"):
        raise ConfigError(f"unknown model kind {kind!r}")
    omega = float(model.get("omega", 2.0))
    if omega <= 0:
        raise ConfigError("omega must be positive")
    gamma = tuple(float(g) for g in model.get("gamma_over_omega", (0.0, 0.0, 0.0)))
    if len(gamma) != 3:
        raise ConfigError("gamma_over_omega must have three entries")

    trunc_raw = raw.get("truncation", {})
    representation = raw.get("representation", "cdh")
    if representation not in ("cdh", "bare", "both"):
        raise ConfigError(f"unknown representation {representation!r}")
    cdh_levels = int(trunc_raw.get("cdh_levels", 0))
    bare_levels = int(trunc_raw.get("bare_levels", 0))
    if representation in ("cdh", "both") and cdh_levels < 1:
        raise ConfigError("representation 'cdh' requires truncation.cdh_levels >= 1")
    if representation in ("bare", "both") and bare_levels < 1:
        raise ConfigError("representation 'bare' requires truncation.bare_levels >= 1")
    cdh_levels = max(cdh_levels, 1)
    rotation_levels = int(trunc_raw.get("rotation_levels", max(cdh_levels, 20)))
    truncation = Truncation(
        cdh_levels=cdh_levels,
        rotation_levels=max(rotation_levels, cdh_levels),
        bare_levels=max(bare_levels, 1),
    )

    observable_list = tuple(raw.get("observables", ()))
    if not observable_list:
        raise ConfigError("config must request at least one observable")
    for spec in observable_list:
        name = spec.split(":")[0]
        if name not in ("mz", "entropy", "structure_x", "structure_y", "structure_z",
                        "sigma_z_thermal", "energy_levels"):
            raise ConfigError(f"unknown observable {spec!r}")
        if name in CHAIN_ONLY and kind == "rabi":
            raise ConfigError(f"observable {name!r} needs a chain model")

    grid = raw.get("grid") or {}
    return RunConfig(
        kind=kind,
        omega=omega,
        delta_over_omega=float(model.get("delta_over_omega", 0.5)),
        lambda_over_omega=float(model.get("lambda_over_omega", 0.0)),
        gamma_over_omega=gamma,
        length=int(model.get("length", 8)),
        periodic=bool(model.get("periodic", True)),
        truncation=truncation,
        representation=representation,
        grid_lambda=_axis(grid.get("lambda_over_omega"), float(model.get("lambda_over_omega", 0.0))),
        grid_delta=_axis(grid.get("delta_over_omega"), float(model.get("delta_over_omega", 0.5))),
        observables=observable_list,
        output_path=raw.get("output_path"),
    )


def build_model(cfg: RunConfig, lam_over_omega: float, delta_over_omega: float):
    if cfg.kind == "rabi":
        return RabiModel(delta=delta_over_omega * cfg.omega, omega=cfg.omega, lam=lam_over_omega * cfg.omega)
    return DickeHeisenbergModel(
        delta=delta_over_omega * cfg.omega,
        omega=cfg.omega,
        lam=lam_over_omega * cfg.omega,
        gamma=tuple(g * cfg.omega for g in cfg.gamma_over_omega),
        geometry=ChainGeometry(length=cfg.length, periodic=cfg.periodic),
    )


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    return f"{x:.17g}"


def _representations(cfg: RunConfig) -> list[str]:
    return ["bare", "cdh"] if cfg.representation == "both" else [cfg.representation]


def evaluate_observables(cfg: RunConfig, lam_over: float, delta_over: float, representation: str):
    """All requested observables at one grid point, reusing one spectrum.

    Returns (name, value, rotation_levels_used) triples.
    """
    model = build_model(cfg, lam_over, delta_over)
    trunc = cfg.truncation
    if representation == "cdh":
        spectrum = obs_mod.eigensolve(build_cdh_generic(model, trunc.cdh_levels))
    else:
        spectrum = obs_mod.eigensolve(build_bare(model, trunc.bare_levels))
    results = []
    for spec in cfg.observables:
        name, _, arg = spec.partition(":")
        if name == "mz":
            mp = trunc.rotation_levels if representation == "cdh" else 0
            value = obs_mod.magnetization_z(model, trunc, representation=representation, spectrum=spectrum)
        elif name == "entropy":
            mp = trunc.cdh_levels if representation == "cdh" else 0
            value = obs_mod.entanglement_entropy(model, trunc, representation=representation, spectrum=spectrum)
        elif name.startswith("structure_"):
            mp = trunc.cdh_levels if representation == "cdh" else 0
            value = obs_mod.structure_factor(model, trunc, name[-1], representation=representation, spectrum=spectrum)
        elif name == "sigma_z_thermal":
            temperature = float(arg) if arg else 1.0
            mp = trunc.cdh_levels if representation == "cdh" else 0
            value = obs_mod.thermal_sigma_z(model, trunc, temperature, representation=representation, spectrum=spectrum)
        elif name == "energy_levels":
            k = int(arg) if arg else 4
            mp = 0
            value = [float(e) for e in spectrum.eigenvalues[:k]]
        else:  # pragma: no cover - guarded by parse_config
            raise ConfigError(f"unknown observable {spec!r}")
        results.append((spec, value, mp))
    return results


def _sweep_point(args):
    cfg, lam_over, delta_over, timings = args
    rows = []
    failed = False
    for representation in _representations(cfg):
        m_or_n = cfg.truncation.cdh_levels if representation == "cdh" else cfg.truncation.bare_levels
        start = time.perf_counter()
        try:
            with threadpool_limits(limits=1):
                triples = evaluate_observables(cfg, lam_over, delta_over, representation)
        except Exception:
            failed = True
            triples = [(spec, float("nan"), 0) for spec in cfg.observables]
        elapsed_ms = (time.perf_counter() - start) * 1000.0 if timings else 0.0
        for spec, value, mp in triples:
            rows.append((lam_over, delta_over, representation, m_or_n, mp, spec, float(value), elapsed_ms))
    return rows, failed


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output {path}: {exc}") from exc


def cmd_sweep(cfg: RunConfig, out: str | None, workers: int, timings: bool) -> int:
    if any(spec.startswith("energy_levels") for spec in cfg.observables):
        raise ConfigError("energy_levels is not a sweep observable; use the spectrum command")
    length = cfg.length if cfg.kind == "dicke_heisenberg" else 0
    gammas = tuple(g * cfg.omega for g in cfg.gamma_over_omega) if cfg.kind == "dicke_heisenberg" else (0.0, 0.0, 0.0)
    tasks = [
        (cfg, lam_over, delta_over, timings)
        for lam_over in cfg.grid_lambda.points()
        for delta_over in cfg.grid_delta.points()
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_sweep_point, tasks))
    else:
        outputs = [_sweep_point(task) for task in tasks]

    rows = [row for point_rows, _ in outputs for row in point_rows]
    any_failed = any(failed for _, failed in outputs)
    rows.sort(key=lambda r: (r[0], r[1], r[5], r[2]))
    lines = [SWEEP_HEADER]
    for lam_over, delta_over, representation, m_or_n, mp, spec, value, ms in rows:
        lines.append(
            f"{_fmt(lam_over)},{_fmt(delta_over)},{representation},{m_or_n},{mp},{length},"
            f"{_fmt(gammas[0])},{_fmt(gammas[1])},{_fmt(gammas[2])},{spec},{_fmt(value)},{_fmt(ms)}"
        )
    _write_text(out or cfg.output_path, "\n".join(lines) + "\n")
    if any_failed:
        print("sweep finished with failed points (NaN rows written)", file=sys.stderr)
        return 2
    return 0


def cmd_spectrum(cfg: RunConfig, out: str | None) -> int:
    ks = [int(spec.split(":")[1]) if ":" in spec else 4 for spec in cfg.observables if spec.startswith("energy_levels")]
    if not ks:
        raise ConfigError("the spectrum command needs an energy_levels:k observable")
    k = ks[0]
    lines = [SPECTRUM_HEADER]
    failed = False
    for lam_over in cfg.grid_lambda.points():
        for delta_over in cfg.grid_delta.points():
            model = build_model(cfg, lam_over, delta_over)
            per_rep: dict[str, np.ndarray] = {}
            for representation in _representations(cfg):
                try:
                    with threadpool_limits(limits=1):
                        if representation == "cdh":
                            h = build_cdh_generic(model, cfg.truncation.cdh_levels)
                        else:
                            h = build_bare(model, cfg.truncation.bare_levels)
                        per_rep[representation] = np.linalg.eigvalsh(h)[:k]
                except Exception:
                    failed = True
                    per_rep[representation] = np.full(k, float("nan"))
            for representation, energies in per_rep.items():
                m_or_n = cfg.truncation.cdh_levels if representation == "cdh" else cfg.truncation.bare_levels
                reference = per_rep.get("bare")
                for nu, energy in enumerate(energies):
                    if representation == "cdh" and reference is not None:
                        dev = abs(energy - reference[nu]) if nu < len(reference) else float("nan")
                    else:
                        dev = float("nan")
                    lines.append(
                        f"{_fmt(lam_over)},{_fmt(delta_over)},{representation},{m_or_n},{nu},"
                        f"{_fmt(float(energy))},{_fmt(dev)}"
                    )
    _write_text(out or cfg.output_path, "\n".join(lines) + "\n")
    return 2 if failed else 0


def cmd_observable(cfg: RunConfig, out: str | None) -> int:
    if cfg.grid_lambda.steps * cfg.grid_delta.steps != 1:
        raise ConfigError("the observable command wants a single point; use sweep for grids")
    lam_over = cfg.grid_lambda.points()[0]
    delta_over = cfg.grid_delta.points()[0]
    report: dict = {
        "model": {
            "kind": cfg.kind,
            "omega": cfg.omega,
            "lambda_over_omega": lam_over,
            "delta_over_omega": delta_over,
        },
        "truncation": {
            "cdh_levels": cfg.truncation.cdh_levels,
            "rotation_levels": cfg.truncation.rotation_levels,
            "bare_levels": cfg.truncation.bare_levels,
        },
        "results": {},
    }
    if cfg.kind == "dicke_heisenberg":
        report["model"]["length"] = cfg.length
        report["model"]["gamma_over_omega"] = list(cfg.gamma_over_omega)
    for representation in _representations(cfg):
        start = time.perf_counter()
        triples = evaluate_observables(cfg, lam_over, delta_over, representation)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        report["results"][representation] = {
            "observables": {spec: value for spec, value, _ in triples},
            "rotation_levels_used": {spec: mp for spec, _, mp in triples},
            "wall_time_ms": elapsed_ms,
        }
    _write_text(out or cfg.output_path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# validation suite
# ---------------------------------------------------------------------------


def _check(name: str, measured: float, threshold: float) -> dict:
    return {"name": name, "measured": measured, "threshold": threshold, "pass": bool(measured < threshold)}


def run_validation(quick: bool = False, perturb: float = 0.0) -> dict:
    """Cross-builder, route-equivalence, limit, and convergence checks."""
    omega, delta = 2.0, 1.0
    checks = []

    lam_grid = [0.0, 1.0, 5.0] if quick else [0.0, 1.0, 2.0, 3.0, 5.0]
    worst = 0.0
    for lam in lam_grid:
        model = RabiModel(delta=delta, omega=omega, lam=lam)
        closed = build_cdh_rabi_closed_form(4, model)
        if perturb:
            closed = closed.copy()
            closed[0, 2] += perturb
        worst = max(worst, float(np.abs(closed - build_cdh_generic(model, 4)).max()))
    checks.append(_check("rabi_closed_vs_generic", worst, 1e-12))

    geometry = ChainGeometry(length=4, periodic=True)
    worst = 0.0
    for lam in ([0.0, 1.0] if quick else [0.0, 0.5, 1.0, 2.0]):
        model = DickeHeisenbergModel(delta=delta, omega=omega, lam=lam,
                                     gamma=(omega / 8, omega / 8, 0.0), geometry=geometry)
        closed = build_cdh_dicke_heisenberg_closed_form(3, model)
        worst = max(worst, float(np.abs(closed - build_cdh_generic(model, 3)).max()))
    checks.append(_check("dicke_heisenberg_closed_vs_generic", worst, 1e-10))

    worst = 0.0
    rule = boson.gauss_hermite(boson.default_quadrature_order(4))
    for eps in ([0.5] if quick else [0.1, 0.5, 1.0]):
        for s in range(4):
            for r in range(4):
                via_quad = boson.polaron_block_by_quadrature(pauli("z"), pauli("x"), eps, s, r, rule, self_check=False)
                via_spec = boson.polaron_block_by_spectrum(pauli("z"), pauli("x"), eps, s, r)
                worst = max(worst, float(np.abs(via_quad - via_spec).max()))
    checks.append(_check("quadrature_vs_spectral_blocks", worst, 1e-10))

    worst = 0.0
    for eps in [0.0, 0.3, 1.0, 2.0]:
        dr = dressing_values(eps)
        worst = max(worst, max(abs(f + g - 1.0) for f, g in zip(dr.f, dr.g)))
    checks.append(_check("dressing_f_plus_g", worst, 1e-14))

    lam0 = build_cdh_generic(RabiModel(delta=delta, omega=omega, lam=0.0), 3)
    h_s = system_hamiltonian(RabiModel(delta=delta, omega=omega, lam=0.0))
    expected = np.zeros_like(lam0)
    for m in range(3):
        expected[2 * m:2 * m + 2, 2 * m:2 * m + 2] = h_s + m * omega * np.eye(2)
    checks.append(_check("lambda0_block_structure", float(np.abs(lam0 - expected).max()), 1e-30))

    # deep-strong suppression: coupling far above Delta and Omega
    ds_model = DickeHeisenbergModel(delta=0.0, omega=omega, lam=5 * omega,
                                    gamma=(omega / 8, omega / 8, 0.0),
                                    geometry=ChainGeometry(length=2, periodic=True))
    h_ds = build_cdh_dicke_heisenberg_closed_form(3, ds_model)
    limit, _ = deep_strong_limit_cdh(ds_model, 3)
    d = ds_model.geometry.dim
    off = max(
        float(np.abs(h_ds[s * d:(s + 1) * d, r * d:(r + 1) * d]).max())
        for s in range(3) for r in range(3) if s != r
    )
    checks.append(_check("deep_strong_offdiagonal", off, 1e-18))
    s_sum = sum_site_operator(pauli("x"), ds_model.geometry)
    static = squared_coupling_prefactor(ds_model) * (s_sum @ s_sum)
    diag_dev = 0.0
    for m in range(3):
        block = h_ds[m * d:(m + 1) * d, m * d:(m + 1) * d] + static
        diag_dev = max(diag_dev, float(np.abs(block - limit[m * d:(m + 1) * d, m * d:(m + 1) * d]).max()))
    checks.append(_check("deep_strong_diagonal_vs_limit", diag_dev, 1e-15))

    if not quick:
        reference = {}
        lam_points = np.linspace(0.0, 5.0, 6)
        for lam in lam_points:
            reference[lam] = np.linalg.eigvalsh(build_bare(RabiModel(delta=delta, omega=omega, lam=lam), 60))[:2]
        previous = None
        monotone = True
        for m in range(1, 5):
            err = 0.0
            for lam in lam_points:
                energies = np.linalg.eigvalsh(build_cdh_generic(RabiModel(delta=delta, omega=omega, lam=lam), m))
                err = max(err, float(abs(energies[0] - reference[lam][0])))
            if previous is not None and err >= previous:
                monotone = False
            previous = err
        checks.append({"name": "ground_error_monotone_in_M", "measured": 0.0 if monotone else 1.0,
                       "threshold": 0.5, "pass": monotone})

    return {"checks": checks, "all_pass": all(c["pass"] for c in checks)}


def cmd_validate(out: str | None, quick: bool, perturb: float) -> int:
    report = run_validation(quick=quick, perturb=perturb)
    _write_text(out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if report["all_pass"] else 3


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cdh", description="cavity-dressed Hamiltonian toolkit")
    parser.add_argument("command", choices=["spectrum", "observable", "sweep", "validate"])
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output path (defaults to config output_path or stdout)")
    parser.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    parser.add_argument("--quick", action="store_true", help="validate: fast subset")
    parser.add_argument("--perturb", type=float, default=0.0,
                        help="validate: inject this perturbation into one closed-form entry")
    parser.add_argument("--timings", action="store_true",
                        help="record real per-point wall times (breaks byte-for-byte determinism)")
    args = parser.parse_args(argv)

    try:
        if args.command == "validate":
            return cmd_validate(args.out, args.quick, args.perturb)
        if not args.config:
            raise ConfigError(f"the {args.command} command requires --config")
        cfg = parse_config(args.config)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out, max(args.workers, 1), args.timings)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.out)
        return cmd_observable(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
