"""Named end-to-end runs with reproducible CSV + manifest outputs.

Every scenario writes ``<out>/<scenario>_<name>.csv`` files (comma
separated, LF line endings, UTF-8, floats in scientific notation with 17
significant digits) followed by a single ``<out>/manifest.json`` recording
the resolved configuration, the constants and derived scales in effect,
solver settings, wall-clock time and the emitted files with their row
counts.  Re-running a scenario with the same configuration and code version
reproduces the CSV files byte for byte; manifests match except for the
wall-clock entry and the output directory.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from . import __version__, kernels
from .analytic import (
    EquationForm,
    EquationParameters,
    CanonicalCoefficients,
    FreeSolutionSpec,
    dispersion_branches,
    free_solution,
    reduce_equation,
)
from .constants import PhysicalConstants, derive_scales
from .integrator import TemporalState, convergence_order, integrate_uniform
from .pde import (
    FieldState,
    Grid,
    PdeProblem,
    evolve,
    field_width,
    fit_mode_frequency,
    fit_mode_growth,
    gaussian_packet,
    mode_amplitudes,
    plane_wave_state,
    schrodinger_consistent_state,
    stability_dt,
    width_law,
)


class ConfigError(ValueError):
    """Configuration input the scenario layer refuses to run."""


# --------------------------------------------------------------------------
# Config schema.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class KeySpec:
    kind: str  # float | int | bool | str | list_float | opt_float
    default: object
    doc: str


def _coerce(name: str, spec: KeySpec, value):
    kind = spec.kind
    if kind == "opt_float" and value is None:
        return None
    if kind in ("float", "opt_float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key {name!r} must be a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"key {name!r} must be an integer, got {value!r}")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"key {name!r} must be a boolean, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"key {name!r} must be a string, got {value!r}")
        return value
    if kind == "list_float":
        if not isinstance(value, (list, tuple)) or any(
                isinstance(x, bool) or not isinstance(x, (int, float)) for x in value):
            raise ConfigError(f"key {name!r} must be a list of numbers, got {value!r}")
        return [float(x) for x in value]
    raise AssertionError(f"unknown kind {kind}")


_SEED = KeySpec("int", 0, "seed recorded for any randomised diagnostics")
_SAFETY = KeySpec("float", 0.7, "fraction of the RK4 stability bound used for dt")
_LAPLACIAN = KeySpec("str", "spectral", "spatial operator: stencil or spectral")


SCENARIO_KEYS: dict[str, dict[str, KeySpec]] = {
    "fig1": {
        "A": KeySpec("float", 1.0, "free-solution amplitude (non-zero)"),
        "horizon_tau": KeySpec("list_float", [100.0, 1000.0],
                               "time horizons in tau_p units, one CSV each"),
        "samples_per_period": KeySpec("int", 32, "CSV samples per pi-long period"),
        "seed": _SEED,
    },
    "dispersion_scan": {
        "k_values": KeySpec("list_float", [0.125, 0.25, 0.375, 0.5],
                            "wavenumbers to probe (snapped to grid modes)"),
        "r": KeySpec("float", 1.0, "mass ratio"),
        "v": KeySpec("float", 0.0, "dimensionless potential"),
        "n": KeySpec("int", 256, "grid points (power of two)"),
        "L": KeySpec("float", 32.0 * math.pi, "domain length"),
        "laplacian": _LAPLACIAN,
        "safety": _SAFETY,
        "horizon_tau": KeySpec("float", 50.0,
                               "measurement window; auto-capped on grids with "
                               "supercritical modes"),
        "dt": KeySpec("opt_float", None, "explicit step (default: stability rule)"),
        "allow_unstable": KeySpec("bool", False,
                                  "permit probing wavenumbers above critical"),
        "seed": _SEED,
    },
    "regime_compare": {
        "r": KeySpec("list_float", [0.1, 0.01, 0.001], "mass ratios to compare"),
        "v": KeySpec("float", 0.0, "dimensionless potential"),
        "horizon_tau": KeySpec("float", 20.0, "comparison horizon"),
        "n": KeySpec("int", 32, "grid points (power of two)"),
        "L": KeySpec("float", 40.0, "domain length"),
        "sigma0": KeySpec("float", 2.0, "packet width for the band-limited case"),
        "laplacian": _LAPLACIAN,
        "safety": _SAFETY,
        "seed": _SEED,
    },
    "convergence": {
        "dts": KeySpec("list_float", [4e-3, 2e-3, 1e-3],
                       "halving step sizes (at least three)"),
        "A": KeySpec("float", 1.0, "free-solution amplitude (non-zero)"),
        "horizon_tau": KeySpec("float", 10.0, "integration horizon"),
        "seed": _SEED,
    },
    "pde_packet": {
        "form": KeySpec("str", "schrodinger",
                        "'schrodinger' (first-order limit) or 'full'"),
        "n": KeySpec("int", 256, "grid points (power of two)"),
        "L": KeySpec("float", 80.0, "domain length"),
        "sigma0": KeySpec("float", 2.0, "initial packet width"),
        "r": KeySpec("float", 1.0, "mass ratio"),
        "v": KeySpec("float", 0.0, "dimensionless potential"),
        "horizon_tau": KeySpec("opt_float", None,
                               "horizon (default: width-doubling time)"),
        "dt": KeySpec("opt_float", None, "explicit step (default: stability rule)"),
        "safety": _SAFETY,
        "laplacian": _LAPLACIAN,
        "allow_unstable": KeySpec("bool", False,
                                  "run despite unstable wavenumbers / oversized dt"),
        "samples": KeySpec("int", 128, "target number of stored snapshots"),
        "seed": _SEED,
    },
}

SCENARIO_DESCRIPTIONS = {
    "fig1": "free uniform solution: RK4 against the closed form over two horizons",
    "dispersion_scan": "single-mode frequency/growth measurements against the "
                       "dispersion branches",
    "regime_compare": "full versus spatial-term-free evolution across mass ratios",
    "convergence": "RK4 error against the closed form for halving step sizes",
    "pde_packet": "Gaussian packet spreading against the free-particle width law",
}


def scenario_names() -> list[str]:
    return list(SCENARIO_KEYS)


def resolve_config(scenario: str, file_params: Optional[dict] = None,
                   overrides: Optional[dict] = None) -> dict:
    """Merge defaults, config-file values and CLI overrides; reject unknowns."""
    if scenario not in SCENARIO_KEYS:
        raise ConfigError(f"unknown scenario {scenario!r}; "
                          f"available: {', '.join(scenario_names())}")
    keys = SCENARIO_KEYS[scenario]
    merged = {name: spec.default for name, spec in keys.items()}
    for source in (file_params or {}, overrides or {}):
        for name, value in source.items():
            if name == "scenario":
                if value != scenario:
                    raise ConfigError(
                        f"config names scenario {value!r} but {scenario!r} was requested")
                continue
            if name not in keys:
                raise ConfigError(f"unknown key {name!r} for scenario {scenario!r}")
            merged[name] = _coerce(name, keys[name], value)
    return merged


def load_config_file(path: str | Path) -> dict:
    """Read a JSON config file (a single flat object)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a JSON object")
    return data


def parse_set_overrides(pairs: Iterable[str]) -> dict:
    """Parse repeated ``--set key=value`` fragments (values as JSON, else text)."""
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


# --------------------------------------------------------------------------
# Output writing.
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    return f"{x:.16e}"


def write_csv(path: Path, header: list[str], rows: Iterable[tuple]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
            count += 1
    return count


@dataclass
class OutputFile:
    name: str
    header: list[str]
    rows: list[tuple]


def report_planck_numbers(constants: Optional[PhysicalConstants] = None) -> dict:
    """Planck-scale numbers behind the dimensionless units, as a flat dict."""
    consts = constants if constants is not None else PhysicalConstants()
    scales = derive_scales(consts)
    return {
        "tau_p_seconds": scales.tau_p,
        "length_p_meters": scales.length_p,
        "energy_p_joules": scales.energy_p,
        "energy_p_gev": scales.energy_p_gev,
        "reference_angular_frequency_per_second": scales.omega,
        "oscillation_angular_frequency_per_second": 2.0 * scales.omega,
        "oscillation_period_seconds": scales.period,
        "period_over_attosecond": scales.period / 1e-18,
    }


def format_planck_report(numbers: dict) -> str:
    lines = ["Planck-scale reference values"]
    labels = {
        "tau_p_seconds": "reference time tau_p [s]",
        "length_p_meters": "reference length [m]",
        "energy_p_joules": "reference energy [J]",
        "energy_p_gev": "reference energy [GeV]",
        "reference_angular_frequency_per_second": "reference frequency 1/tau_p [1/s]",
        "oscillation_angular_frequency_per_second": "free-solution frequency 2/tau_p [1/s]",
        "oscillation_period_seconds": "free-solution period pi*tau_p [s]",
        "period_over_attosecond": "period / 1 as",
    }
    for key, label in labels.items():
        lines.append(f"  {label:<42} {numbers[key]:.6e}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Scenario runners.  Each returns (outputs, solver_info).
# --------------------------------------------------------------------------


_FIG1_ERROR_TARGET = 1e-7
_FIG1_ERROR_RATE = 0.27  # measured max-error growth per unit time at dt = 1
_ROGUE_BUDGET = 25.0  # max growth-rate * window for round-off-seeded modes


def _fig1_dt(horizon: float, amplitude: float, interval: float) -> tuple[float, int]:
    """Sample-aligned step meeting both the smoothness and error budgets."""
    generic = math.pi / 100.0  # 50 steps per fastest half-period
    budget = 0.8 * (_FIG1_ERROR_TARGET
                    / (_FIG1_ERROR_RATE * abs(amplitude) * horizon)) ** 0.25
    steps_per_sample = max(1, math.ceil(interval / min(generic, budget)))
    return interval / steps_per_sample, steps_per_sample


def _run_fig1(params: dict) -> tuple[list[OutputFile], dict]:
    amplitude = params["A"]
    if amplitude == 0.0:
        raise ConfigError("A must be non-zero")
    spp = params["samples_per_period"]
    if spp < 4:
        raise ConfigError("samples_per_period must be at least 4")
    horizons = params["horizon_tau"]
    if not horizons or any(h <= 0.0 for h in horizons):
        raise ConfigError("horizon_tau entries must be positive")
    interval = math.pi / spp
    spec = FreeSolutionSpec.zero_initial(amplitude)
    initial = TemporalState(0.0 + 0.0j, 2j * amplitude)
    outputs = []
    runs = []
    for horizon in horizons:
        dt, stride = _fig1_dt(horizon, amplitude, interval)
        n_samples = int(math.floor(horizon / interval + 1e-12))
        t_end = n_samples * stride * dt
        traj = integrate_uniform(initial, 0.0, t_end, dt, sample_stride=stride)
        exact = free_solution(spec, traj.times)
        rows = [
            (t, p.real, p.imag, abs(p), e.real, e.imag, abs(e))
            for t, p, e in zip(traj.times, traj.psis, exact)
        ]
        outputs.append(OutputFile(
            name=f"fig1_horizon{horizon:g}.csv",
            header=["t_over_tau", "re_psi", "im_psi", "abs_psi",
                    "re_psi_analytic", "im_psi_analytic", "abs_psi_analytic"],
            rows=rows,
        ))
        runs.append({"horizon_tau": horizon, "dt": dt, "sample_stride": stride,
                     "n_steps": n_samples * stride})
    solver = {"runs": runs, "backend": kernels.active_backend()}
    return outputs, solver


def _run_dispersion_scan(params: dict) -> tuple[list[OutputFile], dict]:
    grid = Grid(params["n"], params["L"])
    lap_mode = params["laplacian"]
    try:
        eq = EquationParameters(params["r"], params["v"], EquationForm.FULL)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    coeffs = reduce_equation(eq)
    if coeffs.v >= 0.5 and not params["allow_unstable"]:
        raise ConfigError("v >= 1/2 leaves no stable wavenumber; "
                          "set allow_unstable to probe growth anyway")
    eigs = grid.laplacian_eigenvalues(lap_mode)
    plus, _ = dispersion_branches(coeffs, eigs)
    s_max = float(np.max(plus.imag))
    window = params["horizon_tau"]
    capped = False
    if s_max > 0.0 and window > _ROGUE_BUDGET / s_max:
        window = _ROGUE_BUDGET / s_max
        capped = True
    dt = params["dt"]
    if dt is None:
        dt = stability_dt(coeffs, grid, params["safety"], lap_mode)
    elif dt <= 0.0:
        raise ConfigError("dt must be positive")
    n_steps = max(16, math.ceil(window / dt))
    dt = window / n_steps
    rows = []
    for k_req in params["k_values"]:
        j = int(round(k_req * grid.length / (2.0 * math.pi)))
        state, k_snap, (omega_p_d, omega_m_d) = plane_wave_state(
            grid, j, coeffs, "minus", lap_mode)
        omega_p_exact, omega_m_exact = dispersion_branches(coeffs, k_snap**2)
        mode_stable = abs(omega_m_d.imag) <= 1e-14
        if k_snap == 0.0:
            resolved = 1
        else:
            resolved = 1 if 2.0 * math.pi / (abs(k_snap) * grid.dx) >= 8.0 else 0
        if mode_stable:
            problem = PdeProblem(coeffs, grid, state, t_end=window, dt=dt,
                                 snapshot_stride=1, laplacian=lap_mode,
                                 allow_unstable=params["allow_unstable"])
            result = evolve(problem)
            amps = mode_amplitudes(result.psi, j)
            measured = fit_mode_frequency(result.times, amps)
            reference = omega_m_exact.real
            if reference != 0.0:
                rel = abs(measured - reference) / abs(reference)
            else:
                rel = abs(measured - reference)
            rows.append((k_snap, reference, measured, rel, resolved,
                         float("nan"), float("nan")))
        else:
            if not params["allow_unstable"]:
                raise ConfigError(
                    f"requested k_hat={k_snap:.6g} lies above the critical "
                    "wavenumber; set allow_unstable to probe growth")
            state, _, _ = plane_wave_state(grid, j, coeffs, "plus", lap_mode)
            problem = PdeProblem(coeffs, grid, state, t_end=window, dt=dt,
                                 snapshot_stride=1, laplacian=lap_mode,
                                 allow_unstable=True)
            result = evolve(problem)
            amps = mode_amplitudes(result.psi, j)
            measured = fit_mode_growth(result.times, amps)
            rows.append((k_snap, float("nan"), float("nan"), float("nan"),
                         resolved, omega_p_exact.imag, measured))
    outputs = [OutputFile(
        name="dispersion_scan_modes.csv",
        header=["k_hat", "omega_minus_analytic", "omega_minus_measured",
                "rel_err", "resolved", "growth_rate_analytic",
                "growth_rate_measured"],
        rows=rows,
    )]
    solver = {"dt": dt, "n_steps": n_steps, "window_tau": window,
              "window_capped": capped, "max_growth_rate_on_grid": s_max,
              "laplacian": lap_mode,
              "backend": "numpy" if lap_mode == "spectral" else kernels.active_backend()}
    return outputs, solver


def _run_regime_compare(params: dict) -> tuple[list[OutputFile], dict]:
    grid = Grid(params["n"], params["L"])
    lap_mode = params["laplacian"]
    horizon = params["horizon_tau"]
    if horizon <= 0.0:
        raise ConfigError("horizon_tau must be positive")
    if not params["r"]:
        raise ConfigError("r must list at least one mass ratio")
    uniform_initial = FieldState.uniform(grid, 0.0, 2.0j)
    packet_psi = gaussian_packet(grid, params["sigma0"])
    rows = []
    dts = []
    for r in params["r"]:
        try:
            full = reduce_equation(EquationParameters(r, params["v"], EquationForm.FULL))
            macro = reduce_equation(
                EquationParameters(r, params["v"], EquationForm.MACROSCOPIC))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        dt = min(stability_dt(full, grid, params["safety"], lap_mode),
                 stability_dt(macro, grid, params["safety"], lap_mode))
        n_steps = max(8, math.ceil(horizon / dt))
        dt = horizon / n_steps
        dts.append(dt)
        packet_initial = schrodinger_consistent_state(packet_psi, full, lap_mode)
        distances = []
        for initial in (uniform_initial, packet_initial):
            fields = []
            for coeffs in (full, macro):
                try:
                    problem = PdeProblem(coeffs, grid, initial, t_end=horizon,
                                         dt=dt, snapshot_stride=1,
                                         laplacian=lap_mode)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
                fields.append(evolve(problem).psi)
            distances.append(float(np.max(np.abs(fields[0] - fields[1]))))
        rows.append((r, distances[0], distances[1]))
    outputs = [OutputFile(
        name="regime_compare_distances.csv",
        header=["r", "sup_distance_uniform", "sup_distance_packet"],
        rows=rows,
    )]
    solver = {"dts": dts, "horizon_tau": horizon, "laplacian": lap_mode,
              "backend": "numpy" if lap_mode == "spectral" else kernels.active_backend()}
    return outputs, solver


def _run_convergence(params: dict) -> tuple[list[OutputFile], dict]:
    amplitude = params["A"]
    if amplitude == 0.0:
        raise ConfigError("A must be non-zero")
    horizon = params["horizon_tau"]
    if horizon <= 0.0:
        raise ConfigError("horizon_tau must be positive")
    dts = params["dts"]
    spec = FreeSolutionSpec.zero_initial(amplitude)
    initial = TemporalState(0.0 + 0.0j, 2j * amplitude)
    pairs = []
    for dt in dts:
        n_steps = int(round(horizon / dt))
        if n_steps < 1 or abs(n_steps * dt - horizon) > 1e-9 * horizon:
            raise ConfigError(f"horizon_tau must be a whole number of dt={dt} steps")
        stride = max(1, n_steps // 1000)
        traj = integrate_uniform(initial, 0.0, horizon, dt, sample_stride=stride)
        exact = free_solution(spec, traj.times)
        pairs.append((dt, float(np.max(np.abs(traj.psis - exact)))))
    try:
        order = convergence_order(pairs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    outputs = [OutputFile(
        name="convergence_errors.csv",
        header=["dt", "max_error"],
        rows=pairs,
    )]
    solver = {"fitted_order": order, "horizon_tau": horizon,
              "backend": kernels.active_backend()}
    return outputs, solver


def _run_pde_packet(params: dict) -> tuple[list[OutputFile], dict]:
    form = params["form"]
    if form not in ("schrodinger", "full"):
        raise ConfigError("form must be 'schrodinger' or 'full'")
    grid = Grid(params["n"], params["L"])
    lap_mode = params["laplacian"]
    r, v = params["r"], params["v"]
    if form == "full":
        try:
            coeffs = reduce_equation(EquationParameters(r, v, EquationForm.FULL))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        coeffs = CanonicalCoefficients(a_xx=r, a_tt=0.0, v=v)
    sigma0 = params["sigma0"]
    if sigma0 < 2.0 * grid.dx:
        raise ConfigError("sigma0 must be at least two grid spacings")
    horizon = params["horizon_tau"]
    if horizon is None:
        # Default: time for the free packet width to double.
        horizon = 2.0 * math.sqrt(3.0) * sigma0**2 / r if form == "schrodinger" \
            else 10.0 * math.pi
    if horizon <= 0.0:
        raise ConfigError("horizon_tau must be positive")
    dt = params["dt"]
    if dt is None:
        dt = stability_dt(coeffs, grid, params["safety"], lap_mode)
        n_steps = math.ceil(horizon / dt)
        dt = horizon / n_steps
    else:
        if dt <= 0.0:
            raise ConfigError("dt must be positive")
        n_steps = max(1, int(round(horizon / dt)))
        horizon = n_steps * dt
    stride = max(1, n_steps // params["samples"])
    psi0 = gaussian_packet(grid, sigma0)
    initial = schrodinger_consistent_state(psi0, coeffs, lap_mode)
    try:
        problem = PdeProblem(coeffs, grid, initial, t_end=horizon, dt=dt,
                             snapshot_stride=stride, laplacian=lap_mode,
                             allow_unstable=params["allow_unstable"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = evolve(problem)
    analytic_ok = form == "schrodinger" and v == 0.0
    width_rows = []
    for i, t in enumerate(result.times):
        measured = field_width(result.psi[i], grid)
        if analytic_ok:
            expected = width_law(sigma0, r, t)
            rel = abs(measured - expected) / expected
        else:
            expected, rel = float("nan"), float("nan")
        width_rows.append((t, measured, expected, rel))
    xi = grid.xi()
    last = result.psi[-1]
    profile_rows = [(x, p.real, p.imag, abs(p)) for x, p in zip(xi, last)]
    outputs = [
        OutputFile("pde_packet_width.csv",
                   ["t_hat", "width_measured", "width_analytic", "rel_err"],
                   width_rows),
        OutputFile("pde_packet_profile.csv",
                   ["xi_hat", "re_psi", "im_psi", "abs_psi"],
                   profile_rows),
    ]
    solver = {"form": form, "dt": dt, "n_steps": n_steps,
              "snapshot_stride": result.snapshot_stride, "horizon_tau": horizon,
              "laplacian": lap_mode, "backend": result.backend}
    return outputs, solver


_RUNNERS: dict[str, Callable[[dict], tuple[list[OutputFile], dict]]] = {
    "fig1": _run_fig1,
    "dispersion_scan": _run_dispersion_scan,
    "regime_compare": _run_regime_compare,
    "convergence": _run_convergence,
    "pde_packet": _run_pde_packet,
}


# --------------------------------------------------------------------------
# Plot scripts (gnuplot) for quick inspection of the CSVs.
# --------------------------------------------------------------------------


def _plotscript(scenario: str, outputs: list[OutputFile]) -> str:
    lines = [
        "# gnuplot script generated alongside the CSV outputs",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set grid",
    ]
    if scenario == "fig1":
        for out in outputs:
            lines += [
                f"set title 'free uniform solution ({out.name})'",
                f"plot '{out.name}' using 1:2 with lines, \\",
                f"     '{out.name}' using 1:5 with lines dashtype 2",
                "pause -1",
            ]
    elif scenario == "dispersion_scan":
        lines += [
            "set title 'dispersion scan'",
            "set logscale y",
            "plot 'dispersion_scan_modes.csv' using 1:4 with linespoints",
            "pause -1",
        ]
    elif scenario == "regime_compare":
        lines += [
            "set title 'full vs macroscopic distance'",
            "set logscale xy",
            "plot 'regime_compare_distances.csv' using 1:2 with linespoints, \\",
            "     'regime_compare_distances.csv' using 1:3 with linespoints",
            "pause -1",
        ]
    elif scenario == "convergence":
        lines += [
            "set title 'RK4 convergence'",
            "set logscale xy",
            "plot 'convergence_errors.csv' using 1:2 with linespoints",
            "pause -1",
        ]
    elif scenario == "pde_packet":
        lines += [
            "set title 'packet width'",
            "plot 'pde_packet_width.csv' using 1:2 with lines, \\",
            "     'pde_packet_width.csv' using 1:3 with lines dashtype 2",
            "pause -1",
        ]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Driver.
# --------------------------------------------------------------------------


def run_scenario(scenario: str, params: Optional[dict] = None,
                 out_dir: str | Path = ".", plotscript: bool = False,
                 constants: Optional[PhysicalConstants] = None) -> dict:
    """Run one scenario end to end; returns the manifest dictionary.

    ``params`` must already be resolved via :func:`resolve_config` (pass
    None for all defaults).  CSV files are written first, the manifest last
    and exactly once.
    """
    resolved = resolve_config(scenario, params or {})
    consts = constants if constants is not None else PhysicalConstants()
    scales = derive_scales(consts)
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    outputs, solver = _RUNNERS[scenario](resolved)
    manifest_outputs = []
    for out in outputs:
        rows = write_csv(out_path / out.name, out.header, out.rows)
        manifest_outputs.append({"path": out.name, "rows": rows})
    if plotscript:
        script_name = f"plot_{scenario}.gp"
        (out_path / script_name).write_text(_plotscript(scenario, outputs),
                                            encoding="utf-8", newline="\n")
        manifest_outputs.append({"path": script_name, "rows": None})
    elapsed = time.perf_counter() - started
    manifest = {
        "scenario": scenario,
        "config": resolved,
        "constants": {"hbar": consts.hbar, "c": consts.c,
                      "planck_mass": consts.planck_mass},
        "derived_scales": {
            "tau_p": scales.tau_p, "length_p": scales.length_p,
            "energy_p": scales.energy_p, "energy_p_gev": scales.energy_p_gev,
            "omega": scales.omega, "period": scales.period,
        },
        "solver": solver,
        "outputs": manifest_outputs,
        "version": __version__,
        "wall_clock_seconds": elapsed,
        "output_dir": str(out_path),
    }
    with open(out_path / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
