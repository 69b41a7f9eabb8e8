"""Figure-reproduction sweeps.

Every sweep splits its grid into independent cells, evaluates them in a
process pool (or serially for one worker) and writes results back in input
order, so the output never depends on the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from ..dynamics import IntegratorOptions
from ..errors import InvalidInputError, InvalidModulationError, RangeError
from ..metrics import (
    RobustnessGrid,
    avg_gate_fidelity_1q,
    avg_gate_fidelity_2q,
    perturbed_gate_grid,
    trace_fidelity,
)
from ..model import KHZ, MHZ, CoupledSystemParams, TransmonParams
from ..synthesis import (
    DragCorrection,
    conventional_gate_time,
    synth_dynamical,
    synth_single_qubit_toc,
    two_qubit_drive_from_modulation,
)
from .tables import ResultTable, base_manifest

DEFAULT_FIG3_RANGE = 0.1
DEFAULT_FIG3_COUNT = 41
DEFAULT_OMEGA_MAX = 45 * MHZ
DEFAULT_FIG4_OMEGA = np.linspace(20, 60, 41) * MHZ
DEFAULT_FIG5_BETA = np.linspace(1.0, 1.6, 31)
DEFAULT_FIG5_NU = np.linspace(330, 350, 21) * MHZ
DEFAULT_FIG5_STATE_GRID = 21


def ordered_map(func, items, workers=1):
    """``list(map(func, items))``, optionally across processes, results in input order."""
    items = list(items)
    workers = max(1, min(int(workers or 1), len(items) or 1))
    if workers == 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def run_fig1b(omega_max, angle_grid, manifest=None):
    """Gate times of TOC X/Y rotations and of the conventional gate versus angle.

    Returns a table with columns ``theta``, ``tau_toc_x_ns``, ``tau_toc_y_ns``
    and ``tau_conventional_ns``.
    """
    rows = []
    for theta in np.asarray(angle_grid, dtype=float):
        if not (0 < theta <= np.pi):
            raise RangeError(f"angle {theta!r} outside (0, pi]")
        rows.append(
            (
                theta,
                synth_single_qubit_toc("X", theta, omega_max).tau,
                synth_single_qubit_toc("Y", theta, omega_max).tau,
                conventional_gate_time(theta, omega_max),
            )
        )
    man = base_manifest(manifest, omega_max_rad_per_ns=float(omega_max))
    return ResultTable(("theta", "tau_toc_x_ns", "tau_toc_y_ns", "tau_conventional_ns"), rows, man)


def _gate(kind, axis, angle, omega_max):
    if kind == "geometric":
        return synth_single_qubit_toc(axis, angle, omega_max)
    if kind == "dynamical":
        return synth_dynamical(axis, angle, omega_max)
    raise InvalidInputError(f"kind must be 'geometric' or 'dynamical', got {kind!r}")


def _fig3_row(delta, pulse, epsilons, opts):
    gates = perturbed_gate_grid(pulse, [delta], epsilons, opts)[0]
    target = pulse.target()
    return np.array([trace_fidelity(target, u) for u in gates])


def run_fig3(axis, angle, deltas=None, epsilons=None, kind="geometric", omega_max=DEFAULT_OMEGA_MAX,
             opts=None, workers=1):
    """Closed-system trace fidelity over a ``delta x epsilon`` perturbation grid.

    ``delta`` shifts the detuning and ``epsilon`` the Rabi frequency, both in
    units of ``omega_max``. The default grid is 41 x 41 over ``[-0.1, 0.1]``.
    """
    if deltas is None:
        deltas = np.linspace(-DEFAULT_FIG3_RANGE, DEFAULT_FIG3_RANGE, DEFAULT_FIG3_COUNT)
    if epsilons is None:
        epsilons = np.linspace(-DEFAULT_FIG3_RANGE, DEFAULT_FIG3_RANGE, DEFAULT_FIG3_COUNT)
    deltas = np.asarray(deltas, dtype=float)
    epsilons = np.asarray(epsilons, dtype=float)
    if np.max(np.abs(deltas), initial=0) > 0.2 or np.max(np.abs(epsilons), initial=0) > 0.2:
        raise RangeError("perturbation grid must lie within |delta|, |epsilon| <= 0.2")
    pulse = _gate(kind, axis, angle, omega_max)
    opts = opts or IntegratorOptions()
    rows = ordered_map(partial(_fig3_row, pulse=pulse, epsilons=epsilons, opts=opts), deltas, workers)
    return RobustnessGrid(deltas, epsilons, np.array(rows), kind, pulse.axis, float(angle))


def robustness_table(grid, manifest=None):
    """Long-format table (``delta``, ``epsilon``, ``fidelity``), delta-major."""
    rows = [
        (d, e, grid.values[i, j])
        for i, d in enumerate(grid.delta_axis)
        for j, e in enumerate(grid.epsilon_axis)
    ]
    man = base_manifest(
        manifest, gate_kind=grid.gate_kind, axis=grid.axis, angle=grid.angle, mean_fidelity=grid.mean()
    )
    return ResultTable(("delta", "epsilon", "fidelity"), rows, man)


def _fig4_cell(omega_max, axis, angle, drag, params, n_states, opts):
    pulse = synth_single_qubit_toc(axis, angle, omega_max)
    rep = avg_gate_fidelity_1q(pulse, drag, params, n_states, opts)
    return (omega_max / MHZ, rep.value, rep.metadata["leakage_mean"], pulse.tau, pulse.delta / MHZ)


def run_fig4(axis, angle, omega_range=None, drag=None, params=None, n_states=1001, opts=None,
             workers=1, manifest=None):
    """Averaged single-qubit fidelity versus peak Rabi frequency.

    The pulse is re-synthesized for each ``omega_max`` so its duration and
    detuning follow. Columns: ``omega_max_mhz``, ``fidelity``, ``leakage``,
    ``tau_ns``, ``delta_mhz``.
    """
    omega_range = DEFAULT_FIG4_OMEGA if omega_range is None else np.asarray(omega_range, dtype=float)
    if np.any(omega_range <= 0):
        raise InvalidInputError("omega_max values must be positive")
    drag = drag or DragCorrection()
    params = params or TransmonParams(drag.alpha1, 4 * KHZ, 4 * KHZ)
    opts = opts or IntegratorOptions()
    cell = partial(_fig4_cell, axis=axis, angle=angle, drag=drag, params=params, n_states=n_states, opts=opts)
    rows = ordered_map(cell, omega_range, workers)
    man = base_manifest(
        manifest,
        axis=str(axis).upper(),
        angle=float(angle),
        drag=drag.enabled,
        alpha1_rad_per_ns=drag.alpha1,
        kappa_minus_rad_per_ns=params.kappa_minus,
        kappa_z_rad_per_ns=params.kappa_z,
        n_states=n_states,
        integrator={"steps": opts.steps, "dt": opts.dt, "method": opts.method or "rk4"},
    )
    return ResultTable(("omega_max_mhz", "fidelity", "leakage", "tau_ns", "delta_mhz"), rows, man)


def _fig5_cell(cell, params, vartheta, varphi0, state_grid, opts):
    beta, nu, delta1 = cell
    p = params if delta1 is None else CoupledSystemParams(params.g12, delta1, params.q1, params.q2)
    try:
        drive = two_qubit_drive_from_modulation(vartheta, varphi0, p.g12, beta, nu, p.delta1)
    except InvalidModulationError:
        return (np.nan, np.nan, np.nan, 0)
    rep = avg_gate_fidelity_2q(drive, p, opts=opts, grid=state_grid)
    return (rep.value, drive.duration, rep.metadata["leakage_mean"], 1)


def run_fig5(beta_range=None, nu_range=None, params=None, vartheta=np.pi / 2, varphi0=np.pi / 2,
             state_grid=DEFAULT_FIG5_STATE_GRID, opts=None, workers=1, delta1_range=None, manifest=None):
    """Averaged two-qubit fidelity over a modulation-parameter grid.

    By default the grid is ``beta x nu`` (``beta``-major). Passing
    ``delta1_range`` switches to a ``delta1 x beta`` grid at the single
    ``nu`` in ``nu_range``. Cells where the phase rate cannot wind by ``-pi``
    are kept with ``valid = 0`` and NaN values.

    Columns: ``beta``, ``nu_mhz``, ``delta1_mhz``, ``fidelity``, ``T_ns``,
    ``leakage``, ``valid``.
    """
    if params is None:
        q1 = TransmonParams(220 * MHZ, 4 * KHZ, 4 * KHZ)
        q2 = TransmonParams(180 * MHZ, 4 * KHZ, 4 * KHZ)
        params = CoupledSystemParams(8 * MHZ, 320 * MHZ, q1, q2)
    betas = DEFAULT_FIG5_BETA if beta_range is None else np.asarray(beta_range, dtype=float)
    nus = DEFAULT_FIG5_NU if nu_range is None else np.asarray(nu_range, dtype=float)
    if np.any(betas <= 0) or np.any(betas >= 3.8):
        raise RangeError("beta must lie in (0, 3.8)")
    if np.any(nus <= 0):
        raise InvalidInputError("nu must be positive")
    if delta1_range is None:
        cells = [(b, n, None) for b in betas for n in nus]
    else:
        if nus.size != 1:
            raise InvalidInputError("a delta1 x beta sweep needs exactly one nu")
        cells = [(b, nus[0], d) for d in np.asarray(delta1_range, dtype=float) for b in betas]
    opts = opts or IntegratorOptions()
    cell = partial(_fig5_cell, params=params, vartheta=vartheta, varphi0=varphi0,
                   state_grid=state_grid, opts=opts)
    results = ordered_map(cell, cells, workers)
    rows = [
        (b, n / MHZ, (params.delta1 if d is None else d) / MHZ) + tuple(r)
        for (b, n, d), r in zip(cells, results)
    ]
    man = base_manifest(
        manifest,
        vartheta=float(vartheta),
        varphi0=float(varphi0),
        g12_rad_per_ns=params.g12,
        delta1_rad_per_ns=params.delta1,
        alpha1_rad_per_ns=params.q1.alpha,
        alpha2_rad_per_ns=params.q2.alpha,
        kappa_minus_rad_per_ns=[params.q1.kappa_minus, params.q2.kappa_minus],
        kappa_z_rad_per_ns=[params.q1.kappa_z, params.q2.kappa_z],
        state_grid=state_grid,
        sweep_axes="beta,nu" if delta1_range is None else "delta1,beta",
        integrator={"steps": opts.steps, "dt": opts.dt, "method": opts.method or "rk4"},
    )
    return ResultTable(("beta", "nu_mhz", "delta1_mhz", "fidelity", "T_ns", "leakage", "valid"), rows, man)
