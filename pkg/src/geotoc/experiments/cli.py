"""``geotoc`` command line.

Exit codes: 0 on success, 2 on a configuration or input error, 3 when an
integrator accuracy check fails.
"""

import argparse
import logging
import sys

import numpy as np

from .. import __version__
from ..errors import ConfigError, ConvergenceError, GeotocError
from ..metrics import avg_gate_fidelity_1q, avg_gate_fidelity_2q, state_grid_size
from ..model import MHZ
from ..synthesis import (
    conventional_gate_time,
    synth_single_qubit_toc,
    synth_two_qubit_toc,
    two_qubit_drive_from_modulation,
)
from . import sweeps, validate
from .config import SweepAxis, load_config, parse_angle, parse_sweep_axis, with_overrides
from .tables import ResultTable, base_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

log = logging.getLogger("geotoc")


def _angle(text):
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _axis_arg(name):
    def parse(text):
        try:
            return parse_sweep_axis(text, key=name)
        except ConfigError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return parse


def build_parser():
    parser = argparse.ArgumentParser(prog="geotoc", description="Time-optimal geometric gate toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--omega-max", type=float, help="peak Rabi frequency in MHz")
    common.add_argument("--dt", type=float, help="integrator step in ns")
    common.add_argument("--integrator-steps", type=int, help="integrator steps per gate")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    gate = argparse.ArgumentParser(add_help=False)
    gate.add_argument("--axis", type=str.upper, choices=("X", "Y"))
    gate.add_argument("--angle", type=_angle, help="rotation angle, e.g. 0.5pi or -pi/2")

    sub.add_parser("synth", parents=[common, gate], help="print a synthesized pulse")

    p = sub.add_parser("fig1b", parents=[common], help="gate time versus rotation angle")
    p.add_argument("--angles", type=_axis_arg("angles"), help="'start, stop, count' in radians or pi units")

    p = sub.add_parser("fig3", parents=[common, gate], help="robustness grid")
    p.add_argument("--kind", choices=("geometric", "dynamical"))
    p.add_argument("--range", type=float, help="half-width of the delta and epsilon axes")
    p.add_argument("--steps", type=int, help="grid points per axis")

    p = sub.add_parser("fig4", parents=[common, gate], help="fidelity versus omega_max")
    p.add_argument("--omega-range", type=_axis_arg("omega_range"), help="'start, stop, count' in MHz")
    p.add_argument("--n-states", type=int)
    p.add_argument("--no-drag", action="store_true")

    p = sub.add_parser("fig5", parents=[common], help="two-qubit fidelity map")
    p.add_argument("--beta-range", type=_axis_arg("beta"))
    p.add_argument("--nu-range", type=_axis_arg("nu_mhz"), help="'start, stop, count' in MHz")
    p.add_argument("--delta1-range", type=_axis_arg("delta1_mhz"), help="'start, stop, count' in MHz")
    p.add_argument("--state-grid", type=int, help="input states per qubit")
    p.add_argument("--sweep-axes", choices=("beta,nu", "delta1,beta"))

    p = sub.add_parser("fidelity", parents=[common, gate], help="averaged gate fidelity")
    p.add_argument("--two-qubit", action="store_true")
    p.add_argument("--n-states", type=int)
    p.add_argument("--state-grid", type=int)
    p.add_argument("--no-drag", action="store_true")

    sub.add_parser("validate", parents=[common], help="run the invariant suite")
    return parser


def _resolve(args):
    cfg = load_config(args.config) if args.config else load_config()
    sweep = {}
    if getattr(args, "omega_range", None) is not None:
        sweep["omega_max_mhz"] = args.omega_range
    if getattr(args, "beta_range", None) is not None:
        sweep["beta"] = args.beta_range
    if getattr(args, "nu_range", None) is not None:
        sweep["nu_mhz"] = args.nu_range
    if getattr(args, "delta1_range", None) is not None:
        sweep["delta1_mhz"] = args.delta1_range
    if getattr(args, "angles", None) is not None:
        sweep["angle"] = args.angles
    if getattr(args, "range", None) is not None or getattr(args, "steps", None) is not None:
        current = cfg.axis("delta", _default_fig3_axis())
        half = args.range if args.range is not None else current.stop
        count = args.steps if args.steps is not None else current.count
        for name in ("delta", "epsilon"):
            sweep[name] = SweepAxis(-half, half, count)
    device = {"omega_max_mhz": args.omega_max}
    if getattr(args, "no_drag", False):
        device["drag"] = False
    return with_overrides(
        cfg,
        device=device,
        gate={"axis": getattr(args, "axis", None), "angle": getattr(args, "angle", None),
              "kind": getattr(args, "kind", None)},
        sweep=sweep,
        integrator={"dt": args.dt, "steps": args.integrator_steps, "workers": args.workers},
        output={"path": args.out, "format": args.format},
        n_states=getattr(args, "n_states", None),
        state_grid=getattr(args, "state_grid", None),
        sweep_axes=getattr(args, "sweep_axes", None),
    )


def _emit(table, cfg, stdout):
    path, fmt = cfg.output.path, cfg.output.format
    if path:
        written = table.write(path, fmt)
        log.info("wrote %s", ", ".join(written))
    else:
        stdout.write(table.to_json() if fmt == "json" else table.to_csv())


def _cmd_synth(cfg, stdout):
    g = cfg.gate
    pulse = synth_single_qubit_toc(g.axis, g.angle, cfg.device.omega_max)
    rows = [
        ("tau_ns", pulse.tau),
        ("delta_mhz", pulse.delta / MHZ),
        ("c0", pulse.c0),
        ("chi", pulse.chi),
        ("pulse_area", pulse.pulse_area),
        ("phi0", pulse.phi0),
        ("tau_conventional_ns", conventional_gate_time(g.angle, cfg.device.omega_max)),
    ]
    man = base_manifest(cfg.manifest())
    table = ResultTable(("quantity", "value"), rows, man)
    _emit(table, cfg, stdout)


def _cmd_fig1b(cfg, stdout):
    angles = cfg.axis("angle", SweepAxis(np.pi / 8, np.pi, 8)).values()
    _emit(sweeps.run_fig1b(cfg.device.omega_max, angles, cfg.manifest()), cfg, stdout)


def _default_fig3_axis():
    return SweepAxis(-sweeps.DEFAULT_FIG3_RANGE, sweeps.DEFAULT_FIG3_RANGE, sweeps.DEFAULT_FIG3_COUNT)


def _cmd_fig3(cfg, stdout):
    g = cfg.gate
    grid = sweeps.run_fig3(
        g.axis,
        g.angle,
        cfg.axis("delta", _default_fig3_axis()).values(),
        cfg.axis("epsilon", _default_fig3_axis()).values(),
        kind=g.kind,
        omega_max=cfg.device.omega_max,
        opts=cfg.integrator.options(),
        workers=cfg.workers(),
    )
    _emit(sweeps.robustness_table(grid, cfg.manifest()), cfg, stdout)


def _cmd_fig4(cfg, stdout):
    g = cfg.gate
    omega = cfg.axis("omega_max_mhz", SweepAxis(20.0, 60.0, 41)).values() * MHZ
    table = sweeps.run_fig4(
        g.axis,
        g.angle,
        omega,
        drag=cfg.device.drag_correction(),
        params=cfg.device.transmon(1),
        n_states=cfg.n_states or 1001,
        opts=cfg.integrator.options(),
        workers=cfg.workers(),
        manifest=cfg.manifest(),
    )
    _emit(table, cfg, stdout)


def _cmd_fig5(cfg, stdout):
    betas = cfg.axis("beta", SweepAxis(1.0, 1.6, 31)).values()
    kwargs = {}
    if cfg.sweep_axes == "delta1,beta":
        nu = cfg.device.nu_mhz
        if nu is None:
            d = cfg.device
            nu = synth_two_qubit_toc(np.pi / 2, np.pi / 2, d.g12_mhz * MHZ, d.beta, d.delta1_mhz * MHZ).nu / MHZ
        nus = np.array([nu])
        kwargs["delta1_range"] = cfg.axis("delta1_mhz", SweepAxis(310.0, 330.0, 21)).values() * MHZ
    else:
        nus = cfg.axis("nu_mhz", SweepAxis(330.0, 350.0, 21)).values()
    table = sweeps.run_fig5(
        betas,
        nus * MHZ,
        params=cfg.device.coupled(),
        vartheta=cfg.gate.vartheta,
        varphi0=cfg.gate.varphi0,
        state_grid=cfg.state_grid or sweeps.DEFAULT_FIG5_STATE_GRID,
        opts=cfg.integrator.options(),
        workers=cfg.workers(),
        manifest=cfg.manifest(),
        **kwargs,
    )
    _emit(table, cfg, stdout)


def _cmd_fidelity(cfg, stdout, two_qubit):
    d, g = cfg.device, cfg.gate
    opts = cfg.integrator.options()
    if two_qubit:
        params = d.coupled()
        drive = synth_two_qubit_toc(g.vartheta, g.varphi0, params.g12, d.beta, params.delta1)
        if d.nu_mhz is not None:
            drive = two_qubit_drive_from_modulation(
                g.vartheta, g.varphi0, params.g12, d.beta, d.nu_mhz * MHZ, params.delta1
            )
        grid = cfg.state_grid or state_grid_size(cfg.n_states or 10001)
        rep = avg_gate_fidelity_2q(drive, params, opts=opts, grid=grid)
    else:
        pulse = synth_single_qubit_toc(g.axis, g.angle, d.omega_max)
        rep = avg_gate_fidelity_1q(pulse, d.drag_correction(), d.transmon(1), cfg.n_states or 1001, opts)
    rows = [("fidelity", rep.value), ("n_states", rep.n_states)]
    rows += [(k, float(v)) for k, v in rep.metadata.items() if isinstance(v, (int, float, np.floating))]
    man = base_manifest(cfg.manifest(), kind=rep.kind)
    _emit(ResultTable(("quantity", "value"), rows, man), cfg, stdout)


def _join_negative_values(argv):
    # argparse would read "-pi/2" as an option flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-"):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


VALUE_FLAGS = ("--angle", "--angles", "--beta-range", "--nu-range", "--delta1-range", "--omega-range")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _resolve(args)
        if args.command == "synth":
            _cmd_synth(cfg, stdout)
        elif args.command == "fig1b":
            _cmd_fig1b(cfg, stdout)
        elif args.command == "fig3":
            _cmd_fig3(cfg, stdout)
        elif args.command == "fig4":
            _cmd_fig4(cfg, stdout)
        elif args.command == "fig5":
            _cmd_fig5(cfg, stdout)
        elif args.command == "fidelity":
            _cmd_fidelity(cfg, stdout, args.two_qubit)
        elif args.command == "validate":
            results = validate.run_all(stdout)
            return EXIT_OK if all(r.passed for r in results) else 1
    except ConvergenceError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONVERGENCE
    except GeotocError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
