"""Command-line front end: experiment configs, runs, result files, caching.

Four subcommands, each driven by a JSON config file:

  exact1d   closed-form uniform-model decay and late-time spectrum
  box3d     3D-box hydrogen run: decay, spectrum, angular distribution
  kicks     phase-kick train: kicked spectrum vs the predicted comb
  two-atom  pair emission with dipolar coupling and resonance offsets

Common flags: --config <path>, --out <dir>, --threads <n>, --cache <dir>
(default cache directory from $SPONTEM_CACHE_DIR).  Exit codes: 0 success,
2 malformed config, 3 numeric failure.

Every physical quantity in a config is a {"value": ..., "unit": ...} pair
and unit errors are fatal; dimensionless ratios and counts are plain
numbers.  Times accept "tau_F" (golden-rule decay time) or "natural"
(inverse energy unit) in natural-unit commands and "s"/"ns" in the SI
box3d command; angles accept "deg"/"rad"; two-atom head parameters accept
"linewidth" (units of 2 pi eta^2/eps) or "natural".

Numeric CSV bodies are deterministic for a fixed config; wall time and
checksums live in manifest.json only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_CACHE_DIM_CAP = 4001  # cache files for larger decompositions are impractical


class ConfigError(Exception):
    """Malformed configuration: missing key, bad unit, invalid value."""


# ---------------------------------------------------------------------------
# config parsing helpers
# ---------------------------------------------------------------------------

def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    return cfg[key]


def _quantity(cfg: dict, key: str, units: dict, default=None) -> float:
    """Read a {"value", "unit"} pair and convert through the `units` map."""
    if key not in cfg:
        if default is not None:
            return default
        raise ConfigError(f"missing config key {key!r}")
    node = cfg[key]
    if not isinstance(node, dict) or "value" not in node or "unit" not in node:
        raise ConfigError(f"{key!r} must be an object with 'value' and 'unit'")
    unit = node["unit"]
    if unit not in units:
        raise ConfigError(
            f"{key!r}: unknown unit {unit!r} (allowed: {sorted(units)})")
    try:
        value = float(node["value"])
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r}: value {node['value']!r} is not a number")
    return value * units[unit]


def _number(cfg: dict, key: str, default=None, minimum=None) -> float:
    if key not in cfg:
        if default is not None:
            return default
        raise ConfigError(f"missing config key {key!r}")
    value = cfg[key]
    if isinstance(value, dict) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key!r} must be a plain number")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key!r} must be >= {minimum}")
    return float(value)


def _integer(cfg: dict, key: str, default=None, minimum=None) -> int:
    value = _number(cfg, key, default=default, minimum=minimum)
    if value != int(value):
        raise ConfigError(f"{key!r} must be an integer")
    return int(value)


def _time_grid(cfg: dict, units: dict):
    import numpy as np

    node = _require(cfg, "time_grid")
    if not isinstance(node, dict):
        raise ConfigError("'time_grid' must be an object")
    stop = _quantity(node, "stop", units)
    points = _integer(node, "points", minimum=2)
    if stop <= 0:
        raise ConfigError("'time_grid.stop' must be positive")
    return np.linspace(0.0, stop, points)


def _natural_field_params(cfg: dict):
    from .model import natural_units_timescale

    epsilon = _quantity(cfg, "epsilon", {"natural": 1.0})
    if epsilon <= 0:
        raise ConfigError("'epsilon' must be positive")
    ratio = _number(cfg, "eta_over_epsilon")
    if ratio <= 0:
        raise ConfigError("'eta_over_epsilon' must be positive")
    eta = ratio * epsilon
    tau_f = natural_units_timescale(epsilon, eta)
    return epsilon, eta, tau_f


def _normalized(probs):
    import numpy as np

    total = float(np.sum(probs))
    return probs / total if total > 0 else probs


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_exact1d(cfg: dict, outdir: str, args) -> list:
    import numpy as np

    from . import exact1d
    from .output import write_csv

    epsilon, eta, tau_f = _natural_field_params(cfg)
    truncation = _integer(cfg, "truncation", minimum=1)
    model = exact1d.Exact1DConfig(epsilon, eta, truncation)
    tunits = {"tau_F": tau_f, "natural": 1.0}
    times = _time_grid(cfg, tunits)

    pop = np.abs(exact1d.survival_amplitude(model, times)) ** 2
    golden = np.exp(-times / tau_f)
    deviation = pop - golden

    spectrum_time = _quantity(cfg, "spectrum_time", tunits, default=8.0 * tau_f)
    window = cfg.get("spectrum_window", {})
    if not isinstance(window, dict):
        raise ConfigError("'spectrum_window' must be an object")
    half_width = _quantity(
        window, "half_width",
        {"linewidth": 1.0 / tau_f, "natural": 1.0},
        default=5.0 / tau_f,
    )
    max_points = _integer(window, "max_points", default=801, minimum=16)
    k_max = min(int(np.ceil(half_width / epsilon)), truncation)
    if k_max < 8:
        raise ConfigError("spectrum window too narrow for the mode spacing")
    stride = max(1, (2 * k_max) // max_points)
    ks = np.arange(-k_max, k_max + 1, stride)
    ks = ks[ks != 0]
    probs = exact1d.emission_spectrum(model, ks, spectrum_time)

    pop_path = os.path.join(outdir, "population.csv")
    write_csv(pop_path, [
        ("time", "natural", times),
        ("excited_population", "1", pop),
        ("golden_rule", "1", golden),
        ("deviation", "1", deviation),
    ])
    spec_path = os.path.join(outdir, "spectrum.csv")
    write_csv(spec_path, [
        ("offset", "natural", ks * epsilon),
        ("probability", "1", probs),
        ("probability_normalized", "norm", _normalized(probs)),
    ])
    print(f"exact1d: {2 * truncation + 1} states, "
          f"max |deviation| = {np.max(np.abs(deviation)):.6g}")
    return [pop_path, spec_path]


def _box_from_config(cfg: dict):
    from . import box3d

    preset = cfg.get("preset")
    if preset is not None:
        if preset == "hydrogen-table2":
            return box3d.table2_box()
        if preset == "hydrogen-desk":
            return box3d.desk_box()
        raise ConfigError(f"unknown preset {preset!r}")
    node = _require(cfg, "box")
    if not isinstance(node, dict):
        raise ConfigError("'box' must be an object")
    lengths = {"m": 1.0, "mm": 1e-3}
    return box3d.BoxSpec(
        lx=_quantity(node, "lx", lengths),
        ly=_quantity(node, "ly", lengths),
        lz=_quantity(node, "lz", lengths),
        k0=_quantity(node, "k0", {"1/m": 1.0}),
        delta=_quantity(node, "delta", {"1/m": 1.0}),
        mu=_quantity(node, "mu", {"C*m": 1.0}),
    )


def _cmd_box3d(cfg: dict, outdir: str, args) -> list:
    import numpy as np

    from . import box3d, dynamics, observables
    from .arrowhead import eigendecompose_arrowhead
    from .output import cache_eigendecomposition, write_csv

    box = _box_from_config(cfg)
    normalization = cfg.get("coupling_normalization", "physical")
    if normalization not in ("physical", "literal"):
        raise ConfigError("'coupling_normalization' must be 'physical' or 'literal'")
    modes = box3d.enumerate_modes(box, normalization=normalization)
    cap = _integer(cfg, "mode_cap", default=25_000, minimum=1)
    if modes.n_modes > cap:
        raise ConfigError(
            f"mode count {modes.n_modes} exceeds the configured cap {cap}")
    print(f"box3d: {modes.n_modes} modes in the shell")

    tunits = {"s": 1.0, "ns": 1e-9}
    times = _time_grid(cfg, tunits)
    spectrum_time = _quantity(cfg, "spectrum_time", tunits, default=17.2e-9)

    eig = None
    if args.cache and modes.n_modes + 1 <= _CACHE_DIM_CAP:
        ham = dynamics.hamiltonian_from_modes(modes)
        eig, path = cache_eigendecomposition(ham, args.cache, eigendecompose_arrowhead)
        print(f"box3d: decomposition cache at {path}")
    run = dynamics.decay_run(modes, times, spectrum_time, eig=eig)

    pop_path = os.path.join(outdir, "population.csv")
    write_csv(pop_path, [
        ("time", "s", times),
        ("excited_population", "1", run.atom_population),
    ])
    spec_path = os.path.join(outdir, "spectrum.csv")
    write_csv(spec_path, [
        ("offset", "rad/s", run.spectrum.frequencies),
        ("probability", "1", run.spectrum.probabilities),
        ("probability_normalized", "norm", _normalized(run.spectrum.probabilities)),
        ("theta", "rad", run.spectrum.angles),
    ])
    centers, sums, means, counts = observables.bin_angular(
        modes.geometry.theta, run.spectrum.probabilities,
        n_bins=_integer(cfg, "angular_bins", default=60, minimum=4),
    )
    ang_path = os.path.join(outdir, "angular.csv")
    write_csv(ang_path, [
        ("theta_center", "rad", centers),
        ("summed_probability", "1", sums),
        ("mean_probability", "1", np.where(np.isfinite(means), means, 0.0)),
        ("mode_count", "1", counts.astype(float)),
    ])
    return [pop_path, spec_path, ang_path]


def _cmd_kicks(cfg: dict, outdir: str, args) -> list:
    import numpy as np

    from . import dynamics
    from .arrowhead import UniformArrowheadEigensystem
    from .output import write_csv

    epsilon, eta, tau_f = _natural_field_params(cfg)
    n_modes = _integer(cfg, "n_modes", minimum=3)
    if n_modes % 2 == 0:
        raise ConfigError("'n_modes' must be odd (symmetric grid with resonance)")
    phi = _quantity(cfg, "phi", {"deg": np.pi / 180.0, "rad": 1.0})
    tunits = {"tau_F": tau_f, "natural": 1.0}
    tau_r = _quantity(cfg, "tau_r", tunits)
    total_time = _quantity(cfg, "total_time", tunits, default=10.0 * tau_f)
    if tau_r <= 0 or total_time <= tau_r:
        raise ConfigError("need 0 < tau_r < total_time")
    harmonics = _integer(cfg, "harmonics", default=8, minimum=1)

    count = int(np.floor(total_time / tau_r + 1e-9))
    schedule = dynamics.KickSchedule(phi=phi, tau_r=tau_r, count=count,
                                     total_time=total_time)
    free_schedule = dynamics.KickSchedule(phi=0.0, tau_r=tau_r, count=count,
                                          total_time=total_time)
    eig = UniformArrowheadEigensystem((n_modes - 1) // 2, epsilon, eta)
    kicked = dynamics.run_kick_sequence(eig, schedule, tau_f=tau_f)
    free = dynamics.run_kick_sequence(eig, free_schedule, tau_f=tau_f)

    pop_path = os.path.join(outdir, "population.csv")
    write_csv(pop_path, [
        ("time", "natural", kicked.times),
        ("population_kicked", "1", kicked.atom_population),
        ("population_free", "1", free.atom_population),
    ])
    probs = np.abs(kicked.final_state.amplitudes[1:]) ** 2
    spec_path = os.path.join(outdir, "spectrum.csv")
    write_csv(spec_path, [
        ("offset", "natural", eig.diag),
        ("probability", "1", probs),
        ("probability_normalized", "norm", _normalized(probs)),
    ])
    offsets, weights = dynamics.predicted_kick_spectrum(phi, tau_r, harmonics)
    pred_path = os.path.join(outdir, "predicted.csv")
    write_csv(pred_path, [
        ("offset", "natural", offsets),
        ("intensity", "1", weights),
    ])
    print(f"kicks: {count} kicks of {np.rad2deg(phi):g} deg at tau_F/{tau_f / tau_r:g}")
    return [pop_path, spec_path, pred_path]


def _cmd_two_atom(cfg: dict, outdir: str, args) -> list:
    from . import dynamics
    from .arrowhead import UniformArrowheadEigensystem
    from .output import write_csv

    epsilon, eta, tau_f = _natural_field_params(cfg)
    n_modes = _integer(cfg, "n_modes", minimum=3)
    if n_modes % 2 == 0:
        raise ConfigError("'n_modes' must be odd (symmetric grid with resonance)")
    linewidth = 1.0 / tau_f
    hunits = {"linewidth": linewidth, "natural": 1.0}
    initial = _require(cfg, "initial")
    if initial not in ("10", "01", "s", "t"):
        raise ConfigError("'initial' must be one of '10', '01', 's', 't'")
    spec = dynamics.TwoAtomSpec(
        delta1=_quantity(cfg, "delta1", hunits, default=0.0),
        delta2=_quantity(cfg, "delta2", hunits, default=0.0),
        omega_d=_quantity(cfg, "omega_d", hunits, default=0.0),
        eta=eta,
        epsilon=epsilon,
        n_modes=n_modes,
        initial=initial,
    )
    tunits = {"tau_F": tau_f, "natural": 1.0}
    times = _time_grid(cfg, tunits)
    spectrum_time = _quantity(cfg, "spectrum_time", tunits, default=8.0 * tau_f)

    run = dynamics.run_two_atom(spec, times, spectrum_time=spectrum_time)
    single = UniformArrowheadEigensystem((n_modes - 1) // 2, epsilon, eta)
    reference = dynamics.single_atom_populations(single, times)

    pop_path = os.path.join(outdir, "populations.csv")
    write_csv(pop_path, [
        ("time", "natural", times),
        ("population_atom1", "1", run.population_atom1),
        ("population_atom2", "1", run.population_atom2),
        ("population_single_reference", "1", reference),
    ])
    spec_path = os.path.join(outdir, "spectrum.csv")
    write_csv(spec_path, [
        ("offset", "natural", run.spectrum.frequencies),
        ("probability", "1", run.spectrum.probabilities),
        ("probability_normalized", "norm", _normalized(run.spectrum.probabilities)),
    ])
    print(f"two-atom: initial |{initial}>, spectrum at t = {spectrum_time / tau_f:g} tau_F")
    return [pop_path, spec_path]


_COMMANDS = {
    "exact1d": _cmd_exact1d,
    "box3d": _cmd_box3d,
    "kicks": _cmd_kicks,
    "two-atom": _cmd_two_atom,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spontem",
        description="single-photon spontaneous-emission simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="BLAS/OpenMP thread count")
        p.add_argument("--cache", default=os.environ.get("SPONTEM_CACHE_DIR"),
                       help="eigendecomposition cache directory")
    return parser


def _apply_threads(threads) -> None:
    if threads is None:
        return
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(threads)


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _apply_threads(args.threads)
        cfg = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        start = time.perf_counter()
        outputs = _COMMANDS[args.command](cfg, args.out, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # numeric failure in the solver stack
        print(f"numeric error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC

    from . import __version__
    from .output import RunManifest

    manifest = RunManifest(
        experiment=args.command,
        config=cfg,
        code_version=__version__,
        wall_time_s=time.perf_counter() - start,
    )
    for path in outputs:
        manifest.add_output(path)
    manifest.write(os.path.join(args.out, "manifest.json"))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
