"""Command-line front end: reproducible time series and diagnostic reports.

Commands: survival, reduced, gkls-compare, pw, potential.  Outputs are CSV
tables or structured-text reports written atomically, with a full parameter
echo in the header and no timestamps, so identical configurations produce
byte-identical files.

Exit codes: 0 success; 2 invalid input; 3 numerical (quadrature) failure,
in which case partial output plus a .failures manifest is still written.

Flag precedence: command line > --config file (JSON) > built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import diagnostics, gkls, oscint, output, pocket, potential
from .expressions import ExpressionError, parse_expression
from .oscint import QuadratureConfig, QuadratureFailure, SeriesFailure
from .spectral import (
    DephasingParams,
    exponential_density,
    lorentzian_density,
    normalize_check,
    table_density,
)

USAGE_ERROR = 2
NUMERICAL_ERROR = 3

_GRID_DEFAULTS = {"t_start": 0.0, "t_end": 10.0, "n_points": 41, "spacing": "linear"}
_TOL_DEFAULTS = {"abs_tol": 1e-9, "rel_tol": 1e-9}

DEFAULTS = {
    "survival": {"gamma": 1.0, "omega0": 0.0, "format": "csv", "density": None,
                 **_GRID_DEFAULTS, **_TOL_DEFAULTS},
    "reduced": {"gamma": 1.0, "omega0": 0.0, "format": "csv", "rho00": 0.5,
                "re_rho01": 0.5, "im_rho01": 0.0, **_GRID_DEFAULTS, **_TOL_DEFAULTS},
    "gkls-compare": {"gamma": 1.0, "omega0": 0.0, "format": "csv", "rho00": 0.5,
                     "re_rho01": 0.5, "im_rho01": 0.0,
                     "t_start": 0.0, "t_end": 20.0, "n_points": 41, "spacing": "linear",
                     **_TOL_DEFAULTS},
    "pw": {"gamma": 1.0, "omega0": 0.0, "rate": 1.0, "amplitude": "dephasing",
           "T_values": "10,31.6,100,316,1000", "w0": 0.5, "fit_window": None,
           "t_start": 0.25, "t_end": 10.0, "n_points": 40, "spacing": "linear",
           **_TOL_DEFAULTS},
    "potential": {"gamma": 1.0, "omega0": 0.0, "potential": "exp", "fd_derivative": False,
                  "t_start": 0.25, "t_end": 10.0, "n_points": 40, "spacing": "linear",
                  **_TOL_DEFAULTS},
}


class UsageError(ValueError):
    pass


def build_time_grid(t_start: float, t_end: float, n_points: int, spacing: str) -> np.ndarray:
    n = int(n_points)
    if n < 1:
        raise UsageError(f"n_points must be >= 1, got {n_points}")
    if n == 1:
        return np.array([float(t_start)])
    if not t_end > t_start:
        raise UsageError(f"need t_end > t_start for {n} points, got [{t_start}, {t_end}]")
    if spacing == "linear":
        return np.linspace(float(t_start), float(t_end), n)
    if spacing == "log":
        if t_start <= 0:
            raise UsageError("log spacing requires t_start > 0")
        return np.geomspace(float(t_start), float(t_end), n)
    raise UsageError(f"spacing must be 'linear' or 'log', got {spacing!r}")


def _load_density_spec(spec, params: DephasingParams):
    if spec is None:
        return lorentzian_density(params)
    if isinstance(spec, str):
        text = spec.strip()
        if not text.startswith("{"):
            with open(text, "r") as fh:
                text = fh.read()
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"density spec is not valid JSON: {exc}") from None
    kind = spec.get("kind")
    if kind == "lorentzian":
        p = DephasingParams(float(spec.get("gamma", params.gamma)),
                            float(spec.get("omega0", params.omega0)))
        return lorentzian_density(p)
    if kind == "exponential":
        return exponential_density(float(spec.get("rate", 1.0)))
    if kind == "user-table":
        interp = spec.get("interpolation", "linear")
        if interp != "linear":
            raise UsageError(f"user-table interpolation must be 'linear', got {interp!r}")
        knots = spec.get("knots")
        if not knots:
            raise UsageError("user-table needs a non-empty 'knots' list of [E, p] pairs")
        support = spec.get("support")
        if not support or len(support) != 2:
            # no automatic tail detection: the support must be declared
            raise UsageError("user-table needs an explicit 'support': [lo, hi]")
        e = [float(k[0]) for k in knots]
        p = [float(k[1]) for k in knots]
        d = table_density(e, p, (float(support[0]), float(support[1])))
        norm = normalize_check(d)
        if abs(norm - 1.0) > 1e-6:
            raise UsageError(f"user-table density is not normalized: integral = {norm:.9g}")
        return d
    raise UsageError(f"density kind must be lorentzian/exponential/user-table, got {kind!r}")


def _load_potential_spec(spec, fd_derivative: bool) -> potential.MonotonePotential:
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            spec = json.loads(text)
        elif text.startswith("expr:"):
            spec = {"kind": "user-expression", "expression": text[len("expr:"):]}
        else:
            spec = {"kind": text}
    kind = spec.get("kind")
    if kind == "ramp":
        p = potential.ramp_potential()
    elif kind == "exp":
        p = potential.exp_potential()
    elif kind == "user-expression":
        expr = spec.get("expression")
        if not expr:
            raise UsageError("user-expression potential needs an 'expression' string")
        p = potential.induced_map(parse_expression(expr), label=f"expr:{expr}")
    else:
        raise UsageError(f"potential kind must be ramp/exp/user-expression, got {kind!r}")
    if fd_derivative and p.V_prime is not None:
        p = potential.induced_map(p.V, None, label=p.label + "+fd")
    return p


def _series_columns(series) -> list[tuple[str, np.ndarray]]:
    return [
        ("t", series.times),
        ("re", series.values.real),
        ("im", series.values.imag),
        ("abs", np.abs(series.values)),
    ]


def _write_table(path: str, fmt: str, columns, params) -> None:
    if fmt == "csv":
        output.write_csv(path, columns, params)
    elif fmt == "structured-text":
        entries = [(name, ",".join(output.fmt(v) for v in arr)) for name, arr in columns]
        output.write_report(path, params, [("data", entries)])
    else:
        raise UsageError(f"format must be 'csv' or 'structured-text', got {fmt!r}")


def _write_failure_manifest(out_path: str, exc: SeriesFailure, params) -> None:
    sections = []
    for i, f in enumerate(exc.failures):
        est = complex(f.estimate)
        sections.append(
            (f"failure {i}", [
                ("t", f.t),
                ("estimate_re", est.real),
                ("estimate_im", est.imag),
                ("error_bound", f.error_bound),
                ("detail", f.detail),
            ])
        )
    output.write_report(out_path + ".failures", params, sections)


def _echo(cfg: dict, command: str) -> dict:
    params = {"command": command}
    for key in sorted(cfg):
        params[key] = cfg[key]
    return params


def _merge(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        with open(args.config, "r") as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config file is not valid JSON: {exc}") from None
        unknown = set(loaded) - set(cfg) - {"out"}
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "out", None) is not None:
        cfg["out"] = args.out
    if "out" not in cfg or not cfg["out"]:
        raise UsageError("--out is required (or provide 'out' in the config file)")
    return cfg


def _quad_config(cfg: dict) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=float(cfg["abs_tol"]), rel_tol=float(cfg["rel_tol"]))


# ---------------------------------------------------------------------------
# commands


def cmd_survival(cfg: dict) -> int:
    params = DephasingParams(float(cfg["gamma"]), float(cfg["omega0"]))
    d = _load_density_spec(cfg["density"], params)
    grid = build_time_grid(cfg["t_start"], cfg["t_end"], cfg["n_points"], cfg["spacing"])
    qcfg = _quad_config(cfg)
    echo = _echo(cfg, "survival")
    echo["density_label"] = d.label
    try:
        series = oscint.amplitude_series(d, grid, qcfg)
    except SeriesFailure as exc:
        _write_table(cfg["out"], cfg["format"], _series_columns(exc.series), echo)
        _write_failure_manifest(cfg["out"], exc, echo)
        print(f"survival: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    _write_table(cfg["out"], cfg["format"], _series_columns(series), echo)
    return 0


def _qubit_from_cfg(cfg: dict) -> pocket.QubitState:
    rho00 = float(cfg["rho00"])
    rho01 = complex(float(cfg["re_rho01"]), float(cfg["im_rho01"]))
    return pocket.QubitState(rho00, 1.0 - rho00, rho01)


def cmd_reduced(cfg: dict) -> int:
    params = DephasingParams(float(cfg["gamma"]), float(cfg["omega0"]))
    rho0 = _qubit_from_cfg(cfg)
    grid = build_time_grid(cfg["t_start"], cfg["t_end"], cfg["n_points"], cfg["spacing"])
    qcfg = _quad_config(cfg)
    model = pocket.PocketModel(params)
    echo = _echo(cfg, "reduced")

    def rows(series):
        states = []
        for t, f in zip(series.times, series.values):
            if t == 0:
                states.append(rho0)
            else:
                states.append(pocket.apply_dephasing(rho0, f))
        cols = [
            ("t", series.times),
            ("rho00", np.array([s.rho00 for s in states])),
            ("rho11", np.array([s.rho11 for s in states])),
            ("re_rho01", np.array([s.rho01.real for s in states])),
            ("im_rho01", np.array([s.rho01.imag for s in states])),
            ("sigma_x", np.array([2.0 * s.rho01.real for s in states])),
        ]
        return cols

    try:
        series = oscint.amplitude_series(model.environment_density, grid, qcfg)
    except SeriesFailure as exc:
        _write_table(cfg["out"], cfg["format"], rows(exc.series), echo)
        _write_failure_manifest(cfg["out"], exc, echo)
        print(f"reduced: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    _write_table(cfg["out"], cfg["format"], rows(series), echo)
    return 0


def cmd_gkls_compare(cfg: dict) -> int:
    params = DephasingParams(float(cfg["gamma"]), float(cfg["omega0"]))
    rho0 = _qubit_from_cfg(cfg)
    grid = build_time_grid(cfg["t_start"], cfg["t_end"], cfg["n_points"], cfg["spacing"])
    qcfg = _quad_config(cfg)
    model = pocket.PocketModel(params)
    echo = _echo(cfg, "gkls-compare")
    comparisons = []
    for mode in gkls.CONVENTIONS:
        gen = gkls.generator_from_params(params, mode)
        comparisons.append(gkls.compare_exact_vs_semigroup(model, gen, rho0, grid, qcfg))
    for comp in comparisons:
        echo[f"max_distance_{comp.convention}"] = output.fmt(comp.max_distance)
    columns = [("t", grid)] + [
        (f"distance_{comp.convention}", comp.distances) for comp in comparisons
    ]
    _write_table(cfg["out"], cfg["format"], columns, echo)
    return 0


def _pw_amplitude(cfg: dict, qcfg: QuadratureConfig):
    """Amplitude callable (or quadrature series) plus the series used for fits."""
    kind = cfg["amplitude"]
    params = DephasingParams(float(cfg["gamma"]), float(cfg["omega0"]))
    grid = build_time_grid(cfg["t_start"], cfg["t_end"], cfg["n_points"], cfg["spacing"])
    if kind == "dephasing":
        gamma, om0 = params.gamma, params.omega0
        amp = lambda t: np.exp(-gamma * abs(t) / 2.0) * np.exp(-1j * om0 * t)
        series = oscint.ComplexTimeSeries(grid, np.array([amp(t) for t in grid]))
        return amp, series
    if kind == "halfline-exp":
        rate = float(cfg["rate"])
        if rate <= 0:
            raise UsageError(f"rate must be positive, got {rate}")
        amp = lambda t: rate / complex(rate, t)
        series = oscint.ComplexTimeSeries(grid, np.array([amp(t) for t in grid]))
        return amp, series
    if kind == "constant":
        amp = lambda t: 1.0 + 0.0j
        series = oscint.ComplexTimeSeries(grid, np.ones(grid.shape, dtype=complex))
        return amp, series
    if kind == "global-survival":
        w0 = float(cfg["w0"])
        d = lorentzian_density(params)
        series = oscint.global_survival_series((w0, 1.0 - w0), d, grid, qcfg)
        return series, series
    raise UsageError(
        f"amplitude must be dephasing/halfline-exp/constant/global-survival, got {kind!r}"
    )


def cmd_pw(cfg: dict) -> int:
    qcfg = _quad_config(cfg)
    Ts = [float(tok) for tok in str(cfg["T_values"]).split(",") if tok.strip()]
    echo = _echo(cfg, "pw")
    try:
        amplitude, series = _pw_amplitude(cfg, qcfg)
        fit_window = cfg.get("fit_window")
        if fit_window:
            lo, hi = (float(x) for x in str(fit_window).split(","))
        else:
            lo, hi = float(series.times[0]), float(series.times[-1])
        growth = diagnostics.fit_pw_growth(amplitude, Ts, qcfg)
        fit = diagnostics.exponential_fit(series, (lo, hi))
        report = diagnostics.DecayReport(
            pw_values=growth.pw_values,
            growth_class=growth.growth_class,
            fit=fit,
            longtime_value=float(abs(series.values[-1])),
        )
    except SeriesFailure as exc:
        _write_table(cfg["out"], "csv", _series_columns(exc.series), echo)
        _write_failure_manifest(cfg["out"], exc, echo)
        print(f"pw: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    sections = [
        ("pw", [(f"T={output.fmt(T)}", v) for T, v in report.pw_values]),
        ("classification", [
            ("class", report.growth_class),
            ("c0", growth.c0),
            ("c1", growth.c1),
            ("rel_residual", growth.rel_residual),
        ]),
        ("fit", [
            ("window", f"{output.fmt(lo)},{output.fmt(hi)}"),
            ("rate", report.fit.rate),
            ("amplitude", report.fit.amplitude),
            ("residual", report.fit.residual),
        ]),
        ("longtime", [("abs_amplitude", report.longtime_value)]),
    ]
    output.write_report(cfg["out"], echo, sections)
    return 0


def cmd_potential(cfg: dict) -> int:
    params = DephasingParams(float(cfg["gamma"]), float(cfg["omega0"]))
    qcfg = _quad_config(cfg)
    pot = _load_potential_spec(cfg["potential"], bool(cfg["fd_derivative"]))
    echo = _echo(cfg, "potential")
    echo["potential_label"] = pot.label
    state = potential.build_initial_state(pot, params)
    prefix = cfg["out"]

    # density profile over the bulk of the transported distribution
    half = params.gamma / 2.0
    e_lo = params.omega0 + half * math.tan(math.pi * (0.005 - 0.5))
    e_hi = params.omega0 + half * math.tan(math.pi * (0.995 - 0.5))
    xs = np.linspace(pot.W_inverse(e_lo), pot.W_inverse(e_hi), 401)
    dens = np.array([state.density.density(float(x)) for x in xs])
    output.write_csv(prefix + "_density.csv", [("x", xs), ("density", dens)], echo)

    # inverse round trip on [-20, 20]
    xr = np.linspace(-20.0, 20.0, 401)
    resid = np.array([abs(pot.W_inverse(pot.W(float(x))) - float(x)) for x in xr])
    output.write_csv(prefix + "_roundtrip.csv", [("x", xr), ("roundtrip_residual", resid)], echo)

    grid = build_time_grid(cfg["t_start"], cfg["t_end"], cfg["n_points"], cfg["spacing"])
    failures = None
    try:
        series = potential.generalized_factor_series(pot, params, grid, qcfg, state)
    except SeriesFailure as exc:
        series = exc.series
        failures = exc
    fit = diagnostics.exponential_fit(series, (float(grid[0]), float(grid[-1])))
    echo["fit_rate"] = output.fmt(fit.rate)
    echo["fit_amplitude"] = output.fmt(fit.amplitude)
    echo["fit_residual"] = output.fmt(fit.residual)
    output.write_csv(prefix + "_factor.csv", _series_columns(series), echo)
    if failures is not None:
        _write_failure_manifest(prefix + "_factor.csv", failures, echo)
        print(f"potential: {failures}", file=sys.stderr)
        return NUMERICAL_ERROR
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser, with_format: bool = True) -> None:
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--omega0", type=float)
    sub.add_argument("--t-start", dest="t_start", type=float)
    sub.add_argument("--t-end", dest="t_end", type=float)
    sub.add_argument("--n-points", dest="n_points", type=int)
    sub.add_argument("--spacing", choices=("linear", "log"))
    sub.add_argument("--abs-tol", dest="abs_tol", type=float)
    sub.add_argument("--rel-tol", dest="rel_tol", type=float)
    sub.add_argument("--out")
    sub.add_argument("--config")
    if with_format:
        sub.add_argument("--format", choices=("csv", "structured-text"))


def _add_qubit_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--rho00", type=float)
    sub.add_argument("--re-rho01", dest="re_rho01", type=float)
    sub.add_argument("--im-rho01", dest="im_rho01", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decaylab",
        description="Reproducible decay-law numerics: survival amplitudes, reduced "
                    "dephasing dynamics, semigroup comparison, and Paley-Wiener reports.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("survival", help="survival amplitude a(t) of a spectral density")
    _add_common(s)
    s.add_argument("--density", help="density spec: JSON object or path to a JSON file")

    s = subs.add_parser("reduced", help="exact reduced qubit state under dephasing")
    _add_common(s)
    _add_qubit_flags(s)

    s = subs.add_parser("gkls-compare", help="exact dynamics vs semigroup, both conventions")
    _add_common(s)
    _add_qubit_flags(s)

    s = subs.add_parser("pw", help="Paley-Wiener sweep, growth class, exponential fit")
    _add_common(s, with_format=False)
    s.add_argument("--amplitude", choices=("dephasing", "halfline-exp", "constant",
                                           "global-survival"))
    s.add_argument("--rate", type=float)
    s.add_argument("--T-values", dest="T_values")
    s.add_argument("--w0", type=float)
    s.add_argument("--fit-window", dest="fit_window")

    s = subs.add_parser("potential", help="generalized potential: state, round trip, factor")
    _add_common(s, with_format=False)
    s.add_argument("--potential", help="ramp | exp | expr:<expression> | JSON spec")
    s.add_argument("--fd-derivative", dest="fd_derivative", action="store_const", const=True)

    return parser


_COMMANDS = {
    "survival": cmd_survival,
    "reduced": cmd_reduced,
    "gkls-compare": cmd_gkls_compare,
    "pw": cmd_pw,
    "potential": cmd_potential,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args.command, args)
        return _COMMANDS[args.command](cfg)
    except (UsageError, ExpressionError, potential.MonotonicityError,
            potential.RangeError, ValueError, OverflowError, OSError) as exc:
        print(f"decaylab {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (QuadratureFailure, SeriesFailure) as exc:
        print(f"decaylab {args.command}: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
