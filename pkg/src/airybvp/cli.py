"""Command line scenario runner.

A scenario is an INI file with flat dotted keys grouped in four sections:

    [problem]   bc.family and the family's coupling constants
    [datum]     datum.kind plus kind-specific parameters
    [numerics]  series size N, grid P, time step dt, horizon T, toggles
    [analysis]  q_max for time classification, jump window, options

``airybvp run scenario.ini`` executes the decomposition pipeline for the
configured boundary family and writes delimited outputs plus rendered
figures into one directory per scenario.  ``airybvp list`` prints a catalog
of the six families; every key = value line in a catalog block is accepted
verbatim by ``run``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (the
message names the module that raised).
"""

from __future__ import annotations

import argparse
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    REVIVAL_TIME,
    classify_time,
    decay_exponent,
    detect_jumps,
    magnitudes_by_order,
)
from .core import (
    AiryNumericalError,
    BoundarySpec,
    ConfigError,
    ForcingSpec,
    InitialDatum,
    SpaceTimeField,
    SpectralCoefficients,
    BOUNDED_VARIATION,
    SMOOTH_NONMATCHING,
    SMOOTH_PERIODIC,
    TWO_PI,
)
from .correction import (
    build_dirichlet_series,
    build_forced_quasi_series,
    build_mixed_series,
    build_pseudoperiodic_series,
    build_quasiperiodic_series,
    compose_u,
    eval_series_field,
    forcing_mode_sum,
    w_dirichlet,
    w_mixed,
)
from .oscquad import SampledTimeFunction
from .periodic import eval_v_field, fourier_coeffs, shifted_fourier_coeffs
from .reference import ReferenceConfig, solve_with_traces

FLOAT_FMT = "%.17g"

# Families whose correction series is driven by solver traces; these always
# run the reference solver.  The others only do so on numerics.reference.
TRACE_FAMILIES = ("dirichlet", "mixed_dirichlet", "pseudo_periodic")

SUMMARY_KEYS = (
    "status",
    "family",
    "datum.kind",
    "numerics.N",
    "numerics.P",
    "numerics.dt",
    "numerics.T",
    "max_u",
    "max_v",
    "max_w",
    "decomposition_residual",
    "decay_alpha",
    "decay_residual",
    "jump_count",
    "t_classification",
    "revival_time",
)


# ---------------------------------------------------------------------------
# Configuration parsing


def _read_config(path: Path) -> "dict[str, dict[str, str]]":
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None
    )
    parser.optionxform = str  # keep dotted keys verbatim
    try:
        with open(path, "r") as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc)) from exc
    except configparser.Error as exc:
        raise ConfigError("cannot parse %s: %s" % (path, exc)) from exc
    known = {
        "problem": {
            "bc.family", "bc.gamma", "bc.theta", "bc.beta0", "bc.beta1",
            "bc.beta2", "bc.h1.kind", "bc.h1.amplitude", "bc.h1.frequency",
            "bc.h2.kind", "bc.h2.amplitude", "bc.h2.frequency",
            "bc.wellposedness_assumed",
        },
        "datum": {"datum.kind", "datum.amplitude", "datum.mode", "datum.cut",
                  "datum.path"},
        "numerics": {"numerics.N", "numerics.P", "numerics.dt", "numerics.T",
                     "numerics.stride", "numerics.richardson", "numerics.tail",
                     "numerics.reference"},
        "analysis": {"analysis.q_max", "analysis.window", "analysis.cesaro"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigError(
                "%s: unknown section [%s] (expected %s)"
                % (path, section, ", ".join(sorted(known)))
            )
        for key in parser.options(section):
            if key not in known[section]:
                raise ConfigError(
                    "%s [%s]: unknown key %r" % (path, section, key)
                )
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _take(section: dict, key: str, conv, default=None, where=""):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError("%s: missing required key %s" % (where, key))
    raw = section[key].strip()
    try:
        if conv is bool:
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError("not a boolean: %r" % raw)
        return conv(raw)
    except ValueError as exc:
        raise ConfigError("%s: bad value for %s: %s" % (where, key, exc)) from exc


def _bump_profile(x, amplitude):
    p = x * (1.0 - x)
    return amplitude * np.exp(4.0) * np.exp(-1.0 / p) if p > 0.0 else 0.0


def _build_datum(section: dict, where: str):
    kind = _take(section, "datum.kind", str, where=where)
    amp = _take(section, "datum.amplitude", float, default=1.0, where=where)
    if kind == "fourier_mode":
        mode = _take(section, "datum.mode", int, default=1, where=where)
        return (
            InitialDatum(
                evaluator=lambda x: amp * np.exp(1j * TWO_PI * mode * x),
                regularity=SMOOTH_PERIODIC,
            ),
            kind,
        )
    if kind == "step":
        cut = _take(section, "datum.cut", float, default=0.5, where=where)
        if not 0.0 < cut < 1.0:
            raise ConfigError("%s: datum.cut must lie in (0, 1)" % where)
        return (
            InitialDatum(
                evaluator=lambda x: amp if x < cut else 0.0,
                regularity=BOUNDED_VARIATION,
                breakpoints=(cut,),
            ),
            kind,
        )
    if kind == "bump":
        return (
            InitialDatum(
                evaluator=lambda x: _bump_profile(x, amp),
                regularity=SMOOTH_PERIODIC,
            ),
            kind,
        )
    if kind == "poly":
        return (
            InitialDatum(
                evaluator=lambda x: amp * x * x * (1.0 - x) * (1.0 - x),
                regularity=SMOOTH_NONMATCHING,
            ),
            kind,
        )
    if kind == "samples_file":
        spath = _take(section, "datum.path", str, where=where)
        try:
            with open(spath, "r") as fh:
                first = fh.readline()
            sep = "," if "," in first else None
            raw = np.loadtxt(spath, ndmin=2, delimiter=sep)
        except OSError as exc:
            raise ConfigError("%s: cannot read datum.path: %s" % (where, exc)) from exc
        except ValueError as exc:
            raise ConfigError("%s: cannot parse datum.path: %s" % (where, exc)) from exc
        samples = raw[:, 0] + 1j * raw[:, 1] if raw.shape[1] >= 2 else raw[:, 0]
        try:
            return InitialDatum(samples=samples, regularity=SMOOTH_PERIODIC), kind
        except ValueError as exc:
            raise ConfigError("%s: %s" % (where, exc)) from exc
    raise ConfigError(
        "%s: datum.kind must be one of fourier_mode, step, bump, poly, "
        "samples_file (got %r)" % (where, kind)
    )


class Scenario:
    """Validated configuration, ready to run."""

    def __init__(self, path: Path):
        raw = _read_config(path)
        self.path = path
        where = str(path)
        try:
            self.bc = BoundarySpec.from_config_items(raw.get("problem", {}))
        except ValueError as exc:
            raise ConfigError("%s [problem]: %s" % (where, exc)) from exc
        self.datum, self.datum_kind = _build_datum(
            raw.get("datum", {}), where + " [datum]"
        )
        num = raw.get("numerics", {})
        w = where + " [numerics]"
        self.N = _take(num, "numerics.N", int, default=64, where=w)
        self.P = _take(num, "numerics.P", int, default=256, where=w)
        self.T = _take(num, "numerics.T", float, where=w)
        self.dt = _take(num, "numerics.dt", float, default=self.T / 1000.0, where=w)
        self.stride = _take(num, "numerics.stride", int, default=0, where=w)
        self.richardson = _take(num, "numerics.richardson", bool, default=False, where=w)
        tail = _take(num, "numerics.tail", str, default="auto", where=w)
        if tail not in ("auto", "true", "false"):
            raise ConfigError("%s: numerics.tail must be auto, true or false" % w)
        self.tail = tail != "false"  # auto means on where supported
        ref = _take(num, "numerics.reference", str, default="auto", where=w)
        if ref not in ("auto", "true", "false"):
            raise ConfigError("%s: numerics.reference must be auto, true or false" % w)
        self.reference = (
            self.bc.family in TRACE_FAMILIES if ref == "auto" else ref == "true"
        )
        if self.bc.family in TRACE_FAMILIES and not self.reference:
            raise ConfigError(
                "%s: family %r needs solver traces; numerics.reference = false "
                "is contradictory" % (w, self.bc.family)
            )
        if self.N < 1 or self.T <= 0 or self.dt <= 0:
            raise ConfigError("%s: N, T and dt must be positive" % w)
        if self.N < 16:
            raise ConfigError(
                "%s: numerics.N must be at least 16 so the decay fit window "
                "[max(2, N/2), N] holds 8 usable orders" % w
            )
        if self.dt > self.T:
            raise ConfigError("%s: numerics.dt must not exceed numerics.T" % w)
        if self.P < 64:
            raise ConfigError(
                "%s: numerics.P must be at least 64 (the jump detector and "
                "the reference grid both need that resolution)" % w
            )
        ana = raw.get("analysis", {})
        w = where + " [analysis]"
        self.q_max = _take(ana, "analysis.q_max", int, default=8, where=w)
        self.window = _take(ana, "analysis.window", int, default=16, where=w)
        self.cesaro = _take(ana, "analysis.cesaro", bool, default=False, where=w)


# ---------------------------------------------------------------------------
# Output writers


def _write_field_csv(path: Path, field: SpaceTimeField):
    nx = field.x.shape[0]
    nt = field.t.shape[0]
    data = np.column_stack(
        [
            np.tile(field.x, nt),
            np.repeat(field.t, nx),
            np.real(field.values).ravel(),
            np.imag(field.values).ravel(),
        ]
    )
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", comments="",
               header="# x,t,re,im")


def _write_coefficients_csv(path: Path, ns, ks, times, magnitudes):
    rows = []
    for i, t in enumerate(times):
        block = np.column_stack(
            [ns, ks, np.full(ns.shape[0], t), magnitudes[i]]
        )
        rows.append(block)
    np.savetxt(path, np.vstack(rows), fmt=("%d", FLOAT_FMT, FLOAT_FMT, FLOAT_FMT),
               delimiter=",", comments="", header="# n,k,t,abs")


def _write_summary(path: Path, summary: dict):
    lines = []
    for key in SUMMARY_KEYS:
        lines.append("%s: %s" % (key, summary[key]))
    path.write_text("\n".join(lines) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


# ---------------------------------------------------------------------------
# The pipeline


def _correction_series(sc: Scenario, traces, times):
    """Build the correction series and, where supported, its tail pair."""
    family = sc.bc.family
    if family == "dirichlet":
        h1 = SampledTimeFunction(traces.times, traces.left[1])
        h2 = SampledTimeFunction(traces.times, traces.left[2] - traces.right[2])
        return build_dirichlet_series(h1, h2, sc.N, times), (h1, h2)
    if family == "mixed_dirichlet":
        ux1 = SampledTimeFunction(traces.times, traces.right[1])
        h2 = SampledTimeFunction(traces.times, traces.left[2] - traces.right[2])
        return build_mixed_series(sc.bc.gamma, ux1, h2, sc.N, times), (ux1, h2)
    if family == "pseudo_periodic":
        return build_pseudoperiodic_series(sc.bc.betas, traces, sc.N, times), None
    raise ConfigError("no trace-driven series for family %r" % family)


def run_scenario(config_path, out_dir, plots=True) -> Path:
    """Execute one scenario; returns the directory holding its outputs."""
    sc = Scenario(Path(config_path))
    family = sc.bc.family
    dest = Path(out_dir) / sc.path.stem
    dest.mkdir(parents=True, exist_ok=True)

    steps = max(128, int(round(sc.T / sc.dt)))
    stride = sc.stride if sc.stride > 0 else max(1, steps // 10)

    u_field = traces = None
    if sc.reference:
        cfg = ReferenceConfig(
            spatial_points=sc.P,
            dt=sc.dt,
            final_time=sc.T,
            snapshot_stride=stride,
            richardson=sc.richardson,
        )
        u_field, traces = solve_with_traces(sc.datum, sc.bc, cfg)
        x, times = u_field.x, u_field.t
    else:
        x = np.arange(sc.P + 1) / sc.P
        grid_steps = np.arange(0, steps + 1)
        keep = np.union1d(grid_steps[::stride], [steps])
        times = keep * (sc.T / steps)

    # v: plain Fourier flow, except the coupled family which lives on the
    # shifted lattice from the start.
    if family == "quasi_coupled":
        v_coeffs = shifted_fourier_coeffs(sc.datum, sc.N, sc.bc.theta)
        v_field = eval_series_field(v_coeffs, x, times)
    else:
        v_coeffs = fourier_coeffs(sc.datum, sc.N)
        v_field = eval_v_field(v_coeffs, x, times)

    # w: family-specific correction series.
    tail_pair = None
    if family == "periodic":
        series = None
        w_field = SpaceTimeField(
            x=x, t=times, values=np.zeros((times.shape[0], x.shape[0]), complex)
        )
    elif family in TRACE_FAMILIES:
        series, tail_pair = _correction_series(sc, traces, times)
        if family == "dirichlet" and sc.tail:
            w_field = w_dirichlet(*tail_pair, sc.N, x, times, tail_correction=True)
        elif family == "mixed_dirichlet" and sc.tail:
            w_field = w_mixed(
                sc.bc.gamma, *tail_pair, sc.N, x, times, tail_correction=True
            )
        else:
            w_field = series.evaluate(x)
    elif family == "quasi_periodic":
        series = build_quasiperiodic_series(
            sc.bc.theta, v_coeffs, sc.N, times, cesaro=sc.cesaro
        )
        w_field = series.evaluate(x)
    else:  # quasi_coupled
        series = build_forced_quasi_series(
            sc.bc.theta,
            forcing_mode_sum(sc.bc.forcing1),
            forcing_mode_sum(sc.bc.forcing2),
            sc.N,
            times,
        )
        w_field = series.evaluate(x)

    composed = compose_u(v_field, w_field)
    residual = float("nan")
    if u_field is not None:
        residual = float(np.max(np.abs(u_field.values - composed.values)))
    else:
        u_field = composed

    # Delimited outputs.
    _write_field_csv(dest / "field_u.csv", u_field)
    _write_field_csv(dest / "field_v.csv", v_field)
    _write_field_csv(dest / "field_w.csv", w_field)
    ns_full = np.arange(-sc.N, sc.N + 1)
    if series is not None:
        ks = series.wavenumbers
        mags = np.abs(series.bracket)
    else:
        ks = v_coeffs.wavenumbers()
        mags = np.tile(np.abs(v_coeffs.entries), (times.shape[0], 1))
    _write_coefficients_csv(dest / "coefficients.csv", ns_full, ks, times, mags)

    folded = magnitudes_by_order(mags[-1])
    fit_lo = max(2, min(16, sc.N // 2))
    fit = decay_exponent(folded, fit_lo, sc.N)
    ns_pos = np.arange(1, sc.N + 1)
    np.savetxt(
        dest / "decay_report.csv",
        np.column_stack([ns_pos, folded[1:]]),
        fmt=("%d", FLOAT_FMT),
        delimiter=",",
        comments="",
        header="# n,magnitude",
    )

    profile = np.real(u_field.values[-1])
    jumps = detect_jumps(profile, window=sc.window)
    np.savetxt(
        dest / "jumps.csv",
        np.array([[j.location, j.magnitude] for j in jumps]).reshape(-1, 2),
        fmt=FLOAT_FMT,
        delimiter=",",
        comments="",
        header="# location,magnitude",
    )

    summary = {
        "status": "ok",
        "family": family,
        "datum.kind": sc.datum_kind,
        "numerics.N": sc.N,
        "numerics.P": sc.P,
        "numerics.dt": _fmt(sc.dt),
        "numerics.T": _fmt(sc.T),
        "max_u": _fmt(u_field.max_abs()),
        "max_v": _fmt(v_field.max_abs()),
        "max_w": _fmt(w_field.max_abs()),
        "decomposition_residual": _fmt(residual),
        "decay_alpha": _fmt(fit.exponent),
        "decay_residual": _fmt(fit.residual),
        "jump_count": len(jumps),
        "t_classification": str(classify_time(sc.T, sc.q_max)),
        "revival_time": _fmt(REVIVAL_TIME),
    }
    _write_summary(dest / "summary.txt", summary)

    if plots:
        from . import plotting

        fields = {"u": u_field, "v": v_field, "w": w_field}
        plotting.save_field_figure(dest / "fields.png", fields)
        plotting.save_profile_figure(
            dest / "profiles.png",
            x,
            {name: fld.values[-1] for name, fld in fields.items()},
            float(times[-1]),
        )
        plotting.save_coefficient_figure(
            dest / "coefficients.png", ns_pos, folded[1:], fit
        )
    return dest


# ---------------------------------------------------------------------------
# Catalog

_CATALOG_BLOCKS = (
    (
        "periodic",
        "smooth periodic flow; the correction w is identically zero",
        "[problem]\nbc.family = periodic\n"
        "[datum]\ndatum.kind = fourier_mode\ndatum.mode = 1\ndatum.amplitude = 1.0\n"
        "[numerics]\nnumerics.N = 16\nnumerics.P = 128\nnumerics.dt = 1e-6\n"
        "numerics.T = 0.0005\n[analysis]\nanalysis.q_max = 8",
    ),
    (
        "dirichlet",
        "u(0) = u(1) = u_x(1) = 0; w driven by u_x(0) and the u_xx jump",
        "[problem]\nbc.family = dirichlet\n"
        "[datum]\ndatum.kind = poly\ndatum.amplitude = 1.0\n"
        "[numerics]\nnumerics.N = 32\nnumerics.P = 128\nnumerics.dt = 1e-6\n"
        "numerics.T = 0.0005\n[analysis]\nanalysis.q_max = 8",
    ),
    (
        "mixed_dirichlet",
        "u(0) = u(1) = 0, u_x(0) = gamma u_x(1); keep T small, the coupling "
        "admits exponentially growing modes",
        "[problem]\nbc.family = mixed_dirichlet\nbc.gamma = 0.5\n"
        "[datum]\ndatum.kind = poly\ndatum.amplitude = 1.0\n"
        "[numerics]\nnumerics.N = 32\nnumerics.P = 128\nnumerics.dt = 2.5e-8\n"
        "numerics.T = 2.5e-5\n[analysis]\nanalysis.q_max = 8",
    ),
    (
        "pseudo_periodic",
        "beta_j d_x^j u(0) = d_x^j u(1); beta0 != 1 slows the coefficient "
        "decay from n^-2 to n^-1; keep T small, growing modes as above",
        "[problem]\nbc.family = pseudo_periodic\nbc.beta0 = (2+0j)\n"
        "bc.beta1 = (1+0j)\nbc.beta2 = (1+0j)\n"
        "[datum]\ndatum.kind = poly\ndatum.amplitude = 1.0\n"
        "[numerics]\nnumerics.N = 32\nnumerics.P = 128\nnumerics.dt = 5e-7\n"
        "numerics.T = 0.0005\n[analysis]\nanalysis.q_max = 8",
    ),
    (
        "quasi_periodic",
        "d_x^j u(0) = e^{i theta} d_x^j u(1); w built from the periodic "
        "flow itself, no solver run needed",
        "[problem]\nbc.family = quasi_periodic\nbc.theta = 1.0\n"
        "[datum]\ndatum.kind = bump\ndatum.amplitude = 0.1\n"
        "[numerics]\nnumerics.N = 32\nnumerics.P = 128\nnumerics.T = 0.0005\n"
        "[analysis]\nanalysis.q_max = 8",
    ),
    (
        "quasi_coupled",
        "quasi-periodic couplings with inhomogeneous trace forcings h1, h2",
        "[problem]\nbc.family = quasi_coupled\nbc.theta = 1.0471975511965976\n"
        "bc.h1.kind = one_minus_cos\nbc.h1.amplitude = 0.05\n"
        "bc.h1.frequency = 150.0\nbc.h2.kind = one_minus_cos\n"
        "bc.h2.amplitude = 0.04\nbc.h2.frequency = 200.0\n"
        "[datum]\ndatum.kind = bump\ndatum.amplitude = 0.1\n"
        "[numerics]\nnumerics.N = 32\nnumerics.P = 128\nnumerics.T = 0.0005\n"
        "[analysis]\nanalysis.q_max = 8",
    ),
)


def list_scenarios(stream=None) -> None:
    """Print the family catalog with runnable sample blocks."""
    out = stream or sys.stdout
    out.write("boundary condition families (%d)\n" % len(_CATALOG_BLOCKS))
    out.write(
        "revival_time T_rev = 1/(4*pi^2) = %s\n"
        "  (smallest T with exp(i k^3 T) = 1 on the whole lattice k = 2*pi*n:\n"
        "   k^3 T = 8*pi^3 n^3 T must be a multiple of 2*pi for every n)\n"
        % (FLOAT_FMT % REVIVAL_TIME)
    )
    out.write(
        "datum kinds: fourier_mode, step, bump, poly, samples_file\n"
        "common keys: numerics.N .P .dt .T .stride .richardson .tail "
        ".reference; analysis.q_max .window .cesaro\n\n"
    )
    for name, blurb, block in _CATALOG_BLOCKS:
        out.write("== %s ==\n%s\n%s\n\n" % (name, blurb, block))


# ---------------------------------------------------------------------------
# Entry point


def _run_many(paths, out_dir, jobs, plots) -> int:
    def one(p):
        try:
            dest = run_scenario(p, out_dir, plots=plots)
            print("%s -> %s" % (p, dest))
            return 0
        except ConfigError as exc:
            print("config error: %s" % exc, file=sys.stderr)
            return 2
        except AiryNumericalError as exc:
            print(
                "numerical failure [module=%s]: %s" % (exc.module, exc),
                file=sys.stderr,
            )
            return 3

    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(one, paths))
    else:
        codes = [one(p) for p in paths]
    return max(codes)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="airybvp",
        description="decomposition pipelines for the Airy equation on [0, 1]",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute scenario configs")
    runp.add_argument("configs", nargs="+", metavar="CONFIG")
    runp.add_argument("--out-dir", default=".", help="base output directory")
    runp.add_argument("--jobs", type=int, default=1,
                      help="run independent scenarios concurrently")
    runp.add_argument("--seed", type=int, default=None,
                      help="reserved; every pipeline is deterministic")
    runp.add_argument("--no-plots", dest="plots", action="store_false",
                      help="skip figure rendering")
    sub.add_parser("list", help="print the scenario catalog")

    args = parser.parse_args(argv)
    if args.command == "list":
        list_scenarios()
        return 0
    return _run_many(args.configs, args.out_dir, args.jobs, args.plots)


if __name__ == "__main__":
    sys.exit(main())
