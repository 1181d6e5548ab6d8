"""Command-line driver for reproducible variation experiments.

Each subcommand validates its inputs, runs the corresponding kernel or
verifier, writes CSV/JSON artifacts, and drops a manifest JSON (config,
library versions, timings, input digests) next to the primary output.
Artifacts are byte-stable across re-runs with the same config and seed;
wall-clock timings live only in the manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
from importlib import metadata as _im

import numpy as np

from . import grid, isometry, pathgen, roughness, schauder, variation
from ._util import parallel_map
from .errors import FormatError, NumericalError, ValidationError

__all__ = ["main", "build_parser"]


def _pkg_version(name: str) -> str:
    try:
        return _im.version(name)
    except _im.PackageNotFoundError:  # pragma: no cover - dev checkouts
        return "unknown"


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------

def _sha256(filename: str) -> str:
    digest = hashlib.sha256()
    with open(filename, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(obj, filename) -> None:
    with open(filename, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _manifest_name(out: str) -> str:
    stem, ext = os.path.splitext(out)
    return (stem if ext in (".csv", ".json") else out) + ".manifest.json"


def _write_manifest(args, t0: float, inputs: dict, out: str,
                    extra: dict | None = None, exact_name: bool = False) -> None:
    config = {}
    for key, val in vars(args).items():
        if key == "func" or callable(val):
            continue
        config[key] = val
    manifest = {
        "command": args.command,
        "config": config,
        "versions": {"python": platform.python_version(),
                     "numpy": np.__version__,
                     "scipy": _pkg_version("scipy"),
                     "roughvar": _pkg_version("roughvar")},
        "timings": {"total_s": round(time.perf_counter() - t0, 6)},
        "inputs": inputs,
    }
    if extra:
        manifest.update(extra)
    _write_json(manifest, out if exact_name else _manifest_name(out))


def _emit(args, payload: dict, lines) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))
    else:
        for line in lines:
            print(line)


def _parse_levels(text: str) -> list:
    try:
        if ":" in text:
            lo_s, hi_s = text.split(":", 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo > hi:
                raise ValueError("empty range")
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError as exc:
        raise ValidationError(
            f"bad levels {text!r}; expected N or A:B (inclusive)"
        ) from exc


def _resolve_levels(args, x: grid.Path) -> list:
    if getattr(args, "levels", None):
        lv = _parse_levels(args.levels)
        if lv[-1] > x.grid_level:
            raise ValidationError(
                f"levels go up to {lv[-1]} but the path stops at level {x.grid_level}"
            )
        return lv
    lv = list(roughness.default_levels(x))
    return lv if len(lv) >= 3 else list(range(0, x.grid_level + 1))


def _resolve_window(args, n_levels: int) -> int:
    raw = getattr(args, "window", None)
    if raw in (None, ""):
        return min(4, n_levels)
    if raw == "full":
        return n_levels
    try:
        window = int(raw)
    except ValueError as exc:
        raise ValidationError(f"bad window {raw!r}; expected an integer or 'full'") from exc
    return window


def _resolve_source(args) -> variation.PVarSource | None:
    mode = getattr(args, "src", None) or "finest"
    if mode == "finest":
        return None
    if mode == "self":
        return variation.PVarSource.self_level()
    if mode == "analytic":
        if getattr(args, "analytic_c", None) is None:
            raise ValidationError("--src analytic requires --analytic-c C "
                                  "(weights from the linear proxy C*t)")
        return variation.PVarSource.linear(args.analytic_c)
    raise ValidationError(f"unknown source mode {mode!r}")


def _generator_spec(args) -> pathgen.GeneratorSpec:
    kind = args.kind
    level = getattr(args, "level", None)
    params = {}
    if kind in ("fbm", "takagi"):
        if getattr(args, "H", None) is None:
            raise ValidationError(f"--kind {kind} requires --H")
        if level is None:
            raise ValidationError(f"--kind {kind} requires --level")
        if kind == "takagi":
            params["signs"] = getattr(args, "signs", None) or "plus"
            if getattr(args, "max_level", None) is not None:
                params["max_level"] = args.max_level
    elif kind == "counterexample":
        if getattr(args, "nmax", None) is None:
            raise ValidationError("--kind counterexample requires --nmax")
        params["n_max"] = args.nmax
    elif kind == "smooth":
        if level is None:
            raise ValidationError("--kind smooth requires --level")
        params["shape"] = getattr(args, "smooth_kind", None) or "sine"
        params["amplitude"] = getattr(args, "amplitude", None) or 1.0
        if getattr(args, "coeffs", None):
            params["coeffs"] = [float(c) for c in args.coeffs.split(",")]
        else:
            params["freq"] = getattr(args, "freq", None) or 1.0
    elif kind == "custom_schauder":
        if not getattr(args, "coeffs_file", None):
            raise ValidationError("--kind custom_schauder requires --coeffs-file")
        if level is None:
            raise ValidationError("--kind custom_schauder requires --level")
        params["coeffs_file"] = args.coeffs_file
    return pathgen.GeneratorSpec(kind=kind, grid_level=level,
                                 H=getattr(args, "H", None),
                                 seed=getattr(args, "seed", None), params=params)


def _load_path(args) -> tuple:
    """Resolve the input path: --in FILE or inline generator flags."""
    inputs = {}
    extra = {}
    infile = getattr(args, "infile", None)
    if infile:
        inputs[infile] = _sha256(infile)
        if infile.endswith(".json"):
            x = grid.read_path_json(infile)
        else:
            x = grid.read_path_csv(infile)
    elif getattr(args, "kind", None):
        spec = _generator_spec(args)
        if spec.kind == "custom_schauder":
            inputs[spec.params["coeffs_file"]] = _sha256(spec.params["coeffs_file"])
        x = pathgen.generate(spec)
        extra["generator"] = spec.metadata()
    else:
        raise ValidationError("provide an input path with --in FILE or "
                              "generator flags (--kind ...)")
    return x, inputs, extra


def _write_profiles(profiles, out_dir: str, stem: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for prof in profiles:
        name = os.path.join(out_dir, f"{stem}_level{prof.level:02d}.csv")
        variation.write_profile_csv(prof, name)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_gen(args) -> int:
    t0 = time.perf_counter()
    spec = _generator_spec(args)
    x = pathgen.generate(spec)
    if args.out.endswith(".json"):
        grid.write_path_json(x, args.out)
    else:
        grid.write_path_csv(x, args.out)
    _write_manifest(args, t0, {}, args.out, {"generator": spec.metadata()})
    payload = {"command": "gen", "out": args.out, "generator": spec.metadata(),
               "samples": int(x.samples.size)}
    _emit(args, payload, [f"wrote {args.out}: level {x.grid_level}, "
                          f"{x.samples.size} samples ({x.label})"])
    return 0


def _profile_run(args, build, label: str) -> int:
    """Shared driver for pvar / sqv / classical."""
    t0 = time.perf_counter()
    x, inputs, extra = _load_path(args)
    levels = _resolve_levels(args, x)

    profiles = parallel_map(
        lambda n: build(x, grid.dyadic_partition(n, x.grid_level)), levels)
    terminals = [prof.terminal for prof in profiles]
    report = None
    if len(levels) >= 3:
        window = _resolve_window(args, len(levels))
        report = variation.limit_diagnostics(terminals, window=window, levels=levels)

    payload = {"command": label, "levels": levels, "terminals": terminals,
               "per_level": [prof.metadata() for prof in profiles],
               "limit_report": report.to_dict() if report else None}
    for key in ("p", "gamma"):
        if getattr(args, key, None) is not None:
            payload[key] = getattr(args, key)

    if getattr(args, "profiles_out", None):
        _write_profiles(profiles, args.profiles_out, label)
    if args.out:
        _write_json(payload, args.out)
        _write_manifest(args, t0, inputs, args.out, extra)

    lines = [f"{label}: level {n:2d} terminal {v:.12g}"
             for n, v in zip(levels, terminals)]
    if report:
        lines.append(f"classification: {report.classification} "
                     f"(slope {report.trend_slope:+.3f}, window {report.window})")
    _emit(args, payload, lines)
    return 0


def _cmd_pvar(args) -> int:
    if args.p is None:
        raise ValidationError("pvar requires --p")
    return _profile_run(args, lambda x, part: variation.pth_variation(x, part, args.p),
                        "pvar")


def _cmd_sqv(args) -> int:
    if args.p is None:
        raise ValidationError("sqv requires --p")
    src_holder = {}

    def build(x, part):
        if "src" not in src_holder:
            src_holder["src"] = (_resolve_source(args) or variation.PVarSource()
                                 ).materialized(x, args.p)
        return variation.scaled_qv(x, part, args.p, src_holder["src"])

    return _profile_run(args, build, "sqv")


def _cmd_classical(args) -> int:
    if args.gamma is None:
        raise ValidationError("classical requires --gamma")
    return _profile_run(
        args, lambda x, part: variation.classical_scaled_qv(x, part, args.gamma),
        "classical")


def _cmd_roughness(args) -> int:
    t0 = time.perf_counter()
    x, inputs, extra = _load_path(args)
    levels = _resolve_levels(args, x)
    report = roughness.critical_index_search(
        x, levels=levels, p_range=(args.p_min, args.p_max), iters=args.iters,
        src=_resolve_source(args))
    payload = {"command": "roughness", **report.to_dict()}
    if args.per_q_out:
        header = "q,classification," + ",".join(f"level_{n}" for n in levels)
        rows = [f"{rec.q:.17g},{rec.classification},"
                + ",".join(f"{v:.17g}" for v in rec.terminal_values)
                for rec in report.per_q]
        with open(args.per_q_out, "w") as fh:
            fh.write(header + "\n" + "\n".join(rows) + "\n")
    if args.out:
        _write_json(payload, args.out)
        _write_manifest(args, t0, inputs, args.out, extra)
    _emit(args, payload, [
        f"p_bar_est {report.p_bar_est:.6g} in bracket "
        f"[{report.bracket[0]:.6g}, {report.bracket[1]:.6g}]",
        f"hurst_est {report.hurst_est:.6g} ({len(report.per_q)} probes, "
        f"src {report.src_mode})",
    ])
    return 0


def _map_from_args(args, inputs: dict) -> isometry.SmoothMap:
    if getattr(args, "map_file", None):
        inputs[args.map_file] = _sha256(args.map_file)
        try:
            data = np.loadtxt(args.map_file, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as exc:
            raise FormatError(f"cannot parse map table {args.map_file}: {exc}") from exc
        name = os.path.splitext(os.path.basename(args.map_file))[0]
        return isometry.tabulated_map(name, data[:, 0], data[:, 1])
    return isometry.builtin_map(args.map)


def _two_sided_run(args, report, t0, inputs, extra) -> int:
    payload = {"command": args.command, **report.to_dict()}
    if args.out:
        _write_json(payload, args.out)
        stem, _ = os.path.splitext(args.out)
        isometry.write_report_csv(report, stem + ".csv")
        _write_manifest(args, t0, inputs, args.out, extra)
    lines = [f"level {n:2d}: lhs {a:.9g} rhs {b:.9g} rel_err {r:.3g}"
             for n, a, b, r in zip(report.levels, report.lhs_terminal,
                                   report.rhs_terminal, report.rel_err)]
    lines.append(f"err trend slope {report.err_trend_slope:+.3f}; "
                 f"success={report.success}")
    lines.extend(f"warning: {w}" for w in report.warnings)
    _emit(args, payload, lines)
    return 0


def _cmd_isometry(args) -> int:
    t0 = time.perf_counter()
    x, inputs, extra = _load_path(args)
    f = _map_from_args(args, inputs)
    report = isometry.isometry_check(x, f, args.p, _resolve_levels(args, x),
                                     src=_resolve_source(args))
    return _two_sided_run(args, report, t0, inputs, extra)


def _cmd_chainrule(args) -> int:
    t0 = time.perf_counter()
    x, inputs, extra = _load_path(args)
    f = _map_from_args(args, inputs)
    report = isometry.chain_rule_check(x, f, args.p, _resolve_levels(args, x))
    return _two_sided_run(args, report, t0, inputs, extra)


def _cmd_invariance(args) -> int:
    t0 = time.perf_counter()
    x, inputs, extra = _load_path(args)
    if args.perturb_in:
        inputs[args.perturb_in] = _sha256(args.perturb_in)
        A = grid.read_path_csv(args.perturb_in)
    else:
        params = {"freq": args.freq}
        if args.coeffs:
            params = {"coeffs": [float(c) for c in args.coeffs.split(",")]}
        A = pathgen.smooth_perturbation(args.smooth_kind, args.amplitude,
                                        x.grid_level, params)
    report = isometry.invariance_check(x, A, args.p, _resolve_levels(args, x),
                                       src=_resolve_source(args))
    return _two_sided_run(args, report, t0, inputs, extra)


def _cmd_counterexample(args) -> int:
    t0 = time.perf_counter()
    n_max = args.nmax
    coeffs = schauder.counterexample_coefficients(n_max)
    level = args.level if args.level is not None else coeffs.max_level
    x = schauder.schauder_eval(coeffs, level)

    # coefficient bursts sit at rows S_n - 1; observation levels are S_n
    burst = [row + 1 for row in schauder.counterexample_burst_levels(n_max)]
    sn_terms, pre_terms = [], []
    for s_n in burst:
        sn_terms.append(variation.pth_variation(
            x, grid.dyadic_partition(s_n, level), 2.0).terminal)
        pre_terms.append(variation.pth_variation(
            x, grid.dyadic_partition(s_n - 1, level), 2.0).terminal)
    inter_levels, inter_vals = [], []
    for s_n, a, b in zip(burst, pre_terms, sn_terms):
        inter_levels.extend([s_n - 1, s_n])
        inter_vals.extend([a, b])

    def diag(vals, levels):
        return variation.limit_diagnostics(vals, window=len(vals), levels=levels)

    payload = {
        "command": "counterexample", "n_max": n_max, "grid_level": level,
        "sn_levels": burst, "sn_terminals": sn_terms,
        "pre_levels": [s - 1 for s in burst], "pre_terminals": pre_terms,
        "reports": {"sn": diag(sn_terms, burst).to_dict(),
                    "pre": diag(pre_terms, [s - 1 for s in burst]).to_dict(),
                    "interleaved": diag(inter_vals, inter_levels).to_dict()},
    }
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        grid.write_path_csv(x, os.path.join(args.out, "path.csv"))
        schauder.write_coefficients_json(coeffs,
                                         os.path.join(args.out, "coefficients.json"))
        _write_json(payload, os.path.join(args.out, "report.json"))
        _write_manifest(args, t0, {}, os.path.join(args.out, "manifest.json"),
                        exact_name=True)
    lines = [f"level {n:2d}: quadratic variation {v:.9g}"
             for n, v in zip(inter_levels, inter_vals)]
    lines.append("interleaved classification: "
                 + payload["reports"]["interleaved"]["classification"])
    _emit(args, payload, lines)
    return 0


def _cmd_report(args) -> int:
    t0 = time.perf_counter()
    inputs = {}
    entries = []
    lines = []
    for name in args.infiles:
        inputs[name] = _sha256(name)
        try:
            with open(name) as fh:
                payload = json.load(fh)
        except (OSError, ValueError) as exc:
            raise FormatError(f"cannot parse report {name}: {exc}") from exc
        entries.append({"file": name, "sha256": inputs[name], "report": payload})
        headline = payload.get("command", "?")
        for key in ("classification", "p_bar_est", "success"):
            if key in payload:
                headline += f" {key}={payload[key]}"
            elif isinstance(payload.get("limit_report"), dict) \
                    and key in payload["limit_report"]:
                headline += f" {key}={payload['limit_report'][key]}"
        lines.append(f"{name}: {headline}")
    combined = {"command": "report", "reports": entries}
    if args.out:
        _write_json(combined, args.out)
        _write_manifest(args, t0, inputs, args.out)
    _emit(args, combined, lines)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_generator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inline generator")
    g.add_argument("--kind", choices=["takagi", "fbm", "counterexample",
                                      "smooth", "custom_schauder"],
                   help="generate the input path instead of reading --in")
    g.add_argument("--H", type=float, help="roughness parameter in (0,1)")
    g.add_argument("--level", type=int, help="grid level of the generated path")
    g.add_argument("--seed", type=int, help="RNG seed (fbm, random-sign takagi)")
    g.add_argument("--signs", choices=["plus", "minus", "alternating", "random"],
                   help="coefficient sign pattern for takagi (default plus)")
    g.add_argument("--max-level", type=int, dest="max_level",
                   help="truncate takagi coefficients at this level")
    g.add_argument("--nmax", type=int, help="burst count for counterexample")
    g.add_argument("--smooth-kind", choices=["sine", "poly"], dest="smooth_kind",
                   default="sine", help="shape for --kind smooth")
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--freq", type=float, default=1.0)
    g.add_argument("--coeffs", help="comma-separated polynomial coefficients")
    g.add_argument("--coeffs-file", dest="coeffs_file",
                   help="coefficient JSON for custom_schauder")


def _add_common_analysis_flags(p: argparse.ArgumentParser, src: bool = True) -> None:
    p.add_argument("--in", dest="infile", help="input path CSV/JSON")
    p.add_argument("--levels", help="dyadic levels, N or A:B inclusive")
    p.add_argument("--out", help="write the report JSON here (plus manifest)")
    if src:
        p.add_argument("--src", choices=["finest", "self", "analytic"],
                       help="weight source for scaled QV (default finest)")
        p.add_argument("--analytic-c", dest="analytic_c", type=float,
                       help="C for the linear analytic source C*t")
    _add_generator_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughvar",
        description="Pathwise variation toolkit: p-th variation, scaled "
                    "quadratic variation, critical-index search, and "
                    "isometry/invariance verification on dyadic grids.")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable JSON on stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a path and write it to CSV/JSON")
    _add_generator_flags(p)
    p.add_argument("--out", required=True, help="output path file (.csv or .json)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("pvar", help="p-th variation profiles across levels")
    _add_common_analysis_flags(p, src=False)
    p.add_argument("--p", type=float, help="variation exponent (> 0)")
    p.add_argument("--window", help="diagnostic tail window (int or 'full')")
    p.add_argument("--profiles-out", dest="profiles_out",
                   help="directory for per-level profile CSVs")
    p.set_defaults(func=_cmd_pvar)

    p = sub.add_parser("sqv", help="scaled quadratic variation across levels")
    _add_common_analysis_flags(p)
    p.add_argument("--p", type=float, help="variation exponent (> 0)")
    p.add_argument("--window", help="diagnostic tail window (int or 'full')")
    p.add_argument("--profiles-out", dest="profiles_out",
                   help="directory for per-level profile CSVs")
    p.set_defaults(func=_cmd_sqv)

    p = sub.add_parser("classical", help="time-weighted scaled QV across levels")
    _add_common_analysis_flags(p, src=False)
    p.add_argument("--gamma", type=float, help="time-weight exponent")
    p.add_argument("--window", help="diagnostic tail window (int or 'full')")
    p.add_argument("--profiles-out", dest="profiles_out",
                   help="directory for per-level profile CSVs")
    p.set_defaults(func=_cmd_classical)

    p = sub.add_parser("roughness", help="bisect for the critical variation index")
    _add_common_analysis_flags(p)
    p.add_argument("--p-min", dest="p_min", type=float, default=1.2)
    p.add_argument("--p-max", dest="p_max", type=float, default=4.0)
    p.add_argument("--iters", type=int, default=12)
    p.add_argument("--per-q-out", dest="per_q_out",
                   help="CSV of per-probe terminal sequences")
    p.set_defaults(func=_cmd_roughness)

    for name, helptext, func in [
        ("isometry", "two-sided scaled-QV isometry check", _cmd_isometry),
        ("chainrule", "p-th variation chain-rule check", _cmd_chainrule),
    ]:
        p = sub.add_parser(name, help=helptext)
        _add_common_analysis_flags(p, src=(name == "isometry"))
        p.add_argument("--p", type=float, required=True)
        p.add_argument("--map", default="identity",
                       help="catalog map id (identity, affine:a,b, "
                            "square_plus_one, sin, exp_clamped)")
        p.add_argument("--map-file", dest="map_file",
                       help="CSV (u,f) table for a cubic-spline map")
        p.set_defaults(func=func)

    p = sub.add_parser("invariance", help="smooth-perturbation invariance check")
    _add_common_analysis_flags(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--perturb-in", dest="perturb_in",
                   help="perturbation path CSV (default: built sine)")
    p.set_defaults(func=_cmd_invariance)

    p = sub.add_parser("counterexample",
                       help="oscillating-QV path and its level diagnostics")
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--level", type=int, help="grid level (default: finest burst)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_counterexample)

    p = sub.add_parser("report", help="bundle report JSONs into one summary")
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--out", help="combined JSON output")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        evidence = getattr(exc, "evidence", None)
        if evidence:
            print(json.dumps({"evidence": evidence}, indent=2, sort_keys=True,
                             default=_json_default), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
