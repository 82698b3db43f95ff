"""Command-line front end: config parsing, run orchestration, CSV/JSON output.

Subcommands:

* ``tc``          - solve one critical temperature (Tc0, Tl or Tu);
* ``sweep``       - weak-coupling sweep over a decreasing coupling list,
                    CSV table plus slope-fit JSON;
* ``verify``      - run named bound-verifier suites, one JSON report each;
* ``kernel-eval`` - tabulate the kernels on a (p, q, T) grid to CSV.

Configuration comes from ``--config FILE`` (strict-whitelist JSON) with
individual flags overriding file values.  Exit codes: 0 success, 1 numeric
failure (no bracket, accuracy, fit - reported as machine-readable JSON on
stdout), 2 configuration error.  Output is fully deterministic: identical
resolved configs produce byte-identical files, and every output embeds the
sha256 digest of the resolved config plus the package version (JSON fields;
a leading ``#`` comment line for CSV).  ``--plot`` additionally renders a
figure next to the delimited output (requires ``--out``).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import REPORT_FORMAT, __version__
from .bound_verifier import (
    verify_chain,
    verify_lemma31_approx,
    verify_lemma32_bounds,
    verify_lemma41_integrals,
    verify_region_bounds,
    verify_strong_coupling,
)
from .bs_spectra import DEFAULT_BASE_NODES, DEFAULT_OCTAVE_NODES
from .critical_temps import (
    SolveSpec,
    solve_Tc0,
    solve_Tl,
    solve_Tu,
    weak_coupling_sweep,
)
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    EigenSolveError,
    FitError,
    NoBracketError,
    PreconditionError,
)
from .interactions import InteractionModel, demo_split_interaction, sphere_operator_spectrum
from .kernels import PhysParams, b_t, k_t, m_bound, n_t

__all__ = ["main", "build_parser"]

_TARGETS = {"tc0": "Tc0", "tl": "Tl", "tu": "Tu"}
_SUITES = ("lemma31", "lemma32", "lemma41", "regions", "strong_coupling", "chain")
_KERNELS = ("K", "B", "N", "M")

_TOP_KEYS = {
    "interaction", "mu", "dim", "lambda", "lambdas", "target", "tol",
    "grid_nodes", "qmax", "out", "suite", "kernel", "temps", "q_values",
    "p_points", "plot",
}
_INTERACTION_KEYS = {
    "gaussian": ("amplitude", "width"),
    "gaussian_difference": ("a1", "w1", "a2", "w2"),
    "square_well": ("amplitude", "radius"),
    "delta": ("strength",),
}
_NUMERIC_ERRORS = (NoBracketError, AccuracyError, FitError, EigenSolveError)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--config", type=Path, metavar="FILE",
                    help="JSON config file; flags override its values")
    sp.add_argument("--interaction", metavar="KIND",
                    help="gaussian | gaussian_difference | square_well | delta")
    sp.add_argument("--mu", type=float, help="chemical potential (default 1.0)")
    sp.add_argument("--dim", type=int, help="space dimension")
    sp.add_argument("--lambda", dest="lam", type=float, help="coupling strength")
    sp.add_argument("--lambdas", metavar="L1,L2,...",
                    help="comma-separated decreasing coupling list")
    sp.add_argument("--target", help="tc0 | tl | tu")
    sp.add_argument("--tol", type=float, help="relative solve tolerance")
    sp.add_argument("--grid-nodes", dest="grid_nodes", type=int,
                    help="base quadrature nodes per grid panel")
    sp.add_argument("--qmax", type=float, help="total-momentum scan cap")
    sp.add_argument("--out", type=Path, help="output path (CSV/JSON)")
    sp.add_argument("--plot", action="store_true", default=None,
                    help="render a figure next to the output (needs --out)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bcs-tc-lab",
        description="Critical-temperature bounds from the linear criteria.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("tc", help="solve one critical temperature")
    _add_common(sp)

    sp = sub.add_parser("sweep", help="weak-coupling sweep with slope fit")
    _add_common(sp)

    sp = sub.add_parser("verify", help="run bound-verifier suites")
    _add_common(sp)
    sp.add_argument("--suite", help="|".join(_SUITES) + " | all")

    sp = sub.add_parser("kernel-eval", help="tabulate kernels on a grid")
    _add_common(sp)
    sp.add_argument("--kernel", help="K | B | N | M | all")

    return parser


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _as_number(value, key):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{key} must be a number, got {value!r}")
    v = float(value)
    _require(math.isfinite(v), f"{key} must be finite")
    return v


def _resolve_interaction(value):
    """Interaction from a kind name or a {kind, parameters} object.

    Returns (model, canonical-dict); the canonical dict is what enters the
    config digest.
    """
    if isinstance(value, str):
        kind, given = value, {}
    elif isinstance(value, dict):
        _require("kind" in value, "interaction object needs a 'kind' key")
        kind = value["kind"]
        given = {k: v for k, v in value.items() if k != "kind"}
    else:
        raise ConfigError(f"interaction must be a name or object, got {value!r}")
    _require(kind in _INTERACTION_KEYS,
             f"unknown interaction kind {kind!r}; known: {sorted(_INTERACTION_KEYS)}")
    allowed = _INTERACTION_KEYS[kind]
    unknown = set(given) - set(allowed)
    _require(not unknown, f"unknown interaction keys for {kind}: {sorted(unknown)}")
    params = {k: _as_number(v, f"interaction.{k}") for k, v in given.items()}

    if kind == "gaussian":
        model = InteractionModel.gaussian(
            params.get("amplitude", 1.0), params.get("width", 1.0))
    elif kind == "square_well":
        model = InteractionModel.square_well(
            params.get("amplitude", 1.0), params.get("radius", 1.0))
    elif kind == "delta":
        model = InteractionModel.delta(params.get("strength", 1.0))
    elif params:
        model = InteractionModel.gaussian_difference(
            params.get("a1", 1.0), params.get("w1", 1.0),
            params.get("a2", 1.0), params.get("w2", 0.5))
    else:
        # bare name: the stock splitting example with Vhat(0) > 0 > Vhat(2 sqrt(mu))
        model = demo_split_interaction()
    canonical = {"kind": kind}
    canonical.update({k: model.params[i] for i, k in enumerate(allowed)})
    return model, canonical


def _float_list(value, key):
    if isinstance(value, str):
        parts = [s for s in value.split(",") if s.strip()]
        try:
            value = [float(s) for s in parts]
        except ValueError as exc:
            raise ConfigError(f"{key}: could not parse {value!r}") from exc
    _require(isinstance(value, (list, tuple)), f"{key} must be a list")
    return [_as_number(v, key) for v in value]


def load_config(args):
    """Merge file + flags into one validated, canonical config dict."""
    raw = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        _require(isinstance(raw, dict), "config root must be a JSON object")
        unknown = set(raw) - _TOP_KEYS
        _require(not unknown, f"unknown config keys: {sorted(unknown)}")

    for key, attr in (
        ("interaction", "interaction"), ("mu", "mu"), ("dim", "dim"),
        ("lambda", "lam"), ("lambdas", "lambdas"), ("target", "target"),
        ("tol", "tol"), ("grid_nodes", "grid_nodes"), ("qmax", "qmax"),
        ("out", "out"), ("suite", "suite"), ("kernel", "kernel"),
        ("plot", "plot"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            raw[key] = value

    cfg = {"command": args.command}

    model, canonical = _resolve_interaction(raw.get("interaction", "gaussian"))
    cfg["model"] = model
    cfg["interaction"] = canonical

    cfg["mu"] = _as_number(raw.get("mu", 1.0), "mu")
    _require(cfg["mu"] > 0.0, "mu must be > 0")

    dim = raw.get("dim")
    if dim is not None:
        _require(isinstance(dim, int) and not isinstance(dim, bool) and dim in (1, 2, 3),
                 "dim must be 1, 2 or 3")
    cfg["dim"] = dim

    cfg["lam"] = _as_number(raw.get("lambda", 1.0), "lambda")
    _require(cfg["lam"] > 0.0, "lambda must be > 0")

    lambdas = raw.get("lambdas")
    if lambdas is not None:
        lambdas = _float_list(lambdas, "lambdas")
        _require(len(lambdas) > 0, "lambdas must be a non-empty list")
    cfg["lambdas"] = lambdas

    target = raw.get("target", "tc0")
    _require(isinstance(target, str) and target.lower() in _TARGETS,
             f"target must be one of {sorted(_TARGETS)}, got {target!r}")
    cfg["target"] = _TARGETS[target.lower()]

    cfg["tol"] = _as_number(raw.get("tol", 1e-6), "tol")
    _require(0.0 < cfg["tol"] < 0.1, "tol must lie in (0, 0.1)")

    nodes = raw.get("grid_nodes")
    if nodes is not None:
        _require(isinstance(nodes, int) and not isinstance(nodes, bool) and nodes >= 6,
                 "grid_nodes must be an integer >= 6")
    cfg["grid_nodes"] = nodes

    qmax = raw.get("qmax")
    cfg["qmax"] = None if qmax is None else _as_number(qmax, "qmax")

    suite = raw.get("suite", "all")
    _require(isinstance(suite, str) and (suite in _SUITES or suite == "all"),
             f"suite must be one of {list(_SUITES) + ['all']}, got {suite!r}")
    cfg["suite"] = suite

    kernel = raw.get("kernel", "all")
    _require(isinstance(kernel, str) and (kernel.upper() in _KERNELS or kernel.lower() == "all"),
             f"kernel must be one of {list(_KERNELS) + ['all']}, got {kernel!r}")
    cfg["kernel"] = "all" if kernel.lower() == "all" else kernel.upper()

    temps = raw.get("temps")
    if temps is not None:
        temps = _float_list(temps, "temps")
        _require(temps and all(t > 0.0 for t in temps), "temps must be positive")
    cfg["temps"] = temps

    q_values = raw.get("q_values")
    if q_values is not None:
        q_values = _float_list(q_values, "q_values")
        _require(all(q >= 0.0 for q in q_values), "q_values must be >= 0")
    cfg["q_values"] = q_values

    p_points = raw.get("p_points", 61)
    _require(isinstance(p_points, int) and not isinstance(p_points, bool) and p_points >= 2,
             "p_points must be an integer >= 2")
    cfg["p_points"] = p_points

    plot = raw.get("plot", False)
    _require(isinstance(plot, bool), "plot must be a boolean")
    cfg["plot"] = plot

    out = raw.get("out")
    cfg["out"] = None if out is None else Path(out)
    if cfg["plot"]:
        _require(cfg["out"] is not None, "--plot requires --out")

    cfg["digest"] = _digest(cfg)
    return cfg


def _digest(cfg):
    """sha256 over the computational part of the resolved config.

    The output path and plot toggle do not change any numbers, so they are
    excluded: the same physics request always carries the same digest.
    """
    payload = {
        k: cfg[k]
        for k in ("command", "interaction", "mu", "dim", "lam", "lambdas",
                  "target", "tol", "grid_nodes", "qmax", "suite", "kernel",
                  "temps", "q_values", "p_points")
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(float(v))
    if isinstance(v, float):
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _stamp(cfg, command, extra):
    payload = {
        "version": REPORT_FORMAT,
        "command": command,
        "config_digest": f"sha256:{cfg['digest']}",
        "package_version": __version__,
    }
    payload.update(extra)
    return _jsonable(payload)


def _dump_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _csv_text(cfg, header, rows):
    """RFC-4180 table (CRLF records, '.' decimal) preceded by one comment
    line that embeds the config digest and package version."""
    buf = io.StringIO()
    buf.write(f"# {REPORT_FORMAT} config_digest=sha256:{cfg['digest']} "
              f"package_version={__version__}\r\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else str(v) for v in row])
    return buf.getvalue()


def _sidecar(path: Path, suffix):
    path = Path(path)
    if path.suffix in (".csv", ".json"):
        return path.with_suffix(suffix)
    return Path(str(path) + suffix)


def _grid_knobs(cfg):
    nodes = cfg["grid_nodes"]
    if nodes is None:
        return {}
    octave = max(4, round(nodes * DEFAULT_OCTAVE_NODES / DEFAULT_BASE_NODES))
    return {"base_nodes": nodes, "octave_nodes": octave}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_tc(cfg):
    knobs = _grid_knobs(cfg)
    spec = SolveSpec(
        lam=cfg["lam"], interaction=cfg["model"], mu=cfg["mu"],
        target=cfg["target"], dim=cfg["dim"] or 1, rel_tol=cfg["tol"],
        q_max=cfg["qmax"], **knobs,
    )
    solver = {"Tc0": solve_Tc0, "Tl": solve_Tl, "Tu": solve_Tu}[cfg["target"]]
    res = solver(spec)
    payload = _stamp(cfg, "tc", {
        "target": res.target,
        "T": res.temp,
        "q_star": res.q_star_at_solution,
        "residual": res.residual,
        "iterations": res.iterations,
        "slope_ln": res.slope_ln,
        "warnings": list(res.warnings),
        "grid": {
            "base_nodes": knobs.get("base_nodes", DEFAULT_BASE_NODES),
            "octave_nodes": knobs.get("octave_nodes", DEFAULT_OCTAVE_NODES),
            "q_max": cfg["qmax"],
            "rel_tol": cfg["tol"],
            "dim": cfg["dim"] or 1,
            "mu": cfg["mu"],
            "lambda": cfg["lam"],
            "interaction": cfg["interaction"],
        },
    })
    print(f"{res.target}  T={res.temp!r}  q_star={res.q_star_at_solution!r}  "
          f"residual={res.residual:.3e}  iterations={res.iterations}")
    text = _dump_json(payload)
    if cfg["out"] is not None:
        _write(cfg["out"], text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(cfg):
    _require(cfg["lambdas"] is not None, "sweep requires a lambdas list")
    res = weak_coupling_sweep(
        cfg["lambdas"], cfg["target"], cfg["model"], mu=cfg["mu"],
        dim=cfg["dim"] or 1, rel_tol=cfg["tol"], q_max=cfg["qmax"],
        **_grid_knobs(cfg),
    )
    header = ("lambda", "temp", "ln_mu_over_T", "q_star")
    rows = [(r.lam, r.temp, r.ln_ratio, r.q_star) for r in res.records]
    table = _csv_text(cfg, header, rows)

    spectrum = sphere_operator_spectrum(cfg["model"], cfg["mu"], dim=cfg["dim"] or 1)
    mu_pow = cfg["mu"] ** (1.0 - (cfg["dim"] or 1) / 2.0)
    denom_lower = spectrum.e_s
    denom_upper = max(spectrum.e_s, 0.5 * spectrum.e0_s)
    predicted = {
        "Tc0": mu_pow / denom_lower if denom_lower > 0 else None,
        "Tl": mu_pow / denom_lower if denom_lower > 0 else None,
        "Tu": mu_pow / denom_upper if denom_upper > 0 else None,
    }
    fit = res.fit
    payload = _stamp(cfg, "sweep", {
        "target": fit.target,
        "fit": {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "stderr": fit.stderr,
            "r_squared": fit.r_squared,
            "n_used": fit.n_used,
            "predicted_slope": fit.predicted,
            "heuristic_prediction": fit.heuristic,
        },
        "sphere_spectrum": {
            "e_s": spectrum.e_s,
            "e_a": spectrum.e_a,
            "e0_s": spectrum.e0_s,
            "predicted_slopes": predicted,
        },
        "records": len(res.records),
        "skipped": [[lam, reason] for lam, reason in res.skipped],
    })
    summary = _dump_json(payload)
    print(f"{fit.target}  slope={fit.slope!r}  predicted={fit.predicted!r}  "
          f"r_squared={fit.r_squared:.6f}  records={len(res.records)}")
    if cfg["out"] is not None:
        _write(cfg["out"], table)
        _write(_sidecar(cfg["out"], ".fit.json"), summary)
        if cfg["plot"]:
            from .plots import sweep_figure

            sweep_figure(res.records, fit, cfg["mu"], _sidecar(cfg["out"], ".png"))
    else:
        sys.stdout.write(table)
        sys.stdout.write(summary)
    return 0


def _run_suite(name, cfg):
    mu = cfg["mu"]
    if name == "lemma31":
        return verify_lemma31_approx(cfg["model"], mu)
    if name == "lemma32":
        return verify_lemma32_bounds(mu)
    if name == "lemma41":
        return verify_lemma41_integrals(mu_list=(mu, 2.0 * mu, 0.5 * mu))
    if name == "regions":
        return verify_region_bounds(mu, 2 if cfg["dim"] is None else cfg["dim"])
    if name == "strong_coupling":
        return verify_strong_coupling()
    if name == "chain":
        return verify_chain(cfg["lam"], cfg["model"], mu=mu, **_grid_knobs(cfg))
    raise ConfigError(f"unknown suite {name!r}")


def cmd_verify(cfg):
    names = _SUITES if cfg["suite"] == "all" else (cfg["suite"],)
    reports = []
    for name in names:
        rep = _run_suite(name, cfg)
        reports.append((name, rep))
        print(f"{name}: {'PASS' if rep.passed else 'FAIL'}  "
              f"worst_margin={rep.worst_margin!r}  c_emp={rep.c_emp!r}")

    payloads = {
        name: _dump_json(_stamp(cfg, "verify", {"suite": name, "report": rep.as_dict()}))
        for name, rep in reports
    }
    if cfg["out"] is not None:
        if len(reports) == 1:
            _write(cfg["out"], payloads[reports[0][0]])
        else:
            out_dir = Path(cfg["out"])
            out_dir.mkdir(parents=True, exist_ok=True)
            for name, _ in reports:
                _write(out_dir / f"{name}.json", payloads[name])
    else:
        for name, _ in reports:
            sys.stdout.write(payloads[name])
    return 0 if all(rep.passed for _, rep in reports) else 1


def cmd_kernel_eval(cfg):
    mu = cfg["mu"]
    sm = math.sqrt(mu)
    temps = cfg["temps"] or [0.01 * mu, 0.1 * mu, 0.5 * mu]
    q_values = cfg["q_values"] if cfg["q_values"] is not None else [0.0, 0.5 * sm, sm]
    p_grid = np.unique(np.concatenate([np.linspace(0.0, 3.0 * sm, cfg["p_points"]), [sm]]))

    columns = _KERNELS if cfg["kernel"] == "all" else (cfg["kernel"],)
    header = ("p", "q", "T") + columns
    rows = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for temp in temps:
            params = PhysParams(mu=mu, temp=temp)
            for q in q_values:
                k_col = k_t(p_grid, params)
                vals = {
                    "K": k_col,
                    "B": b_t(p_grid, q, params),
                    "N": n_t(p_grid, q, params),
                    "M": m_bound(p_grid, q, mu),
                }
                for i, p in enumerate(p_grid):
                    row = [float(p), float(q), float(temp)]
                    for c in columns:
                        v = float(vals[c][i])
                        row.append(v if math.isfinite(v) else float("inf"))
                    rows.append(tuple(row))
    table = _csv_text(cfg, header, rows)
    print(f"kernel-eval  columns={','.join(columns)}  rows={len(rows)}  mu={mu!r}")
    if cfg["out"] is not None:
        _write(cfg["out"], table)
        if cfg["plot"]:
            from .plots import kernel_figure

            kernel_figure(header, rows, mu, _sidecar(cfg["out"], ".png"))
    else:
        sys.stdout.write(table)
    return 0


_COMMANDS = {
    "tc": cmd_tc,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "kernel-eval": cmd_kernel_eval,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, DomainError) as exc:
        # structurally invalid request for this command (e.g. regions at d=1)
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        payload = _stamp(cfg, args.command, {
            "error": {"type": type(exc).__name__, "message": str(exc)},
        })
        sys.stdout.write(_dump_json(payload))
        return 1


if __name__ == "__main__":
    sys.exit(main())
