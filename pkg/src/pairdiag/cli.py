"""Command line front end: ``pairdiag <command> CONFIG... [options]``.

Commands
  validate     condition report only
  diagonalize  S (written to S.csv) and the ground state energy
  verify       every residual suite, the Fock oracle and the inequality checks
  spectrum     lowest levels of H against dGamma(S) + E for several cutoffs
  sweep        fiber energies over a momentum grid and/or the infrared family

Reports go to ``--out`` as report.json, report.csv and report.txt (see
``--format``). Exit status is 0 when every model passes, 1 when a check
fails or a computation raises, 2 when a config cannot be parsed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .bogoliubov import appendix_b_identity, bijectivity_residual, intertwining_residual
from .config import DEFAULT_TOLERANCES, ModelConfig, build_model, load_config
from .errors import ConfigParseError, PairDiagError
from .fock import (
    assemble_fiber_hamiltonian,
    build_fock,
    commutator_check,
    inequality_suite,
    lowest_eigenvalues,
    spectrum_compare,
)
from .models import dipole_fock_hamiltonian, ir_family, oscillator_field_fock_hamiltonian, ti_fiber
from .pair_model import build_W0, diagonalize, validate_conditions

__all__ = ["main", "run_command", "COMMANDS"]

COMMANDS = ("validate", "diagonalize", "verify", "spectrum", "sweep")
FORMATS = {"machine": ("json",), "csv": ("csv",), "text": ("txt",), "all": ("json", "csv", "txt")}


class Timer:
    def __init__(self):
        self.ms = {}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.ms[name] = self.ms.get(name, 0.0) + 1e3 * (time.perf_counter() - t0)


def _num(x):
    """JSON-friendly scalar; complex values become [re, im]."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if np.iscomplexobj(x):
        x = complex(x)
        return float(x.real) if x.imag == 0 else [float(x.real), float(x.imag)]
    return float(x)


def _vec(v):
    return [_num(x) for x in np.asarray(v).ravel()]


def _mat(m):
    return [_vec(row) for row in np.asarray(m)]


def _check(value, tol):
    return {"value": _num(value), "tolerance": _num(tol), "ok": bool(value <= tol)}


def _conditions(model):
    return {k: _num(v) for k, v in validate_conditions(model).as_dict().items()}


def _diag_summary(result):
    return {
        "E": _num(result.E),
        "E_crosscheck": _num(result.E_crosscheck),
        "energy_offset": _num(result.energy_offset),
        "ground_energy": _num(result.ground_energy),
        "c1": _num(result.c1),
        "c2": _num(result.c2),
        "eigmin_S": _num(result.eigmin_S),
        "sandwich_lower": _num(result.sandwich_lower),
        "sandwich_upper": _num(result.sandwich_upper),
    }


def _oracle(cfg: ModelConfig, space):
    """Directly assembled Hamiltonian for kinds that have one, else None."""
    p = cfg.params
    if cfg.kind == "oscillator_field":
        return oscillator_field_fock_hamiltonian(space, p["omega"], p["lambda"], p["T"], p["g"])
    if cfg.kind == "pauli_fierz_dipole":
        return dipole_fock_hamiltonian(space, p["omegas"], p["T"], p["gs"])
    if cfg.kind == "ti_fiber":
        return assemble_fiber_hamiltonian(space, p["T"], p["gs"], p["P"])
    return None


def _spectrum_rows(model, result, nmaxes, k):
    rows = []
    for nmax in nmaxes:
        space = build_fock(model.dim, nmax)
        cmp = spectrum_compare(space, model, min(k, space.dim), result)
        rows.append(
            {
                "nmax": nmax,
                "dim_fock": space.dim,
                "max_dev": _num(cmp.max_dev),
                "eigs_H": _vec(cmp.eigs_H),
                "eigs_pred": _vec(cmp.eigs_pred),
            }
        )
    return rows


def _monotone_excess(devs):
    return max([0.0] + [b - a for a, b in zip(devs, devs[1:])])


def _validate(cfg, model, opts, timer):
    with timer.phase("conditions"):
        cond = _conditions(model)
    return {"conditions": cond}, cond["pass"]


def _diagonalize(cfg, model, opts, timer):
    with timer.phase("diagonalize"):
        result = diagonalize(model)
    cond = {k: _num(v) for k, v in result.conditions.as_dict().items()}
    return {"conditions": cond, "diag": _diag_summary(result), "S": _mat(result.S.entries)}, True


def _spectrum(cfg, model, opts, timer):
    tol = opts["tolerances"]
    with timer.phase("diagonalize"):
        result = diagonalize(model)
    with timer.phase("spectrum"):
        rows = _spectrum_rows(model, result, opts["nmax"], opts["k"])
    devs = [r["max_dev"] for r in rows]
    checks = {
        "spectrum_final": _check(devs[-1], tol["spectrum"]),
        "spectrum_monotone": _check(_monotone_excess(devs), tol["spectrum_monotone"]),
    }
    report = {
        "diag": _diag_summary(result),
        "spectrum": {"k": opts["k"], "levels": rows},
        "residuals": checks,
    }
    return report, all(c["ok"] for c in checks.values())


def _verify(cfg, model, opts, timer):
    tol = opts["tolerances"]
    rng = np.random.default_rng(opts["seed"])
    with timer.phase("conditions"):
        cond = validate_conditions(model)
    report = {"conditions": {k: _num(v) for k, v in cond.as_dict().items()}}
    with timer.phase("diagonalize"):
        result = diagonalize(model, check_symplectic=False)
    report["diag"] = _diag_summary(result)
    n = model.dim
    res = {}
    with timer.phase("symplectic"):
        for name, val in result.pair.residuals.items():
            res[f"symplectic_{name}"] = _check(val, tol["symplectic"] * n)
        res["energy_crosscheck"] = _check(abs(result.E - result.E_crosscheck), tol["energy_crosscheck"] * (1 + abs(result.E)))
        res["sandwich"] = _check(max(0.0, -result.sandwich_margin), tol["sandwich"])
        rX, rY = intertwining_residual(model.T, result.S, result.pair, build_W0(model))
        res["intertwining_X"] = _check(rX, tol["intertwining"])
        res["intertwining_Y"] = _check(rY, tol["intertwining"])
        ab = appendix_b_identity(model, result.S)
        res["appendix_b"] = _check(ab.residual, tol["appendix_b"])
        res["bijectivity"] = _check(bijectivity_residual(result.pair), tol["bijectivity"])
    report["appendix_b_det"] = _num(ab.det_one_plus_A)

    with timer.phase("commutator"):
        space = build_fock(n, opts["commutator_nmax"])
        f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f /= np.linalg.norm(f)
        cr = commutator_check(space, model, result.pair, f, result.S)
        res["commutator_annih"] = _check(cr.res_annih, tol["commutator"])
        res["commutator_creat"] = _check(cr.res_creat, tol["commutator"])

    with timer.phase("spectrum"):
        rows = _spectrum_rows(model, result, opts["nmax"], opts["k"])
    devs = [r["max_dev"] for r in rows]
    for r in rows[:-1]:
        res[f"spectrum_max_dev@{r['nmax']}"] = {"value": r["max_dev"], "tolerance": None, "ok": True}
    res[f"spectrum_max_dev@{rows[-1]['nmax']}"] = _check(devs[-1], tol["spectrum"])
    res["spectrum_monotone"] = _check(_monotone_excess(devs), tol["spectrum_monotone"])
    report["spectrum"] = {"k": opts["k"], "levels": rows}

    target = result.ground_energy
    if cfg.kind == "ti_fiber":
        fib = ti_fiber(cfg.params["T"], cfg.params["gs"], cfg.params["P"], result)
        target = fib.E_P
        report["fiber"] = _fiber_row(fib)
        if fib.E_P_ons is not None:
            res["fiber_ons"] = _check(abs(fib.E_P - fib.E_P_ons), tol["fiber_ons"] * (1 + abs(fib.E_P)))
    with timer.phase("oracle"):
        space = build_fock(n, opts["nmax"][-1])
        H = _oracle(cfg, space)
        if H is not None:
            e0 = float(lowest_eigenvalues(H, 1)[0])
            report["oracle"] = {"nmax": space.nmax, "lowest_eigenvalue": e0, "predicted": _num(target)}
            res["oracle"] = _check(abs(e0 - target), tol["oracle"])

    with timer.phase("inequalities"):
        space = build_fock(n, opts["inequality_nmax"])
        iq = inequality_suite(space, model, samples=opts["samples"], seed=opts["seed"])
        res["identity"] = _check(iq.max_identity_residual, tol["identity"])
    report["inequality_counts"] = {
        name: {"samples": int(iq.checks[name]), "violations": int(iq.violations[name])} for name in iq.violations
    }
    report["residuals"] = res
    ok = cond.passed and all(r["ok"] for r in res.values()) and iq.total_violations == 0
    return report, ok


def _fiber_row(fib):
    return {
        "P": _vec(fib.P),
        "E_P": _num(fib.E_P),
        "E_P_ons": None if fib.E_P_ons is None else _num(fib.E_P_ons),
        "ons_defect": _num(fib.ons_defect),
        "ir_diagnostic": _num(fib.ir_diagnostic),
        "van_hove_shift": _num(fib.E_P - 0.5 * float(fib.P @ fib.P) - fib.E),
    }


def _sweep(cfg, model, opts, timer):
    tol = opts["tolerances"]
    sweep = dict(cfg.sweep or {})
    if cfg.kind == "ti_fiber" and "P_grid" not in sweep:
        sweep["P_grid"] = [np.zeros_like(cfg.params["P"]), cfg.params["P"]]
    if cfg.kind != "ti_fiber" and "P_grid" in sweep:
        raise ConfigParseError(cfg.path, "sweep.P_grid", "momentum grids need kind ti_fiber")
    if not sweep:
        raise ConfigParseError(cfg.path, "sweep", "nothing to sweep for this kind")
    report, res = {}, {}
    if "P_grid" in sweep:
        with timer.phase("fiber"):
            result = diagonalize(model)
            rows = [_fiber_row(ti_fiber(cfg.params["T"], cfg.params["gs"], P, result)) for P in sweep["P_grid"]]
        report["fiber"] = rows
        res["van_hove_sign"] = _check(max(r["van_hove_shift"] for r in rows), 0.0)
        ons = [abs(r["E_P"] - r["E_P_ons"]) / (1 + abs(r["E_P"])) for r in rows if r["E_P_ons"] is not None]
        if ons:
            res["fiber_ons"] = _check(max(ons), tol["fiber_ons"])
    if "ir_family" in sweep:
        fam = sweep["ir_family"]
        with timer.phase("ir_family"):
            pts = ir_family(fam["t"], fam["T_tail"], fam["gs"], fam["P"])
        order = sorted(pts, key=lambda p: -p[0])
        report["ir_family"] = [{"t": _num(t), "ir_diagnostic": _num(v)} for t, v in pts]
        increasing = all(b[1] > a[1] for a, b in zip(order, order[1:]))
        res["ir_increasing"] = {"value": increasing, "tolerance": None, "ok": increasing}
    report["residuals"] = res
    return report, all(r["ok"] for r in res.values())


_RUNNERS = {
    "validate": _validate,
    "diagonalize": _diagonalize,
    "verify": _verify,
    "spectrum": _spectrum,
    "sweep": _sweep,
}


def _options(cfg: ModelConfig, args) -> dict:
    v = cfg.verify
    tols = dict(v.tolerances)
    tols.update(args.tol_override)
    return {
        "nmax": tuple(args.nmax) if args.nmax else v.nmax,
        "k": v.k,
        "samples": args.samples if args.samples is not None else v.samples,
        "commutator_nmax": v.commutator_nmax,
        "inequality_nmax": v.inequality_nmax,
        "seed": args.seed,
        "tolerances": tols,
    }


def run_command(command: str, cfg: ModelConfig, args) -> tuple[dict, int]:
    """Run one command on one parsed config; returns (report, exit code)."""
    opts = _options(cfg, args)
    timer = Timer()
    report = {"command": command, "model_id": cfg.model_id, "kind": cfg.kind, "seed": opts["seed"]}
    code = 0
    model = None
    try:
        with timer.phase("build"):
            model = build_model(cfg)
        body, ok = _RUNNERS[command](cfg, model, opts, timer)
        report.update(body)
        report["pass"] = bool(ok)
        code = 0 if ok else 1
    except ConfigParseError:
        raise
    except PairDiagError as exc:
        if model is not None and "conditions" not in report:
            try:
                report["conditions"] = _conditions(model)
            except PairDiagError:
                pass
        report["error"] = f"{type(exc).__name__}: {exc}"
        report["pass"] = False
        code = 1
    if args.timings:
        report["timings"] = {k: round(v, 3) for k, v in timer.ms.items()}
    return report, code


# report writers


def _fmt(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _tables(report) -> dict:
    """Named tables (header, rows) for the CSV and text outputs."""
    out = {}
    if "spectrum" in report:
        out["spectrum"] = (
            ["nmax", "dim_fock", "max_dev"],
            [[r["nmax"], r["dim_fock"], r["max_dev"]] for r in report["spectrum"]["levels"]],
        )
    if isinstance(report.get("fiber"), list):
        rows = report["fiber"]
        out["fiber"] = (
            ["P", "E_P", "E_P_ons", "ons_defect", "ir_diagnostic", "van_hove_shift"],
            [[r["P"], r["E_P"], r["E_P_ons"], r["ons_defect"], r["ir_diagnostic"], r["van_hove_shift"]] for r in rows],
        )
    if "ir_family" in report:
        out["ir_family"] = (["t", "ir_diagnostic"], [[r["t"], r["ir_diagnostic"]] for r in report["ir_family"]])
    if "residuals" in report:
        out["residuals"] = (
            ["name", "value", "tolerance", "ok"],
            [[k, v["value"], v["tolerance"], v["ok"]] for k, v in report["residuals"].items()],
        )
    return out


def write_text(report, path: Path):
    lines = [f"# pairdiag {report['command']} {report['model_id']}"]
    scalars = [(k, v) for k, v in _flatten(report) if k not in ("command", "model_id")]
    width = max(len(k) for k, _ in scalars)
    lines += [f"{k.ljust(width)}  {_fmt(v)}" for k, v in scalars]
    for name, (header, rows) in _tables(report).items():
        cells = [header] + [[_fmt(c) for c in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        lines.append("")
        lines.append(f"## {name}")
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_csv(report, path: Path):
    tables = _tables(report)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not tables:
            w.writerow(["key", "value"])
            for k, v in _flatten(report):
                w.writerow([k, _fmt(v)])
            return
        for i, (name, (header, rows)) in enumerate(tables.items()):
            if i:
                w.writerow([])
            w.writerow([f"# {name}"])
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(c) for c in r])


def write_matrix_csv(m, path: Path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in m:
            w.writerow([_fmt(c) if not isinstance(c, list) else repr(complex(*c)) for c in row])


def write_reports(report, out: Path, fmt: str) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in FORMATS[fmt]:
        path = out / f"report.{ext}"
        if ext == "json":
            path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        elif ext == "csv":
            write_csv(report, path)
        else:
            write_text(report, path)
        written.append(path)
    if "S" in report:
        path = out / "S.csv"
        write_matrix_csv(report["S"], path)
        written.append(path)
    return written


def _nmax_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("nmax values must be nonnegative integers")
    return vals


def _tol_override(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or name not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {', '.join(DEFAULT_TOLERANCES)}")
    try:
        return name, float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance value {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairdiag", description="Diagonalize and verify pair-interaction Bose models.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("configs", nargs="+", metavar="CONFIG", help="JSON config file, or @name for a bundled one")
    p.add_argument("--nmax", type=_nmax_list, default=None, help="comma list of Fock cutoffs (default from config)")
    p.add_argument(
        "--tol-override",
        type=_tol_override,
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="replace one named tolerance (repeatable)",
    )
    p.add_argument("--seed", type=int, default=42, help="random seed, echoed in the report (default: 42)")
    p.add_argument("--samples", type=int, default=None, help="inequality-suite samples (default from config)")
    p.add_argument("--format", choices=tuple(FORMATS), default="all", help="report formats to write (default: all)")
    p.add_argument("--out", default="pairdiag_out", help="output directory (default: pairdiag_out)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (reports stop being reproducible)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.tol_override = dict(args.tol_override)
    out = Path(args.out)
    configs = []
    for path in args.configs:
        try:
            configs.append(load_config(path))
        except ConfigParseError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    ids = [c.model_id for c in configs]
    if len(set(ids)) != len(ids):
        print("config error: duplicate model_id among the given configs", file=sys.stderr)
        return 2

    worst = 0
    for cfg in configs:
        try:
            report, code = run_command(args.command, cfg, args)
        except ConfigParseError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            worst = max(worst, 2)
            continue
        if "error" in report:
            print(f"{cfg.model_id}: {report['error']}", file=sys.stderr)
        target = out / cfg.model_id if len(configs) > 1 else out
        write_reports(report, target, args.format)
        print(f"{cfg.model_id}: {args.command} {'PASS' if report['pass'] else 'FAIL'} -> {target}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
