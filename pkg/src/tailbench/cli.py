"""Command-line interface: estimate on user data, rate tables, table reproduction."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import BurrDist, WeibullTailParams, hall_params_of_burr
from .errors import ConfigError, DomainError, TailbenchError
from .estimators import mef_ne, mef_pe, mef_pi, tail_ne, tail_pi, tail_pt
from .asymptotics import mef_rate_exponents, tail_rate_exponents
from .simulation import (
    SimConfig,
    render_csv,
    render_dat,
    render_markdown,
    run_cell,
    run_rate_tables,
    run_table,
)
from .tail_index import default_r, hill_fit

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_NUMERIC = 3

_TAIL_METHODS = ("pi", "pt", "al", "pb")
_MEF_METHODS = ("pi-mef", "pe-mef", "al-mef", "pb-mef")


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written alongside every output file."""

    command: str
    config_path: str | None
    seed: int
    output_dir: str
    version: str
    note: str | None = None

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _read_data_file(path: str) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    values = []
    for raw in p.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise ConfigError(f"unparseable line in {path}: {raw!r}") from exc
    arr = np.asarray(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size < 10:
        raise ConfigError(f"{path}: need at least 10 finite values, got {arr.size}")
    return arr


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def cmd_estimate(args) -> int:
    data = _read_data_file(args.data_file)
    method = args.method
    needs_x = method in _TAIL_METHODS
    needs_u = method in ("pt",) + _MEF_METHODS
    if needs_x and args.x is None:
        raise ConfigError(f"method {method!r} needs --x")
    if needs_u and args.u is None:
        raise ConfigError(f"method {method!r} needs --u")

    ti = None
    if method in ("pi", "pb", "pi-mef", "pb-mef"):
        ti = hill_fit(data, default_r(data.size))

    if method == "pi":
        rec = tail_pi(ti, args.x)
    elif method == "pt":
        rec = tail_pt(data, args.x, args.u)
    elif method == "al":
        rec = tail_ne(data, args.x, bandwidth_method="AL")
    elif method == "pb":
        rec = tail_ne(data, args.x, bandwidth_method="PB", tail_est=ti)
    elif method == "pi-mef":
        rec = mef_pi(ti, args.u)
    elif method == "pe-mef":
        rec = mef_pe(data, args.u)
    elif method == "al-mef":
        rec = mef_ne(data, args.u, bandwidth_method="AL")
    else:  # pb-mef
        rec = mef_ne(data, args.u, bandwidth_method="PB", tail_est=ti)

    target = {"x": args.x, "u": args.u}
    print(f"{method} estimate: {rec.value:.10g}")
    print(json.dumps(_jsonable({"method": method, "value": rec.value,
                                "n": int(data.size), **target,
                                "diagnostics": rec.diagnostics})))
    for flag in rec.flags:
        print(f"warning: {flag}", file=sys.stderr)
    return _EXIT_OK


def _parse_pair(text: str, what: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{what} expects two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _fmt_rate_cli(rate) -> str:
    if rate.value is None:
        return "n/a"
    out = f"{rate.value:.3f}".rstrip("0").rstrip(".")
    return out if out not in ("", "-0") else "0"


def cmd_rates(args) -> int:
    if args.burr is None and args.weibull is None:
        raise ConfigError("pass --burr c,ell or --weibull kappa,C")
    if args.mef:
        if args.burr is None:
            raise ConfigError("mean-excess rates are defined for --burr rows")
        c, ell = _parse_pair(args.burr, "--burr")
        hp = hall_params_of_burr(BurrDist(c, ell))
        rates = mef_rate_exponents(hp, args.p)
        print(f"NE: {_fmt_rate_cli(rates['NE'])}  PT: {_fmt_rate_cli(rates['PT'])}  "
              f"PI: {_fmt_rate_cli(rates['PI'])}")
        return _EXIT_OK
    if args.burr is not None:
        c, ell = _parse_pair(args.burr, "--burr")
        rates = tail_rate_exponents(hall_params_of_burr(BurrDist(c, ell)))
        print(f"NE: {_fmt_rate_cli(rates['NE'])}  PT: {_fmt_rate_cli(rates['PT'])}  "
              f"PI: {_fmt_rate_cli(rates['PI'])}")
    else:
        kappa, C = _parse_pair(args.weibull, "--weibull")
        if args.c2 is None:
            raise ConfigError("light-tail rates need --c2")
        rates = tail_rate_exponents(WeibullTailParams(C=C, kappa=kappa), C2=args.c2)
        print(f"NE: {_fmt_rate_cli(rates['NE'])}  PT: {_fmt_rate_cli(rates['PT'])}  PI: n/a")
    return _EXIT_OK


def _write_outputs(stem: str, out_dir: Path, table_id: str, results, manifest: RunManifest) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.md").write_text(render_markdown(table_id, results))
    (out_dir / f"{stem}.csv").write_text(render_csv(table_id, results))
    (out_dir / f"{stem}.dat").write_text(render_dat(table_id, results))
    manifest.write(out_dir / f"{stem}_manifest.json")


def cmd_reproduce(args) -> int:
    table_id = args.table.lower()
    out_dir = Path(args.out)
    if table_id in ("t1", "t2", "t5"):
        tables = run_rate_tables()
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"rate_{table_id}.md"
        path.write_text(tables[table_id])
        RunManifest(command=f"reproduce {table_id}", config_path=None, seed=0,
                    output_dir=str(out_dir), version=__version__).write(
                        out_dir / f"rate_{table_id}_manifest.json")
        print(f"wrote {path}")
        return _EXIT_OK

    note = None
    if args.reps is not None:
        note = (f"replications overridden to {args.reps}; Monte-Carlo tolerances "
                f"are wider than at the default count")
    results = run_table(table_id, base_seed=args.seed, replications=args.reps,
                        x_log_arg=args.x_rule, u_mode=args.u_mode)
    stem = f"table{table_id[1]}_seed{args.seed}"
    manifest = RunManifest(command=f"reproduce {table_id}", config_path=None,
                           seed=args.seed, output_dir=str(out_dir),
                           version=__version__, note=note)
    _write_outputs(stem, out_dir, table_id, results, manifest)
    print(f"wrote {out_dir / (stem + '.md')}")
    return _EXIT_OK


_CELL_KEYS = {
    "family": str, "kind": str, "n": int, "C": float, "base_seed": int,
    "replications": int, "c3": float, "x_log_arg": str, "u_mode": str,
    "u_quantile": float, "x_override": float, "u_override": float,
}


def parse_cell_config(path: str) -> SimConfig:
    """Flat key = value file mirroring SimConfig; params/estimators are comma lists."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    fields: dict = {}
    for raw in p.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' in {path}: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "params":
            fields["params"] = _parse_pair(value, "params")
        elif key == "estimators":
            fields["estimators"] = tuple(v.strip().upper() for v in value.split(","))
        elif key in _CELL_KEYS:
            fields[key] = _CELL_KEYS[key](value)
        else:
            raise ConfigError(f"unknown config key {key!r} in {path}")
    try:
        return SimConfig(**fields)
    except TypeError as exc:
        raise ConfigError(f"incomplete cell config in {path}: {exc}") from exc


def cmd_cell(args) -> int:
    cfg = parse_cell_config(args.config)
    result = run_cell(cfg)
    print(f"cell: {cfg.family}{cfg.params} kind={cfg.kind} n={cfg.n} C={cfg.C:g} "
          f"x={result.x:.6g} u={result.u:.6g} true={result.true_value:.6g}")
    for name, s in result.stats.items():
        print(f"  {name}: rel_mse={s.rel_mse:.6g} sd={s.sd:.6g} "
              f"nonfinite={s.n_nonfinite} flagged={s.n_flagged}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"cell_seed{cfg.base_seed}"
    (out_dir / f"{stem}.csv").write_text(render_csv("cell", [result]))
    RunManifest(command="cell", config_path=args.config, seed=cfg.base_seed,
                output_dir=str(out_dir), version=__version__).write(
                    out_dir / f"{stem}_manifest.json")
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailbench",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tailbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="run one estimator on a data file")
    p_est.add_argument("data_file")
    p_est.add_argument("--method", required=True, choices=_TAIL_METHODS + _MEF_METHODS)
    p_est.add_argument("--x", type=float, default=None, help="tail evaluation point")
    p_est.add_argument("--u", type=float, default=None, help="threshold")
    p_est.set_defaults(func=cmd_estimate)

    p_rates = sub.add_parser("rates", help="print analytic convergence-rate exponents")
    p_rates.add_argument("--burr", default=None, metavar="c,ell")
    p_rates.add_argument("--weibull", default=None, metavar="kappa,C")
    p_rates.add_argument("--c2", type=float, default=None)
    p_rates.add_argument("--mef", action="store_true", help="mean-excess rates")
    p_rates.add_argument("--p", type=float, default=None, help="u = n^p power for --mef")
    p_rates.set_defaults(func=cmd_rates)

    p_rep = sub.add_parser("reproduce", help="run a benchmark table and write md/csv/dat")
    p_rep.add_argument("table", help="t1, t2, t5 (analytic) or t3, t4, t6, t7 (Monte Carlo)")
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--reps", type=int, default=None,
                       help="override the default replication count (quick mode)")
    p_rep.add_argument("--out", default=".")
    p_rep.add_argument("--x-rule", default="log_n", choices=("log_n", "literal"))
    p_rep.add_argument("--u-mode", default="auto",
                       choices=("auto", "target", "c3", "quantile"))
    p_rep.set_defaults(func=cmd_reproduce)

    p_cell = sub.add_parser("cell", help="run one Monte-Carlo cell from a config file")
    p_cell.add_argument("--config", required=True)
    p_cell.add_argument("--out", default=".")
    p_cell.set_defaults(func=cmd_cell)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mef", False) and args.p is None:
        print("error: --mef needs --p", file=sys.stderr)
        return _EXIT_USAGE
    try:
        return args.func(args)
    except (FileNotFoundError, ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except TailbenchError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
