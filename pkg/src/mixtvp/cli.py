"""Command-line surface: simulate, estimate, forecast, spectral, compare.

Every subcommand reads its instructions from a flat key=value config
file (see io.run_config) plus a few overriding flags, and writes plain
CSV or raw draw stores. Same seed and thread count means byte-identical
output files.
"""

from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dgp import DgpConfig, data_csv, generate, truth_csv
from .evaluation import (
    lpbf_csv,
    parse_scores_csv,
    rmse_table_csv,
    run_forecast_harness,
    scores_csv,
    tables_from_scores,
)
from .io import RunConfig, load_panel_csv, principal_components, run_config, standardize
from .sampler import PosteriorDraws
from .spectral import bands_csv, companion, low_freq
from .var import estimate_var, simulate_predictive, structural_from_paths, structural_to_reduced

__all__ = ["main"]


def _load_config(args) -> RunConfig:
    if args.spec is None:
        raise SystemExit("this command needs --spec <config file>")
    cfg = run_config(Path(args.spec).read_text())
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.thin is not None:
        cfg = replace(cfg, spec=replace(cfg.spec, thin=args.thin))
        if cfg.benchmark is not None:
            cfg = replace(cfg, benchmark=replace(cfg.benchmark, thin=args.thin))
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out if args.out else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_panel(cfg: RunConfig) -> tuple[np.ndarray, tuple[str, ...]]:
    """Load, transform, standardize and optionally factor-augment."""
    if cfg.data is None:
        raise SystemExit("config needs a data = <csv> entry")
    select = list(cfg.variables) if cfg.variables else None
    panel = load_panel_csv(cfg.data, select).transformed()
    values = panel.values
    if cfg.standardize:
        values, _, _ = standardize(values)
    names = panel.names
    if cfg.n_factors > 0:
        full = load_panel_csv(cfg.data).transformed()
        rest = [n for n in full.names if n not in names]
        if not rest:
            raise SystemExit("no spare columns to build factors from")
        idx = [full.names.index(n) for n in rest]
        aligned = full.values[full.values.shape[0] - values.shape[0] :, idx]
        spare, _, _ = standardize(aligned)
        factors, _, _ = principal_components(spare, cfg.n_factors)
        values = np.column_stack([values, factors])
        names = names + tuple(f"f{j + 1}" for j in range(cfg.n_factors))
    return values, names


def _cmd_simulate(args) -> None:
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    y, X, truth = generate(DgpConfig(seed=seed))
    (out / "data.csv").write_text(data_csv(y, X))
    (out / "truth.csv").write_text(truth_csv(truth))
    print(f"wrote {out / 'data.csv'} and {out / 'truth.csv'}")


def _cmd_estimate(args) -> None:
    cfg = _load_config(args)
    out = _out_dir(args)
    Y, names = _build_panel(cfg)
    est = estimate_var(
        Y, cfg.spec.p, cfg.spec, seed=cfg.seed, threads=args.threads, names=names
    )
    for i, eq in enumerate(est.equations):
        eq.save(out / f"eq{i + 1}")
    (out / "variables.txt").write_text("\n".join(names) + "\n")
    print(f"wrote {len(est.equations)} equation stores under {out}")


def _cmd_forecast(args) -> None:
    cfg = _load_config(args)
    if cfg.first_holdout is None:
        raise SystemExit("config needs first_holdout for forecasting")
    benchmark = cfg.benchmark
    if benchmark is None:
        benchmark = replace(cfg.spec, model_class="CONST-MIN", subclass=None)
    out = _out_dir(args)
    Y, names = _build_panel(cfg)
    specs = {"model": cfg.spec, "benchmark": benchmark}
    records = run_forecast_harness(
        Y,
        cfg.spec.p,
        specs,
        cfg.first_holdout,
        cfg.horizons,
        nsim=cfg.nsim,
        seed=cfg.seed,
        threads=args.threads,
    )
    (out / "scores_model.csv").write_text(scores_csv(records["model"], "model"))
    (out / "scores_benchmark.csv").write_text(
        scores_csv(records["benchmark"], "benchmark")
    )
    _write_tables(out, records["model"], records["benchmark"])
    print(f"wrote score and metric tables under {out}")


def _write_tables(out: Path, model_records, bench_records) -> None:
    _, mrows = parse_scores_csv(scores_csv(model_records, "model"))
    _, brows = parse_scores_csv(scores_csv(bench_records, "benchmark"))
    tables = tables_from_scores(mrows, brows)
    (out / "rmse_ratios.csv").write_text(rmse_table_csv({"model": tables["rmse"]}))
    (out / "crps_ratios.csv").write_text(rmse_table_csv({"model": tables["crps"]}))
    origins, series = tables["lpbf"]
    (out / "lpbf.csv").write_text(lpbf_csv({"model": (origins, series)}))
    rows = ["horizon,variable,stat,pvalue,stars,degenerate"]
    for (h, v), res in sorted(tables["stars"].items()):
        rows.append(
            f"{h},{v},{format(res.stat, '.17g')},{format(res.pvalue, '.17g')},"
            f"{res.stars},{int(res.degenerate)}"
        )
    (out / "stars.csv").write_text("\n".join(rows) + "\n")


def _cmd_spectral(args) -> None:
    cfg = _load_config(args)
    if cfg.store is None:
        raise SystemExit("config needs store = <estimate output dir>")
    if cfg.pair is None:
        raise SystemExit("config needs pair = i,j (1-based variable indices)")
    out = _out_dir(args)
    store = Path(cfg.store)
    eq_dirs = sorted(store.glob("eq*"), key=lambda d: int(d.name[2:]))
    if not eq_dirs:
        raise SystemExit(f"no equation stores under {store}")
    eqs = [PosteriorDraws.load(d) for d in eq_dirs]
    paths = []
    for eq in eqs:
        if eq.alpha is not None:
            paths.append(eq.alpha)
        else:
            # constant-coefficient store: tile the final draw over time
            T_eq = eq.h.shape[1]
            paths.append(
                np.broadcast_to(
                    eq.alpha_last[:, None, :],
                    (eq.n_records, T_eq, eq.alpha_last.shape[1]),
                )
            )
    i, j = cfg.pair[0] - 1, cfg.pair[1] - 1
    p = cfg.spec.p
    T = paths[0].shape[1]
    n = min(eq.n_records for eq in eqs)
    rows = []
    excluded_total = 0
    for t in range(T):
        vals = []
        for r in range(n):
            draw = structural_from_paths(
                [path[r] for path in paths], [np.exp(eq.h[r]) for eq in eqs]
            )
            A, sigma = structural_to_reduced(draw, t)
            cf = companion(A, sigma, p)
            if not cf.is_stable():
                excluded_total += 1
                continue
            vals.append(low_freq(cf, i, j))
        if not vals:
            raise SystemExit(f"every draw unstable at t={t}")
        lo, med, hi = np.quantile(vals, [0.16, 0.5, 0.84])
        rows.append((t, med, lo, hi))
    name = f"lowfreq_{cfg.pair[0]}_{cfg.pair[1]}.csv"
    (out / name).write_text(bands_csv(rows, excluded_total))
    print(f"wrote {out / name}")


def _cmd_compare(args) -> None:
    if len(args.scores) != 2:
        raise SystemExit("compare needs exactly two score CSV paths")
    out = _out_dir(args)
    name_a, rows_a = parse_scores_csv(Path(args.scores[0]).read_text())
    name_b, rows_b = parse_scores_csv(Path(args.scores[1]).read_text())
    tables = tables_from_scores(rows_a, rows_b)
    (out / "rmse_ratios.csv").write_text(rmse_table_csv({name_a: tables["rmse"]}))
    (out / "crps_ratios.csv").write_text(rmse_table_csv({name_a: tables["crps"]}))
    origins, series = tables["lpbf"]
    (out / "lpbf.csv").write_text(lpbf_csv({name_a: (origins, series)}))
    rows = ["horizon,variable,stat,pvalue,stars,degenerate"]
    for (h, v), res in sorted(tables["stars"].items()):
        rows.append(
            f"{h},{v},{format(res.stat, '.17g')},{format(res.pvalue, '.17g')},"
            f"{res.stars},{int(res.degenerate)}"
        )
    (out / "stars.csv").write_text("\n".join(rows) + "\n")
    print(f"wrote comparison of {name_a} against {name_b} under {out}")


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="mixtvp",
        description="Estimate, simulate and evaluate mixture-law TVP-VARs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("simulate", _cmd_simulate),
        ("estimate", _cmd_estimate),
        ("forecast", _cmd_forecast),
        ("spectral", _cmd_spectral),
        ("compare", _cmd_compare),
    ):
        p = sub.add_parser(name)
        p.add_argument("--spec", help="config file (key = value lines)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--thin", type=int, default=None)
        if name == "compare":
            p.add_argument("scores", nargs="*", help="two score CSV files")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    args.fn(args)


if __name__ == "__main__":
    main()
