"""Command-line surface: frontier, analyze, rm-gen, run, experiment, stats, render.

Exit codes: 0 success, 1 validation error, 2 required data missing,
3 numerical failure.  All commands are deterministic given --seed and the
effective configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys

import numpy as np

from . import agents, evolve, ib, randmodel, stats, wcs
from .config import cfg_bool, cfg_float, cfg_int, parse_config
from .errors import DataMissingError, NumericalError, ValidationError
from .grid import ChipGrid, build_meaning_model, default_grid, load_chip_grid
from .render import render_histogram, render_ib_plane, render_map
from .util import fmt_float, write_csv


def _load_grid(args) -> ChipGrid:
    data_dir = getattr(args, "data", None)
    if data_dir:
        chips = os.path.join(data_dir, "chips.tsv")
        prior = os.path.join(data_dir, "prior.tsv")
        if os.path.exists(chips):
            return load_chip_grid(chips, prior if os.path.exists(prior) else None)
        prior_only = prior if os.path.exists(prior) else None
        if prior_only:
            return default_grid(prior_only)
    return default_grid()


def _references(args, grid: ChipGrid) -> list[wcs.WcsLanguage]:
    """Real survey languages when term data is present, fixtures otherwise."""
    data_dir = getattr(args, "data", None)
    if data_dir:
        term = os.path.join(data_dir, "term.txt")
        dictf = os.path.join(data_dir, "dict.txt")
        if os.path.exists(term):
            return wcs.parse_wcs(term, dictf if os.path.exists(dictf) else None, grid)
        if getattr(args, "require_wcs", False):
            raise DataMissingError(f"no term.txt under {data_dir}")
    elif getattr(args, "require_wcs", False):
        raise DataMissingError("--require-wcs set but no --data directory given")
    count = cfg_int(args.cfg, "fixture_count")
    return wcs.fixture_languages(grid, count)


def _curve_cache_key(grid: ChipGrid, cfg) -> str:
    raw = "|".join(
        [
            grid.grid_id,
            cfg["sigma_sq"],
            cfg["beta_steps"],
            cfg["beta_max"],
            cfg["max_words"],
            cfg["frontier_tol"],
            cfg["frontier_max_sweeps"],
        ]
    )
    return hashlib.sha256(raw.encode()).hexdigest()[:12]


def _frontier_curve(args, grid: ChipGrid, mm) -> ib.IBCurve:
    """Compute the frontier or reload it from the --out cache."""
    cache_dir = os.path.join(args.out, "cache")
    os.makedirs(cache_dir, exist_ok=True)
    cache = os.path.join(cache_dir, f"curve-{_curve_cache_key(grid, args.cfg)}.csv")
    if os.path.exists(cache):
        return ib.IBCurve.from_csv(cache)
    betas = ib.default_beta_schedule(
        steps=cfg_int(args.cfg, "beta_steps"), beta_max=cfg_float(args.cfg, "beta_max")
    )
    curve = ib.ib_frontier(
        grid,
        mm,
        betas,
        max_words=cfg_int(args.cfg, "max_words"),
        tol=cfg_float(args.cfg, "frontier_tol"),
        max_sweeps=cfg_int(args.cfg, "frontier_max_sweeps"),
    )
    if not curve.points:
        raise NumericalError("frontier computation produced no converged points")
    curve.to_csv(cache)
    return curve


def _game_config(cfg, variant: str, num_words: int) -> evolve.GameConfig:
    return evolve.GameConfig(
        num_words=num_words,
        variant=variant,
        reward_sigma_sq=cfg_float(cfg, "reward_sigma_sq"),
        steps_per_phase=cfg_int(cfg, "steps_per_phase"),
        batch_size=cfg_int(cfg, "batch_size"),
        learning_rate=cfg_float(cfg, "learning_rate"),
        hidden=cfg_int(cfg, "hidden"),
        dataset_size=cfg_int(cfg, "dataset_size"),
        max_generations=cfg_int(cfg, "max_generations"),
        convergence_window=cfg_int(cfg, "convergence_window"),
        convergence_tol=cfg_float(cfg, "convergence_tol"),
        input_scale=cfg_float(cfg, "input_scale"),
        init_scale=cfg_float(cfg, "init_scale"),
        transmission_argmax=cfg_bool(cfg, "transmission_argmax"),
        transmission_with_replacement=cfg_bool(cfg, "transmission_with_replacement"),
        reinforce_baseline=cfg_bool(cfg, "reinforce_baseline"),
    )


def cmd_frontier(args) -> int:
    grid = _load_grid(args)
    mm = build_meaning_model(grid, cfg_float(args.cfg, "sigma_sq"))
    curve = _frontier_curve(args, grid, mm)
    out_csv = os.path.join(args.out, "frontier.csv")
    curve.to_csv(out_csv)
    render_ib_plane(curve, [], os.path.join(args.out, "frontier.svg"))
    print(f"frontier: {len(curve.points)} points -> {out_csv}")
    return 0


def cmd_analyze(args) -> int:
    grid = _load_grid(args)
    mm = build_meaning_model(grid, cfg_float(args.cfg, "sigma_sq"))
    curve = _frontier_curve(args, grid, mm)
    langs = _references(args, grid)
    refs = [l.encoder for l in langs]
    if args.systems:
        named = []
        for path in args.systems:
            sys_, _ = ib.NamingSystem.from_tsv(path)
            named.append((os.path.basename(path), sys_))
    else:
        named = [(l.name, l.encoder) for l in langs]
    rows = []
    points = []
    for name, sys_ in named:
        pt = ib.analyze(sys_, grid, mm)
        eps, beta_fit = ib.fit_tradeoff(sys_, curve, grid, mm)
        mg, neighbor = ib.min_gnid_to_set(sys_, refs, grid)
        rows.append(
            f"{name},{fmt_float(pt.complexity)},{fmt_float(pt.accuracy)},"
            f"{fmt_float(eps)},{fmt_float(beta_fit)},{fmt_float(mg)},{langs[neighbor].name}"
        )
        points.append((pt.complexity, pt.accuracy, "#d95f02"))
    out_csv = os.path.join(args.out, "analysis.csv")
    write_csv(out_csv, "system,complexity,accuracy,epsilon,beta,min_gnid,neighbor", rows)
    render_ib_plane(curve, points, os.path.join(args.out, "analysis.svg"))
    print(f"analyzed {len(rows)} systems -> {out_csv}")
    return 0


def cmd_rm_gen(args) -> int:
    grid = _load_grid(args)
    mm = build_meaning_model(grid, cfg_float(args.cfg, "sigma_sq"))
    curve = _frontier_curve(args, grid, mm)
    langs = _references(args, grid)
    refs = [l.encoder for l in langs]
    batch = randmodel.generate_rm_batch(
        grid,
        curve,
        refs,
        mm,
        per_k=cfg_int(args.cfg, "per_k"),
        k_range=range(cfg_int(args.cfg, "k_low"), cfg_int(args.cfg, "k_high") + 1),
        complexity_range=(
            cfg_float(args.cfg, "complexity_low"),
            cfg_float(args.cfg, "complexity_high"),
        ),
        threshold=cfg_float(args.cfg, "gnid_threshold"),
        rng_seed=args.seed,
    )
    out_csv = os.path.join(args.out, "rm-batch.csv")
    batch.to_csv(out_csv)
    if args.save_systems:
        sys_dir = os.path.join(args.out, "rm-systems")
        os.makedirs(sys_dir, exist_ok=True)
        for entry in batch.entries:
            path = os.path.join(
                sys_dir, f"rm-{entry.params.num_words}-{entry.seed_used}.tsv"
            )
            entry.system.to_tsv(path, grid_id=grid.grid_id)
    frac = batch.dissimilar_fraction()
    print(f"{len(batch.entries)} systems, dissimilar fraction {frac:.3f} -> {out_csv}")
    return 0


def cmd_run(args) -> int:
    grid = _load_grid(args)
    mm = build_meaning_model(grid, cfg_float(args.cfg, "sigma_sq"))
    cfg = _game_config(args.cfg, args.variant, args.k)
    seed = evolve.chain_seed(args.seed, args.variant, args.k, 0)
    init_rng = np.random.default_rng(np.random.SeedSequence([0xD474, seed]))
    if args.init == "rm-d":
        mmdl = mm
        curve = _frontier_curve(args, grid, mmdl)
        langs = _references(args, grid)
        refs = [l.encoder for l in langs]
        batch = randmodel.generate_rm_batch(
            grid, curve, refs, mmdl, per_k=4,
            k_range=[args.k],
            threshold=cfg_float(args.cfg, "gnid_threshold"),
            rng_seed=args.seed,
        )
        dissimilar = [
            e.system for e in batch.entries if e.min_gnid >= batch.threshold
        ]
        if not dissimilar:
            raise NumericalError("no dissimilar random systems generated; raise per_k")
        init = evolve.init_dataset(
            grid, args.k, init_rng, mode="system", source=dissimilar[0],
            size=cfg.dataset_size,
        )
    else:
        init = evolve.init_dataset(
            grid, args.k, init_rng, mode="uniform", size=cfg.dataset_size
        )
    record = evolve.run_nil_chain(grid, mm, cfg, init, seed)
    os.makedirs(args.out, exist_ok=True)
    record.trajectory_csv(os.path.join(args.out, "trajectory.csv"))
    record.final.to_tsv(os.path.join(args.out, "final-system.tsv"), grid_id=grid.grid_id)
    last = record.stats[-1]
    print(
        f"variant={args.variant} K={args.k}: {record.generations} generations, "
        f"converged={record.converged}, complexity={last.complexity:.3f}, "
        f"accuracy={last.accuracy:.3f}"
    )
    return 0


def cmd_experiment(args) -> int:
    grid = _load_grid(args)
    mm = build_meaning_model(grid, cfg_float(args.cfg, "sigma_sq"))
    curve = _frontier_curve(args, grid, mm)
    langs = _references(args, grid)
    refs = [l.encoder for l in langs]
    variants = args.variants.split(",")
    k_list = [int(k) for k in args.k_list.split(",")]
    cfg_grid = [(v, k) for v in variants for k in k_list]
    base_cfg = _game_config(args.cfg, variants[0], k_list[0])
    out_csv = os.path.join(args.out, "experiment.csv")
    rows = evolve.run_experiment(
        grid,
        mm,
        cfg_grid,
        args.seeds_per_cell,
        args.seed,
        out_csv,
        curve=curve,
        refs=refs,
        base_cfg=base_cfg,
        progress=lambda r: print(
            f"  {r.variant} K={r.num_words} seed={r.seed}: gens={r.generations} "
            f"cx={r.complexity:.3f} eps={r.epsilon:.3f} gnid={r.min_gnid:.3f}"
        ),
    )
    print(f"{len(rows)} chains -> {out_csv}")
    return 0


def cmd_stats(args) -> int:
    def read_col(path: str, col: str) -> list[float]:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        header = lines[0].split(",")
        if col not in header:
            raise ValidationError(f"column {col!r} not in {path}")
        i = header.index(col)
        return [float(ln.split(",")[i]) for ln in lines[1:]]

    x = read_col(args.csv, args.col_a)
    if args.test == "wilcoxon":
        if args.col_b:
            y = read_col(args.csv_b or args.csv, args.col_b)
            if len(x) != len(y):
                raise ValidationError("paired test needs equal-length columns")
            diffs = [a - b for a, b in zip(x, y)]
        else:
            diffs = x
        res = stats.wilcoxon_signed_rank(diffs, sided=args.sided, direction=args.direction)
    else:
        y = read_col(args.csv_b or args.csv, args.col_b)
        res = stats.mann_whitney_u(x, y, sided=args.sided, direction=args.direction)
    print(
        f"{args.test}: statistic={res.statistic:.6g} p={res.p_value:.6g} "
        f"method={res.method} n={res.n}" + (f" m={res.m}" if res.m else "")
    )
    return 0


def cmd_render(args) -> int:
    grid = _load_grid(args)
    os.makedirs(args.out, exist_ok=True)
    if args.what == "map":
        sys_, _ = ib.NamingSystem.from_tsv(args.system)
        out = os.path.join(args.out, "map.svg")
        render_map(sys_, grid, out)
    elif args.what == "ib-plane":
        rows = evolve.load_experiment_rows(args.experiment)
        pts = [(r.complexity, r.accuracy, "#1b9e77") for r in rows]
        mm = build_meaning_model(grid, cfg_float(args.cfg, "sigma_sq"))
        curve = _frontier_curve(args, grid, mm)
        out = os.path.join(args.out, "ib-plane.svg")
        render_ib_plane(curve, pts, out)
    else:  # gnid-hist
        rows = evolve.load_experiment_rows(args.experiment)
        groups = [("chains", [r.min_gnid for r in rows], "#1b9e77")]
        out = os.path.join(args.out, "gnid-hist.svg")
        render_histogram(groups, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colorevo",
        description="Simulate and analyze the evolution of color naming systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_seed=False):
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=0, required=needs_seed, help="master RNG seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--data", default=None, help="directory with chips.tsv/prior.tsv/term.txt")
        p.add_argument(
            "--require-wcs",
            action="store_true",
            help="fail (exit 2) instead of falling back to fixture languages",
        )

    p = sub.add_parser("frontier", help="compute and cache the optimal frontier")
    common(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("analyze", help="IB table for naming-system files")
    common(p)
    p.add_argument("--systems", nargs="*", default=[], help="system TSV files (default: references)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("rm-gen", help="generate a labeled batch of random systems")
    common(p, needs_seed=True)
    p.add_argument("--save-systems", action="store_true")
    p.set_defaults(func=cmd_rm_gen)

    p = sub.add_parser("run", help="run one evolution chain")
    common(p, needs_seed=True)
    p.add_argument("--variant", choices=evolve.VARIANTS, default="il+c")
    p.add_argument("--k", type=int, required=True, help="vocabulary size")
    p.add_argument("--init", choices=["uniform", "rm-d"], default="uniform")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run a (variant, K, seed) grid; resumable")
    common(p, needs_seed=True)
    p.add_argument("--variants", default="il+c", help="comma list from il+c,il,c")
    p.add_argument("--k-list", default="3,5,7,10", help="comma list of vocabulary sizes")
    p.add_argument("--seeds-per-cell", type=int, default=10)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", help="rank tests over CSV columns")
    common(p)
    p.add_argument("--test", choices=["mw", "wilcoxon"], required=True)
    p.add_argument("--csv", required=True)
    p.add_argument("--csv-b", default=None, help="second file (default: same as --csv)")
    p.add_argument("--col-a", required=True)
    p.add_argument("--col-b", default=None)
    p.add_argument("--sided", choices=["one", "two"], default="two")
    p.add_argument("--direction", choices=["less", "greater"], default="less")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("render", help="render a mosaic, IB plane, or histogram")
    common(p)
    p.add_argument("--what", choices=["map", "ib-plane", "gnid-hist"], default="map")
    p.add_argument("--system", default=None, help="naming-system TSV (for map)")
    p.add_argument("--experiment", default=None, help="experiment CSV (for plots)")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.cfg = parse_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except DataMissingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
