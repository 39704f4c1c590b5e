"""Command-line surface: dataset generation, alignment runs, benchmark
sweeps with paired statistics, and wavelet-tree inspection.

Every command is deterministic under a fixed seed; errors are written to
stderr as ``error[<code>] <message>`` and produce a non-zero exit status.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy import stats as _scipy_stats

from .data import (
    NonNumericCellError,
    RaggedRowError,
    TimeSeries,
    alignment_error,
    load_timeseries_csv,
    save_timeseries_csv,
    synthetic_with_latent,
    GENERATOR_KINDS,
)
from .dtw import dtw_align, load_path_csv, path_to_matrix
from .embed import diffusion_tree
from .graph import heat_kernel_knn
from .warp import (
    WarpConfig,
    WarpResult,
    curve_warp,
    manifold_warp_baseline,
    save_warp_result,
    wamm,
    wow,
)
from .wavelets import dump_tree

METHODS = ("dtw", "wow", "wamm", "cw", "cw2", "mw-linear", "mw-nonlinear", "mw-two-step")

_CFG_KEYS = ("mu", "tau", "d", "k", "epsilon", "max_iters", "tol", "level")


def _read_kv(path) -> dict:
    """Flat key=value config file; '#' starts a comment line.

    Keys mirror the CLI flags; dashes and underscores are interchangeable.
    """
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key=value): {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _build_config(args, file_cfg: dict | None = None) -> WarpConfig:
    """Defaults < config file < explicit flags."""
    merged: dict = {}
    if file_cfg:
        merged.update({k: v for k, v in file_cfg.items() if k in _CFG_KEYS})
    for key in _CFG_KEYS:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            merged[key] = flag
    kwargs = {}
    for key, value in merged.items():
        if key == "level":
            kwargs["level_override"] = int(value)
        elif key in ("d", "k", "max_iters"):
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    return WarpConfig(**kwargs)


def _run_method(method: str, X: TimeSeries, Y: TimeSeries, cfg: WarpConfig) -> WarpResult:
    if method == "dtw":
        path, cost = dtw_align(X, Y)
        return WarpResult(FX=X.samples, FY=Y.samples, path=path,
                          W_xy=path_to_matrix(path, X.n, Y.n),
                          loss_trace=np.asarray([cost]), iterations=1, converged=True)
    if method == "wow":
        return wow(X, Y, cfg)
    if method == "wamm":
        return wamm(X, Y, cfg)
    if method == "cw":
        return curve_warp(X, Y, cfg, two_step=False)
    if method == "cw2":
        return curve_warp(X, Y, cfg, two_step=True)
    if method == "mw-linear":
        return manifold_warp_baseline(X, Y, cfg, variant="linear")
    if method == "mw-nonlinear":
        return manifold_warp_baseline(X, Y, cfg, variant="nonlinear")
    if method == "mw-two-step":
        return manifold_warp_baseline(X, Y, cfg, variant="two-step")
    raise ValueError(f"unknown method {method!r}")


def paired_t(diffs) -> tuple[float, float]:
    """Two-sided paired t statistic and p-value for per-trial differences.

    All-zero differences mean the methods tie exactly: t = 0, p = 1.
    """
    diffs = np.asarray(diffs, dtype=float)
    n = len(diffs)
    if n < 2:
        raise ValueError("need at least 2 paired differences")
    if np.all(diffs == 0):
        return 0.0, 1.0
    mean = diffs.mean()
    sd = diffs.std(ddof=1)
    if sd == 0:
        return float(np.inf if mean > 0 else -np.inf), 0.0
    t = mean / (sd / np.sqrt(n))
    p = 2.0 * float(_scipy_stats.t.sf(abs(t), df=n - 1))
    return float(t), p


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    ts, latent = synthetic_with_latent(args.kind, args.n, args.noise, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_timeseries_csv(ts, out)
    side = out.with_name(out.stem + ".latent.csv")
    np.savetxt(side, np.atleast_2d(np.asarray(latent, float).T).T, fmt="%.17g", delimiter=",")
    print(f"wrote {out} ({ts.n} rows x {ts.d} cols) and {side}")
    return 0


def cmd_align(args) -> int:
    file_cfg = _read_kv(args.config) if args.config else None
    cfg = _build_config(args, file_cfg)
    X = load_timeseries_csv(args.x)
    Y = load_timeseries_csv(args.y)
    result = _run_method(args.method, X, Y, cfg)
    out = Path(args.out)
    save_warp_result(result, cfg, out)
    with open(out / "method.txt", "w", encoding="utf-8") as fh:
        fh.write(f"method={args.method}\n")
    if args.truth:
        truth = load_path_csv(args.truth)
        err = alignment_error(result.path, truth)
        (out / "error.txt").write_text(f"{err:.17g}\n", encoding="utf-8")
        print(f"alignment error vs truth: {err:.6g}")
    print(f"wrote alignment to {out} ({result.iterations} iterations, "
          f"converged={result.converged})")
    return 0


def _bench_trial_data(spec: dict, trial_seed: int):
    if "x_csv" in spec or "y_csv" in spec:
        if not ("x_csv" in spec and "y_csv" in spec):
            raise ValueError("bench spec needs both x_csv and y_csv")
        X = load_timeseries_csv(spec["x_csv"])
        Y = load_timeseries_csv(spec["y_csv"])
        if "truth_csv" not in spec:
            raise ValueError("bench spec with CSV inputs needs truth_csv for the error metric")
        return X, Y, load_path_csv(spec["truth_csv"])
    for key in ("kind_x", "kind_y", "n"):
        if key not in spec:
            raise ValueError(f"bench spec missing {key!r}")
    n = int(spec["n"])
    noise = float(spec.get("noise", 0.0))
    X, lat_x = synthetic_with_latent(spec["kind_x"], n, noise, 2 * trial_seed)
    Y, lat_y = synthetic_with_latent(spec["kind_y"], n, noise, 2 * trial_seed + 1)
    # ground truth: optimal monotone matching of the latent parameters
    lx = np.atleast_2d(np.asarray(lat_x, float).T).T[:, -1]
    ly = np.atleast_2d(np.asarray(lat_y, float).T).T[:, -1]
    truth, _ = dtw_align(lx[:, None], ly[:, None])
    return X, Y, truth


def cmd_bench(args) -> int:
    spec = _read_kv(args.spec)
    methods = [m.strip() for m in spec.get("methods", "").split(",") if m.strip()]
    if not methods:
        raise ValueError("bench spec needs methods=<comma list>")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r} (known: {', '.join(METHODS)})")
    trials = args.trials if args.trials is not None else int(spec.get("trials", 1))
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed = args.seed if args.seed is not None else int(spec.get("seed", 0))
    cfg = _build_config(args, spec)

    errors = {m: [] for m in methods}
    for trial in range(trials):
        X, Y, truth = _bench_trial_data(spec, seed + trial)
        for m in methods:
            result = _run_method(m, X, Y, cfg)
            errors[m].append(alignment_error(result.path, truth))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,mean,sd," + ",".join(f"trial_{t}" for t in range(trials))]
    for m in methods:
        errs = np.asarray(errors[m])
        sd = errs.std(ddof=1) if trials > 1 else 0.0
        lines.append(f"{m},{errs.mean():.17g},{sd:.17g}," + ",".join(f"{e:.17g}" for e in errs))
    if trials > 1:
        lines.append("pair,method_a,method_b,mean_diff,t_stat,p_value")
        for i, a in enumerate(methods):
            for b in methods[i + 1:]:
                diffs = np.asarray(errors[a]) - np.asarray(errors[b])
                t, p = paired_t(diffs)
                lines.append(f"ttest,{a},{b},{diffs.mean():.17g},{t:.17g},{p:.17g}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    print(f"bench over {trials} trial(s):")
    for m in methods:
        errs = np.asarray(errors[m])
        print(f"  {m:14s} mean={errs.mean():.6g} sd={errs.std(ddof=1) if trials > 1 else 0.0:.6g}")
    print(f"report written to {out}")
    return 0


def cmd_tree(args) -> int:
    X = load_timeseries_csv(args.x)
    k = args.k if args.k is not None else 10
    epsilon = args.epsilon if args.epsilon is not None else 1e-8
    levels = args.level if args.level is not None else 8
    W = heat_kernel_knn(X, min(int(k), X.n - 1))
    tree = diffusion_tree(W, float(epsilon), int(levels))
    dump_tree(tree, args.out)
    print(f"tree with levels of size {tree.dims} written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def _add_cfg_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu", type=float, default=None, help="correspondence weight in [0,1]")
    p.add_argument("--tau", type=float, default=None, help="low-rank reconstruction parameter")
    p.add_argument("--d", type=int, default=None, help="latent dimension")
    p.add_argument("--k", type=int, default=None, help="neighbor count")
    p.add_argument("--epsilon", type=float, default=None, help="wavelet-tree precision")
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="relative loss-decrease tolerance")
    p.add_argument("--level", type=int, default=None, help="tree level override")
    p.add_argument("--config", default=None, help="key=value config file (flags win)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavewarp",
                                     description="time-series alignment on multiscale manifolds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic sequence CSV (+ latent sidecar)")
    p.add_argument("kind", choices=GENERATOR_KINDS)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("align", help="align two CSV sequences")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--x", required=True, help="first sequence CSV")
    p.add_argument("--y", required=True, help="second sequence CSV")
    p.add_argument("--truth", default=None, help="ground-truth path CSV for error reporting")
    p.add_argument("--out", required=True, help="output directory")
    _add_cfg_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("bench", help="paired benchmark over seeded trials")
    p.add_argument("--spec", required=True, help="experiment spec file (key=value)")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--trials", type=int, default=None, help="override the spec's trial count")
    p.add_argument("--seed", type=int, default=None, help="override the spec's base seed")
    _add_cfg_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tree", help="dump a diffusion-wavelet tree for inspection")
    p.add_argument("--x", required=True, help="sequence CSV")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--level", type=int, default=None, help="maximum tree depth")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_tree)

    return parser


_ERROR_CODES = (
    (FileNotFoundError, "missing-file"),
    (RaggedRowError, "ragged-row"),
    (NonNumericCellError, "non-numeric-cell"),
    (ValueError, "invalid-value"),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except tuple(exc for exc, _ in _ERROR_CODES) as err:
        code = next(code for exc, code in _ERROR_CODES if isinstance(err, exc))
        print(f"error[{code}] {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
