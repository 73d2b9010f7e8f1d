"""Command-line surface.

One subcommand per tool: describe-structure, describe-returns,
describe-coverage, summary, subsample, combine, match, construct, fetch,
lint, synth. Exit codes: 0 success, 1 user error, 2 data error, 3 I/O error.
Commands read input vaults but never modify them; dataset-producing commands
write a fresh vault plus the selection plan that reproduces it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from .config import resolve_settings
from .core import TrajectoryDataset, validate
from .coverage import CoverageReport, coverage_report
from .errors import TrajvaultError, UserError
from .lint import LintAttachments, lint_vault
from .report import (SUMMARY_HEADERS, density_csv, density_plot_spec, fmt_float,
                     format_table, histogram_csv, histogram_plot_spec,
                     render_density_png, render_histogram_png, render_spectrum_png,
                     spectrum_csv, spectrum_plot_spec, summary_row, svg_histogram)
from .resample import (SelectionPlan, TargetDistribution, combine as combine_op,
                       construct_mean_std, match_distributions, replay,
                       subsample_to_target, subsample_transitions)
from .stats import (DensityCurve, EpisodeReturnSummary, Histogram, density,
                    episode_returns, histogram, summarize)
from .synth import BehaviourKnob, DecPomdpSpec, generate, generate_return_pool
from .vault import fetch_vault, import_foreign, pack_vault, read_vault, write_vault


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract wants 1."""

    def error(self, message):
        raise UserError(f"{self.prog}: {message}")


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "format", "text") == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _default_out(vault_path: str, suffix: str) -> str:
    # Beside the vault, not in the CWD: reports for /data/runs/demo land at
    # /data/runs/demo_report even when invoked from elsewhere.
    norm = os.path.normpath(vault_path)
    base = os.path.basename(norm) or "vault"
    return os.path.join(os.path.dirname(norm), f"{base}_{suffix}")


def _write(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(content)


def _dataset_name(path: str, dataset: TrajectoryDataset) -> str:
    return dataset.meta.name or os.path.basename(os.path.normpath(path))


def _save_plan(plan: SelectionPlan, out_dir: str, filename: str = "selection_plan.json") -> str:
    path = os.path.join(out_dir, filename)
    plan.save(path)
    return path


def cmd_describe_structure(args) -> int:
    ds = read_vault(args.vault)
    cols = [("observations", str(ds.observations.dtype), list(ds.observations.shape)),
            ("actions", str(ds.actions.dtype), list(ds.actions.shape)),
            ("rewards", str(ds.rewards.dtype), list(ds.rewards.shape)),
            ("terminals", str(ds.terminals.dtype), list(ds.terminals.shape))]
    if ds.state is not None:
        cols.append(("state", str(ds.state.dtype), list(ds.state.shape)))
    payload = {
        "name": _dataset_name(args.vault, ds),
        "n_transitions": ds.n_transitions,
        "n_trajectories": ds.n_episodes,
        "n_agents": ds.n_agents,
        "columns": [{"name": n, "dtype": d, "shape": s} for n, d, s in cols],
    }
    table = format_table(["Column", "Dtype", "Shape"],
                         [[n, d, "x".join(map(str, s))] for n, d, s in cols])
    text = (f"dataset: {payload['name']}\n"
            f"transitions: {ds.n_transitions}  trajectories: {ds.n_episodes}  "
            f"agents: {ds.n_agents}\n" + table)
    _emit(args, payload, text)
    return 0


def _returns_report_files(out_dir: str, name: str, hist: Histogram,
                          curve: Optional[DensityCurve]) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    files = {}
    files["histogram_csv"] = os.path.join(out_dir, "histogram.csv")
    _write(files["histogram_csv"], histogram_csv(hist))
    files["histogram_svg"] = os.path.join(out_dir, "histogram.svg")
    _write(files["histogram_svg"], svg_histogram(hist, f"{name}: episode returns"))
    files["histogram_png"] = os.path.join(out_dir, "histogram.png")
    render_histogram_png(hist, files["histogram_png"], f"{name}: episode returns")
    specs = [histogram_plot_spec(hist, f"{name}: episode returns")]
    if curve is not None:
        files["density_csv"] = os.path.join(out_dir, "density.csv")
        _write(files["density_csv"], density_csv(curve))
        files["density_png"] = os.path.join(out_dir, "density.png")
        render_density_png(curve, files["density_png"], f"{name}: return density")
        specs.append(density_plot_spec(curve, f"{name}: return density"))
    files["plot_spec"] = os.path.join(out_dir, "plot_spec.json")
    _write(files["plot_spec"], json.dumps(specs, indent=2) + "\n")
    return files


def cmd_describe_returns(args) -> int:
    ds = read_vault(args.vault)
    name = _dataset_name(args.vault, ds)
    returns = episode_returns(ds, args.gamma)
    summ = summarize(returns, n_transitions=ds.n_transitions)
    hist = histogram(returns, bins=args.bins)
    curve: Optional[DensityCurve] = None
    degenerate = None
    try:
        curve = density(returns)
    except TrajvaultError as e:
        degenerate = str(e)

    out_dir = args.out or _default_out(args.vault, "report")
    files = _returns_report_files(out_dir, name, hist, curve)
    summary_json = summ.to_json()
    _write(os.path.join(out_dir, "summary.json"), json.dumps(summary_json, indent=2) + "\n")
    headers = ["Dataset", "Mean", "Stddev", "Min", "Max", "#Transitions", "#Trajectories"]
    row = [name, fmt_float(summ.mean), fmt_float(summ.std), fmt_float(summ.min),
           fmt_float(summ.max), str(summ.n_transitions), str(summ.n_trajectories)]
    table = format_table(headers, [row])
    _write(os.path.join(out_dir, "summary.txt"), table)

    payload = {"name": name, "summary": summary_json,
               "histogram": hist.to_json(),
               "density": None if curve is None else curve.to_json(),
               "files": files}
    if degenerate:
        payload["density_note"] = degenerate
    text = table + (f"(density skipped: {degenerate})\n" if degenerate else "")
    text += f"report files in {out_dir}\n"
    _emit(args, payload, text)
    return 0


def cmd_describe_coverage(args) -> int:
    ds = read_vault(args.vault)
    name = _dataset_name(args.vault, ds)
    report = coverage_report(ds, exact=args.exact)

    out_dir = args.out or _default_out(args.vault, "coverage")
    os.makedirs(out_dir, exist_ok=True)
    files = {"coverage_json": os.path.join(out_dir, "coverage.json"),
             "spectrum_csv": os.path.join(out_dir, "spectrum.csv"),
             "plot_spec": os.path.join(out_dir, "plot_spec.json"),
             "spectrum_png": os.path.join(out_dir, "spectrum.png")}
    _write(files["coverage_json"], json.dumps(report.to_json(), indent=2) + "\n")
    _write(files["spectrum_csv"], spectrum_csv(report))
    _write(files["plot_spec"],
           json.dumps(spectrum_plot_spec(report, f"{name}: count-frequency spectrum"),
                      indent=2) + "\n")
    render_spectrum_png(report, files["spectrum_png"], f"{name}: count-frequency spectrum")

    rows = [["total transitions", str(report.total_transitions)],
            ["Joint-SACo", fmt_float(report.joint_saco, 4)],
            ["JOJACo", fmt_float(report.jojaco, 4)]]
    for aid in sorted(report.decoaco):
        rows.append([f"DecOACo[{aid}]", fmt_float(report.decoaco[aid], 4)])
    text = format_table(["Metric", "Value"], rows) + f"report files in {out_dir}\n"
    payload = dict(report.to_json(), name=name, files=files)
    _emit(args, payload, text)
    return 0


def cmd_summary(args) -> int:
    out_dir = args.out or _default_out(args.vaults[0], "summary")
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    payload_rows = []
    for path in args.vaults:
        ds = read_vault(path)
        name = _dataset_name(path, ds)
        # File names come from the vault path, not the metadata name: several
        # inputs may share a metadata name (e.g. subsamples of one source).
        stem = os.path.basename(os.path.normpath(path)) or "vault"
        returns = episode_returns(ds, 1.0)
        summ = summarize(returns, n_transitions=ds.n_transitions)
        report = coverage_report(ds, exact=args.exact)
        hist = histogram(returns, bins=args.bins)
        _write(os.path.join(out_dir, f"{stem}_histogram.csv"), histogram_csv(hist))
        _write(os.path.join(out_dir, f"{stem}_histogram.svg"),
               svg_histogram(hist, f"{name}: episode returns"))
        render_histogram_png(hist, os.path.join(out_dir, f"{stem}_histogram.png"),
                             f"{name}: episode returns")
        rows.append(summary_row(name, summ, report.joint_saco))
        payload_rows.append({"dataset": name, **summ.to_json(),
                             "joint_saco": report.joint_saco,
                             "jojaco": report.jojaco})
    text = format_table(list(SUMMARY_HEADERS), rows) + f"histograms in {out_dir}\n"
    _emit(args, {"rows": payload_rows}, text)
    return 0


def _report_new_vault(args, result: TrajectoryDataset, plans: list, outs: list) -> None:
    payload = {"outputs": []}
    lines = []
    for out, plan in zip(outs, plans):
        entry = {"vault": out, "plan": os.path.join(out, "selection_plan.json"),
                 "achieved": plan.achieved.to_json()}
        if plan.feasibility is not None:
            entry["feasibility"] = plan.feasibility
        payload["outputs"].append(entry)
        a = plan.achieved
        lines.append(f"wrote {out}: {a.n_trajectories} episodes, "
                     f"{a.n_transitions} transitions, mean {a.mean:.4f}, "
                     f"std {a.std:.4f}")
        if plan.feasibility is not None:
            lines.append(f"  feasibility: TV distance {plan.feasibility['tv_distance']:.4f}")
    _emit(args, payload, "\n".join(lines) + "\n")


def cmd_subsample(args) -> int:
    ds = read_vault(args.vault)
    if args.replay_plan:
        plan = SelectionPlan.load(args.replay_plan)
        result = replay(plan, ds)
    elif args.target is not None:
        if args.transitions is None:
            raise UserError("--transitions is required with --target")
        target = TargetDistribution.from_json_file(args.target)
        result, plan = subsample_to_target(ds, target, args.transitions, args.seed)
    else:
        if args.transitions is None:
            raise UserError("one of --transitions or --replay-plan is required")
        result, plan = subsample_transitions(ds, args.transitions, args.seed)
    write_vault(result, args.out)
    _save_plan(plan, args.out)
    _report_new_vault(args, result, [plan], [args.out])
    return 0


def cmd_combine(args) -> int:
    datasets = [read_vault(p) for p in args.vaults]
    result = combine_op(datasets)
    write_vault(result, args.out)
    returns = episode_returns(result, 1.0)
    summ = summarize(returns, n_transitions=result.n_transitions)
    plan = SelectionPlan(source_dataset_name=result.meta.name,
                         selected_episode_indices=np.arange(result.n_episodes),
                         rng_seed=0, achieved=summ)
    plan_path = _save_plan(plan, args.out)
    payload = {"vault": args.out, "plan": plan_path, "achieved": summ.to_json(),
               "sources": [d.meta.name for d in datasets]}
    text = (f"wrote {args.out}: {result.n_episodes} episodes, "
            f"{result.n_transitions} transitions from {len(datasets)} vault(s)\n")
    _emit(args, payload, text)
    return 0


def cmd_match(args) -> int:
    a = read_vault(args.vault_a)
    b = read_vault(args.vault_b)
    (out_a, out_b), (plan_a, plan_b) = match_distributions(
        a, b, bins=args.bins, budget=args.budget, seed=args.seed)
    write_vault(out_a, args.out_a)
    write_vault(out_b, args.out_b)
    _save_plan(plan_a, args.out_a)
    _save_plan(plan_b, args.out_b)
    _report_new_vault(args, out_a, [plan_a, plan_b], [args.out_a, args.out_b])
    return 0


def cmd_construct(args) -> int:
    pool = read_vault(args.vault)
    tol = _parse_pair(args.tol, "--tol")
    result, plan = construct_mean_std(pool, args.mean, args.std, args.episodes,
                                      tolerance=tol, seed=args.seed,
                                      max_iters=args.max_iters)
    write_vault(result, args.out)
    _save_plan(plan, args.out)
    _report_new_vault(args, result, [plan], [args.out])
    return 0


def cmd_fetch(args, settings) -> int:
    ds = fetch_vault(args.url, args.dest, cache_dir=settings.cache_dir)
    payload = {"destination": args.dest, "name": ds.meta.name,
               "n_transitions": ds.n_transitions, "n_trajectories": ds.n_episodes}
    _emit(args, payload,
          f"fetched {ds.meta.name} to {args.dest}: {ds.n_episodes} episodes, "
          f"{ds.n_transitions} transitions\n")
    return 0


def _load_attachments(dir_path: str) -> LintAttachments:
    summary = hist = curve = cov = None
    p = os.path.join(dir_path, "summary.json")
    if os.path.exists(p):
        with open(p, encoding="utf-8") as f:
            summary = EpisodeReturnSummary.from_json(json.load(f))
    p = os.path.join(dir_path, "histogram.csv")
    if os.path.exists(p):
        with open(p, encoding="utf-8") as f:
            lines = [ln.strip() for ln in f if ln.strip()][1:]
        if lines:
            lefts = [float(ln.split(",")[0]) for ln in lines]
            rights = [float(ln.split(",")[1]) for ln in lines]
            counts = [int(ln.split(",")[2]) for ln in lines]
            hist = Histogram(bin_edges=np.asarray(lefts + rights[-1:]),
                             counts=np.asarray(counts))
    p = os.path.join(dir_path, "density.csv")
    if os.path.exists(p):
        with open(p, encoding="utf-8") as f:
            lines = [ln.strip() for ln in f if ln.strip()][1:]
        if lines:
            xs = np.asarray([float(ln.split(",")[0]) for ln in lines])
            ys = np.asarray([float(ln.split(",")[1]) for ln in lines])
            curve = DensityCurve(xs=xs, ys=ys, bandwidth=float("nan"))
    p = os.path.join(dir_path, "coverage.json")
    if os.path.exists(p):
        with open(p, encoding="utf-8") as f:
            cov = CoverageReport.from_json(json.load(f))
    return LintAttachments(summary=summary, histogram=hist, density=curve, coverage=cov)


def cmd_lint(args) -> int:
    ds = read_vault(args.vault)
    attached = _load_attachments(args.attachments) if args.attachments else None
    findings = lint_vault(ds, attached)
    payload = {"findings": [f.to_json() for f in findings]}
    if findings:
        rows = [[f.rule_id, f.severity, f.message, f'"{f.guideline_ref}"']
                for f in findings]
        text = format_table(["Rule", "Severity", "Message", "Guideline"], rows)
    else:
        text = "no findings\n"
    _emit(args, payload, text)
    return 0


def _parse_pair(raw: str, flag: str) -> tuple:
    parts = raw.split(",")
    if len(parts) != 2:
        raise UserError(f"{flag} expects two comma-separated numbers, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UserError(f"{flag} expects numbers, got {raw!r}") from None


def cmd_synth(args) -> int:
    if args.pool:
        lo, hi = _parse_pair(args.pool, "--pool")
        ds = generate_return_pool((lo, hi), args.episodes, args.length, args.seed)
    else:
        spec = (DecPomdpSpec.from_json_file(args.spec) if args.spec
                else DecPomdpSpec(n_agents=2, observation_dim=4, action_cardinality=5,
                                  state_dim=3))
        knob = BehaviourKnob(quality=args.quality, exploration_noise=args.exploration_noise)
        ds = generate(spec, knob, args.episodes, args.seed)
    write_vault(ds, args.out)
    payload = {"vault": args.out, "name": ds.meta.name,
               "n_transitions": ds.n_transitions, "n_trajectories": ds.n_episodes}
    _emit(args, payload,
          f"wrote {args.out}: {ds.n_episodes} episodes, {ds.n_transitions} transitions\n")
    return 0


def _add_format(p) -> None:
    p.add_argument("--format", choices=("json", "text"), default="text",
                   help="stdout format (default text)")


def build_parser() -> _Parser:
    parser = _Parser(prog="trajvault",
                     description="Store, profile, and resample multi-agent "
                                 "trajectory datasets.")
    parser.add_argument("--cache-dir", default=None,
                        help="cache directory for fetched archives "
                             "(or TRAJVAULT_CACHE_DIR, or cache_dir in trajvault.toml)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker thread cap (or TRAJVAULT_THREADS; reserved, "
                             "current pipelines are single-threaded)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe-structure", help="list columns, dtypes, shapes, counts")
    p.add_argument("vault")
    _add_format(p)
    p.set_defaults(func=cmd_describe_structure)

    p = sub.add_parser("describe-returns",
                       help="episode-return summary, histogram, density")
    p.add_argument("vault")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", default=None, help="report directory")
    _add_format(p)
    p.set_defaults(func=cmd_describe_returns)

    p = sub.add_parser("describe-coverage",
                       help="unique-pair coverage ratios and count-frequency spectrum")
    p.add_argument("vault")
    p.add_argument("--exact", action="store_true",
                   help="count full serialized keys instead of digests")
    p.add_argument("--out", default=None, help="report directory")
    _add_format(p)
    p.set_defaults(func=cmd_describe_coverage)

    p = sub.add_parser("summary", help="combined statistics table, one row per vault")
    p.add_argument("vaults", nargs="+")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out", default=None, help="directory for emitted histograms")
    _add_format(p)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("subsample",
                       help="subsample whole episodes to a transition budget")
    p.add_argument("vault")
    p.add_argument("--transitions", type=int, default=None, help="transition budget")
    p.add_argument("--target", default=None,
                   help="JSON file with a target return distribution {edges, probs}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay-plan", default=None,
                   help="replay a saved selection plan instead of sampling")
    p.add_argument("--out", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("combine", help="concatenate several vaults into one")
    p.add_argument("vaults", nargs="+")
    p.add_argument("--out", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("match",
                       help="subsample two vaults to matching return distributions")
    p.add_argument("vault_a")
    p.add_argument("vault_b")
    p.add_argument("--budget", type=int, required=True, help="per-side transition budget")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("construct",
                       help="select episodes hitting a target return mean and std")
    p.add_argument("vault")
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--std", type=float, required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--tol", default="0.1,0.1", help="mean,std tolerances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--out", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("fetch", help="download, verify, and extract a vault archive")
    p.add_argument("url")
    p.add_argument("--dest", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_fetch, needs_settings=True)

    p = sub.add_parser("lint", help="check dataset metadata against the guidelines")
    p.add_argument("vault")
    p.add_argument("--attachments", default=None,
                   help="directory with summary.json / histogram.csv / density.csv / "
                        "coverage.json from describe commands")
    _add_format(p)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("synth", help="generate a synthetic vault")
    p.add_argument("--spec", default=None, help="generator spec JSON file")
    p.add_argument("--pool", default=None,
                   help="lo,hi: constant-reward pool with uniform returns instead")
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--length", type=int, default=20,
                   help="episode length for --pool mode")
    p.add_argument("--quality", type=float, default=0.5)
    p.add_argument("--exploration-noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "needs_settings", False):
            settings = resolve_settings(flag_cache_dir=args.cache_dir,
                                        flag_threads=args.threads)
            return args.func(args, settings)
        return args.func(args)
    except UserError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except TrajvaultError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
