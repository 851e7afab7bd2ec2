"""Command-line entry point.

Subcommands: gen-data, train, eval, repeat, verify-equilibrium, grad-check.
Every command writes only under its --out directory; identical
(command, config, seed) triples produce byte-identical metric files.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import data as datamod
from . import equilibrium, gradcheck, metrics, trigan, variants
from .config import ConfigError, RunConfig, load_config
from .nets import checkpoint_load, checkpoint_save

CHECKPOINT_NAMES = {"g_p": "Gp", "g_n": "Gn", "g_y": "Gy", "d_p": "Dp", "d_n": "Dn", "d_y": "Dy"}

GRAD_CHECK_TOLERANCE = 1e-4


def _build_dataset(cfg: RunConfig) -> datamod.LabeledDataset:
    spec = cfg.data
    if spec.kind == "toy-mixture":
        return datamod.gaussian_mixture(
            spec.n_per_class, spec.dim, spec.means, spec.cov_scale, spec.data_seed
        )
    if spec.kind == "corpus":
        loaded = datamod.load_claims(spec.path)
        pairs = datamod.make_pairs(loaded.records)
        ds = datamod.embed_pairs(pairs, spec.embed_dim, spec.embed_seed)
        if loaded.skipped_other_label or loaded.rejected_empty_evidence:
            print(
                f"corpus: skipped {loaded.skipped_other_label} third-label claims, "
                f"rejected {loaded.rejected_empty_evidence} without evidence"
            )
        return ds
    return datamod.load_dataset(spec.path)


def _run_one(cfg: RunConfig, seed: int, run_id: int):
    """Train one model; returns (nets dict, telemetry, final test metrics)."""
    dataset = _build_dataset(cfg)
    train_ds, val_ds, test_ds = datamod.split(dataset, cfg.split, cfg.split_seed)
    priors = cfg.priors or datamod.class_priors(train_ds)
    tcfg = cfg.train_config(seed=seed)
    if cfg.variant == "baseline":
        net, telemetry = variants.baseline_train(train_ds, tcfg, val_data=val_ds, run_id=run_id)
        nets = {"Gy": net}
        scores, _ = trigan.forward(net, test_ds.features)
        preds = (scores[:, 0] >= 0.5).astype(np.int64)
    else:
        model = trigan.build_model(
            train_ds.dim, cfg.noise_dim, priors[0], priors[1], seed, hidden=cfg.hidden
        )
        kind = cfg.variant_kind()
        if kind is None:
            model, telemetry = trigan.train(model, train_ds, tcfg, val_data=val_ds, run_id=run_id)
        else:
            model, telemetry = variants.train_variant(
                model, train_ds, tcfg, kind, val_data=val_ds, run_id=run_id
            )
        nets = {CHECKPOINT_NAMES[k]: v for k, v in model.nets().items()}
        _, preds = trigan.classify_batch(model, test_ds.features)
    if len(test_ds):
        p, r, f1, _ = metrics.precision_recall_f1(preds, test_ds.labels)
    else:
        p = r = f1 = float("nan")
    return nets, telemetry, {"precision": p, "recall": r, "f1": f1}


def cmd_gen_data(args) -> int:
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    dataset = _build_dataset(cfg)
    path = os.path.join(args.out, "dataset.csv")
    datamod.save_dataset(dataset, path)
    print(f"wrote {len(dataset)} samples of dim {dataset.dim} to {path}")
    return 0


def cmd_train(args) -> int:
    cfg = _config_with_overrides(args)
    os.makedirs(args.out, exist_ok=True)
    nets, telemetry, final = _run_one(cfg, cfg.seed, run_id=0)
    checkpoint_save(nets, os.path.join(args.out, "checkpoint.json"))
    metrics.emit(telemetry, os.path.join(args.out, "telemetry.csv"))
    print(
        f"test precision={final['precision']:.6f} recall={final['recall']:.6f} "
        f"f1={final['f1']:.6f}"
    )
    return 0


def cmd_eval(args) -> int:
    nets = checkpoint_load(args.checkpoint)
    if "Gy" not in nets:
        print("checkpoint has no Gy net", file=sys.stderr)
        return 1
    dataset = datamod.load_dataset(args.data)
    os.makedirs(args.out, exist_ok=True)
    scores, _ = trigan.forward(nets["Gy"], dataset.features)
    preds = (scores[:, 0] >= 0.5).astype(np.int64)
    p, r, f1, degenerate = metrics.precision_recall_f1(preds, dataset.labels)
    rec = metrics.MetricsRecord(run=0, iter=0, precision=p, recall=r, f1=f1)
    metrics.emit([rec], os.path.join(args.out, "metrics.csv"))
    flag = " (degenerate 0/0 case)" if degenerate else ""
    print(f"precision={p:.6f} recall={r:.6f} f1={f1:.6f}{flag}")
    return 0


def cmd_repeat(args) -> int:
    cfg = _config_with_overrides(args)
    os.makedirs(args.out, exist_ok=True)
    per_run = []
    for i in range(cfg.repeats):
        seed = cfg.seed + i
        nets, telemetry, final = _run_one(cfg, seed, run_id=i)
        metrics.emit(telemetry, os.path.join(args.out, f"telemetry_run{i}.csv"))
        checkpoint_save(nets, os.path.join(args.out, f"checkpoint_run{i}.json"))
        per_run.append(final)
        print(
            f"run {i} (seed {seed}): precision={final['precision']:.6f} "
            f"recall={final['recall']:.6f} f1={final['f1']:.6f}"
        )
    agg = metrics.aggregate(per_run)
    summary_path = os.path.join(args.out, "summary.csv")
    with open(summary_path, "w") as f:
        f.write("metric,mean,std,runs\n")
        for k in ("precision", "recall", "f1"):
            f.write(f"{k},{agg.mean[k]!r},{agg.std[k]!r},{agg.n_runs}\n")
    for k in ("precision", "recall", "f1"):
        print(f"{k}: {agg.mean[k]:.4f} ± {agg.std[k]:.4f}")
    print(f"wrote {summary_path}")
    return 0


def cmd_verify_equilibrium(args) -> int:
    k = args.support_size
    if args.pp is not None:
        p_p = np.array(args.pp)
        p_n = np.array(args.pn) if args.pn is not None else p_p[::-1].copy()
    else:
        p_p = np.zeros(k)
        p_p[0] = 1.0
        p_n = np.zeros(k)
        p_n[min(1, k - 1)] = 1.0
    report = equilibrium.verify_equilibrium(p_p, p_n, args.pi_p, args.grid_step)
    print(f"p_p = {p_p.tolist()}, p_n = {p_n.tolist()}, pi_p = {args.pi_p}")
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def cmd_grad_check(args) -> int:
    worst = gradcheck.check_all_gradients(args.seed, args.instances)
    overall = max(worst.values())
    for name in sorted(worst):
        status = "ok" if worst[name] <= GRAD_CHECK_TOLERANCE else "FAIL"
        print(f"{name:30s} max rel err {worst[name]:.3e}  {status}")
    print(f"overall max relative error: {overall:.3e}")
    return 0 if overall <= GRAD_CHECK_TOLERANCE else 1


def _config_with_overrides(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.variant is not None:
        cfg.variant = args.variant
    if args.gy_loss is not None:
        cfg.g_y_loss_mode = args.gy_loss
    return cfg


def _add_run_args(p):
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--variant",
        choices=("proposed", "inverted", "symmetric", "symmetric-intended", "baseline"),
        default=None,
    )
    p.add_argument("--gy-loss", choices=("alg1-line14", "eq4"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="claimgan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="materialize a dataset file from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train one model; writes checkpoint + telemetry")
    _add_run_args(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("repeat", help="R seeded runs plus a mean/std summary")
    _add_run_args(p)
    p.set_defaults(fn=cmd_repeat)

    p = sub.add_parser("verify-equilibrium", help="grid-check the equilibrium claims")
    p.add_argument("--support-size", "-k", type=int, default=2)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--pi-p", type=float, default=0.5)
    p.add_argument("--pp", type=float, nargs="+", default=None, help="positive masses")
    p.add_argument("--pn", type=float, nargs="+", default=None, help="negative masses")
    p.set_defaults(fn=cmd_verify_equilibrium)

    p = sub.add_parser("grad-check", help="finite-difference check of every update rule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=20)
    p.set_defaults(fn=cmd_grad_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
