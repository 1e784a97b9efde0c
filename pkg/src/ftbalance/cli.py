"""Batch command-line interface.

Subcommands: run (full fractional-step solve), riemann (single Riemann fan as
JSON), analyze (sub-discontinuity curve tracking), check-model (diagnostics),
sweep (convergence study).  Exit codes: 0 success, 2 config error, 3 numerical
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, apply_overrides, parse_config
from .errors import ConstraintError, FrontTrackError, IoError, SchemaError
from .fracstep import convergence_study, run as run_solver
from .functionals import build_measures
from .models import (
    check_diagonal_dominance,
    check_entropy_dissipation,
    check_shizuta_kawashima,
    eigen_decompose,
    make_model,
)
from .output import emit_outputs, fmt, write_csv
from .riemann import solve_riemann
from .structure import gnl_scan, track_beta_curves, PIECEWISE_GNL

log = logging.getLogger("ftbalance")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_NUMERICAL_ERRORS = (FrontTrackError,)


def _setup_logging():
    level = os.environ.get("FT_LOG_LEVEL", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_config(args) -> RunConfig:
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from exc
    doc = apply_overrides(doc, getattr(args, "override", None))
    return parse_config(doc)


def _analyze_curves(cfg: RunConfig, report):
    model = report.model
    curves = []
    az = cfg.analyzer
    families = az["families"] or list(range(model.dimension))
    for family in families:
        lo = model.box_lo[min(family, model.box_lo.size - 1)]
        hi = model.box_hi[min(family, model.box_hi.size - 1)]
        # pull in slightly so finite differences at the ends stay inside the box
        pad = 1e-4 * (hi - lo)
        span = (lo + pad - float(model.u_ref[0]), hi - pad - float(model.u_ref[0]))
        gnl = gnl_scan(model, family, model.u_ref, span)
        if gnl.classification != PIECEWISE_GNL:
            continue
        indices = az["indices"] or list(range(len(gnl.crossings) + 1))
        for beta in az["betas"]:
            for j in indices:
                curves += track_beta_curves(report, beta, family, j, gnl=gnl,
                                            parity_filter=az["parity_filter"])
    return curves


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    model = cfg.make_model()
    report = run_solver(model, cfg.build_datum(), cfg.step_config())
    ledger = build_measures(report, c1=cfg.tolerances["c1"])
    curves = _analyze_curves(cfg, report) if args.analyze else []
    emit_outputs(report, ledger, curves, args.out,
                 config_echo=cfg.effective(), snapshot_times=cfg.snapshot_times)
    log.info("run finished: %d events, %.3fs", len(report.events),
             report.wall_seconds)
    return EXIT_OK


def _cmd_riemann(args) -> int:
    model = make_model(args.model, json.loads(args.params))
    u_left = np.asarray([float(v) for v in args.u_left.split(",")])
    u_right = np.asarray([float(v) for v in args.u_right.split(",")])
    fan = solve_riemann(model, u_left, u_right, args.eps)
    payload = {
        "model": model.name,
        "u_left": list(u_left),
        "u_right": list(u_right),
        "sizes": list(fan.sizes),
        "intermediate_states": [list(w) for w in fan.intermediate_states],
        "waves": [
            {
                "family": int(w.family),
                "kind": w.kind,
                "size": w.size,
                "speed_left": w.speed_left,
                "speed_right": w.speed_right,
                "u_left": list(w.u_left),
                "u_right": list(w.u_right),
            }
            for w in fan.waves
        ],
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "riemann.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    # curve tracking needs front states, so the run is reproduced from its
    # config rather than parsed back out of the exported CSV log
    cfg = _load_config(args)
    model = cfg.make_model()
    report = run_solver(model, cfg.build_datum(), cfg.step_config())
    curves = _analyze_curves(cfg, report)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for cid, curve in enumerate(curves):
        strengths = [curve.strengths[0]] + list(curve.strengths)
        for (t, x), strength in zip(curve.nodes, strengths):
            rows.append((cid, curve.beta, curve.family, curve.index, t, x, strength))
    write_csv(os.path.join(args.out, "curves.csv"),
              ["curve_id", "beta", "family", "j", "t", "x", "strength"], rows)
    counts = {}
    for curve in curves:
        key = f"beta={fmt(curve.beta)},family={curve.family},j={curve.index}"
        counts[key] = counts.get(key, 0) + 1
    summary = {
        "curves": len(curves),
        "counts": counts,
        "parity": [
            {"curve": cid,
             "even_for_positive": c.clause_even_for_positive,
             "odd_for_positive": c.clause_odd_for_positive}
            for cid, c in enumerate(curves)
        ],
    }
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _cmd_check_model(args) -> int:
    model = make_model(args.model, json.loads(args.params))
    u0 = (np.asarray([float(v) for v in args.state.split(",")])
          if args.state else model.u_ref)
    eig = eigen_decompose(model, u0)
    payload = {
        "model": model.name,
        "state": list(u0),
        "eigenvalues": list(eig.lambdas),
        "speed_fences": list(model.speed_fences) if model.speed_fences is not None else None,
    }
    if model.source is not None and model.dimension > 1:
        dd = check_diagonal_dominance(model, u0)
        payload["diagonal_dominance"] = {
            "margin": dd.margin, "weak": dd.weak, "matrix": dd.G.tolist(),
        }
        sk = check_shizuta_kawashima(model, u0)
        payload["shizuta_kawashima"] = {
            "passes": sk.passes, "residuals": list(sk.residuals),
        }
        grad = model.params.get("entropy_gradient")
        if grad is not None:
            ed = check_entropy_dissipation(model, grad, u0, radius=0.05)
            payload["entropy_dissipation"] = {"a": ed.a}
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    levels = cfg.raw["sweep"]["levels"]
    if not levels:
        raise ConstraintError("sweep.levels is empty")
    model = cfg.make_model()
    study = convergence_study(
        model, cfg.build_datum(), [tuple(v) for v in levels], cfg.horizon,
        sample_times=cfg.raw["sweep"]["sample_times"],
        c1=cfg.tolerances["c1"], delta_bar=cfg.tolerances["delta_bar"],
        delta_fence=cfg.tolerances["delta_fence"],
        support=tuple(cfg.raw["support"]) if cfg.raw["support"] else None,
    )
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for i, dists in enumerate(study["distances"]):
        for t, d in zip(study["sample_times"], dists):
            rows.append((study["levels"][i][0], study["levels"][i + 1][0], t, d))
    write_csv(os.path.join(args.out, "sweep.csv"),
              ["eps_coarse", "eps_fine", "t", "l1_distance"], rows)
    print(json.dumps({
        "distances": study["distances"].tolist(),
        "ratios": np.asarray(study["ratios"]).tolist(),
    }, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftbalance",
        description="Wave-front tracking for 1-D systems of balance laws.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full fractional-step solve")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--override", action="append", metavar="KEY=VALUE")
    p_run.add_argument("--analyze", action="store_true",
                       help="also track sub-discontinuity curves")
    p_run.set_defaults(fn=_cmd_run)

    p_rp = sub.add_parser("riemann", help="solve one Riemann problem")
    p_rp.add_argument("--model", required=True)
    p_rp.add_argument("--params", default="{}")
    p_rp.add_argument("--u-left", dest="u_left", required=True)
    p_rp.add_argument("--u-right", dest="u_right", required=True)
    p_rp.add_argument("--eps", type=float, default=0.05)
    p_rp.add_argument("--out", default=None)
    p_rp.set_defaults(fn=_cmd_riemann)

    p_an = sub.add_parser("analyze", help="track (beta,i,j) curves of a run")
    p_an.add_argument("--config", required=True)
    p_an.add_argument("--out", default="out")
    p_an.add_argument("--override", action="append", metavar="KEY=VALUE")
    p_an.set_defaults(fn=_cmd_analyze)

    p_cm = sub.add_parser("check-model", help="hyperbolicity and coupling checks")
    p_cm.add_argument("--model", required=True)
    p_cm.add_argument("--params", default="{}")
    p_cm.add_argument("--state", default=None)
    p_cm.set_defaults(fn=_cmd_check_model)

    p_sw = sub.add_parser("sweep", help="convergence study over (eps, tau) levels")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--out", default="out")
    p_sw.add_argument("--override", action="append", metavar="KEY=VALUE")
    p_sw.set_defaults(fn=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SchemaError, ConstraintError) as exc:
        log.error("config error: %s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        log.error("i/o error: %s", exc)
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _NUMERICAL_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
