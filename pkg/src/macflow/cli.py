"""Command-line entry point: ``macflow run | converge | taumax``."""
import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .config import ConfigError, parse_config
from .diagnostics import contour_length, order_parameter, zero_contour
from .harness import convergence_study, run_simulation, tau_max_report
from .matfield import ModelParams, PreconditionError

log = logging.getLogger("macflow")


def _time_tag(t):
    return f"{t:g}".replace(".", "p")


def _out_dir(cfg, override):
    path = Path(override or cfg.output_dir or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config_meta(cfg):
    p, sc = cfg.params, cfg.scenario
    return {
        "model": {"m1": p.m1, "m2": p.m2, "epsilon": p.epsilon, "kappa": p.kappa,
                  "symbol": cfg.symbol},
        "grid": {"nx": cfg.nx, "ny": cfg.ny},
        "time": {"order": cfg.order, "tau": cfg.tau, "T": cfg.T},
        "ic": {"kind": sc.kind, "seed": sc.seed, "K": sc.K, "metric": sc.metric},
        "rescale": {"mode": cfg.rescale_mode, "samples": cfg.samples},
    }


def cmd_run(config_path, out=None, seed=None):
    cfg = parse_config(config_path, seed=seed)
    out = _out_dir(cfg, out)
    diag, snaps = run_simulation(cfg)
    io.write_series(diag.series, out / "series.csv", cfg.series_stride)
    files = ["series.csv"]
    lengths = {}
    for t in sorted(snaps):
        name = f"snapshot_t{_time_tag(t)}.macf"
        io.write_field(snaps[t], out / name)
        files.append(name)
        if cfg.params.m2 == 2:
            lines = zero_contour(order_parameter(snaps[t]))
            cname = f"contour_t{_time_tag(t)}.csv"
            io.write_contours(lines, out / cname)
            files.append(cname)
            lengths[_time_tag(t)] = contour_length(lines)
    meta = {"config": _config_meta(cfg), "steps": cfg.n_steps, "files": files,
            "final": {"sup_frob": diag.series[-1].sup_frob,
                      "energy_total": diag.series[-1].energy_total}}
    if lengths:
        meta["contour_length"] = lengths
    io.write_manifest(meta, out / "manifest.json")
    print(f"wrote {len(files)} files to {out}")
    return 0


def cmd_converge(config_path, orders, k_max, out=None, seed=None):
    cfg = parse_config(config_path, seed=seed)
    if k_max < 1:
        raise ConfigError("--kmax must be >= 1")
    out = _out_dir(cfg, out)
    taus = [cfg.tau * 2.0 ** -k for k in range(k_max + 1)]
    table = convergence_study(replace(cfg, snapshot_times=()), orders, taus,
                              progress=log.info)
    table.to_csv(out / "convergence.csv")
    io.write_manifest({"config": _config_meta(cfg), "orders": list(orders), "k_max": k_max,
                       **table.metadata()}, out / "manifest.json")
    for r in sorted(orders):
        last = table.for_order(r)[-1]
        print(f"r={r} finest L2 rate={last.l2_rate:.3f} Linf rate={last.linf_rate:.3f}")
    return 0


def cmd_taumax(orders, kappa, tau=None):
    rows = tau_max_report(orders, kappa, tau)
    print("r  tau_max")
    for row in rows:
        tm = row["tau_max"]
        text = "inf" if math.isinf(tm) else f"{tm:.6g}"
        line = f"{row['r']}  {text}"
        if row["exceeds"]:
            line += "  (tau exceeds bound)"
        print(line)
    return 0


def _orders(text):
    try:
        vals = [int(s) for s in text.replace(" ", "").split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"orders must be a comma list of integers: {text!r}")
    if not vals or any(not 1 <= r <= 5 for r in vals):
        raise argparse.ArgumentTypeError(f"orders must lie in 1..5: {text!r}")
    return vals


def build_parser():
    ap = argparse.ArgumentParser(prog="macflow",
                                 description="Rescaled ETDRK solver for matrix-valued Allen-Cahn flows.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="time-step one configuration")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--seed", type=int)

    conv = sub.add_parser("converge", help="temporal convergence table")
    conv.add_argument("--config", required=True)
    conv.add_argument("--out")
    conv.add_argument("--seed", type=int)
    conv.add_argument("--orders", type=_orders, default=[3, 4, 5])
    conv.add_argument("--kmax", type=int, default=4)

    tm = sub.add_parser("taumax", help="energy-stable step bounds per order")
    tm.add_argument("--orders", type=_orders, default=[1, 2, 3, 4, 5])
    tm.add_argument("--kappa", type=float)
    tm.add_argument("--m2", type=int, default=1, help="used for the default kappa = 3*m2 + 1")
    tm.add_argument("--tau", type=float, help="flag orders whose bound is below this step")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out, args.seed)
        if args.command == "converge":
            return cmd_converge(args.config, args.orders, args.kmax, args.out, args.seed)
        kappa = args.kappa
        if kappa is None:
            kappa = ModelParams(m1=args.m2, m2=args.m2, epsilon=1.0).kappa
        elif kappa <= 0:
            raise ConfigError(f"--kappa must be positive, got {kappa}")
        return cmd_taumax(args.orders, kappa, args.tau)
    except (ConfigError, PreconditionError, io.FieldFormatError, OSError, ValueError) as exc:
        print(f"macflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
