"""Command-line front door: run and export every experiment as reproducible CSV.

Exit codes: 0 success, 2 usage/configuration error, 3 runtime numeric failure.
Output directory: --out flag, else the TAUBERLAB_OUT environment variable,
else the current directory.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import arithmetic, kernel, pnt, tauber, zeta
from .errors import ConfigError, NearZeroError, SieveRangeError


def _parse_checkpoints(text):
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad checkpoint list {text!r}: {exc}") from None
    if not vals:
        raise ConfigError("empty checkpoint list")
    return sorted(vals)


def _out_dir(args):
    out = args.out or os.environ.get("TAUBERLAB_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _engine(args, queries=()):
    """Build (or reload) the sieve engine, honoring --seed-cache."""
    limit = int(args.limit)
    engine = arithmetic.SieveEngine(limit, block_size=args.block_size)
    cache = getattr(args, "seed_cache", None)
    idx_path = f"{cache}.ppidx.npz" if cache else None
    if cache and os.path.exists(cache) and os.path.exists(idx_path):
        data = np.load(idx_path)
        if int(data["limit"]) == limit:
            ledger = arithmetic.load_ledger(cache)
            engine._ledger = ledger
            engine._sparse = arithmetic._SparseIndex(data["n"], data["lam"],
                                                     data["isprime"])
    ledger = engine.ledger(sorted(set(queries)))
    if cache and not os.path.exists(cache):
        arithmetic.save_ledger(engine._ledger, cache)
        n, lam, _ = engine.prime_powers
        isprime = engine._sparse.cum_pi - np.concatenate(([0], engine._sparse.cum_pi[:-1])) > 0
        np.savez(idx_path, limit=limit, n=n, lam=lam, isprime=isprime)
    return engine, ledger


def _add_common(sp):
    sp.add_argument("--out", help="output directory (default: $TAUBERLAB_OUT or .)")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--block-size", type=int, default=1 << 20)
    sp.add_argument("--seed-cache", help="path of the summatory ledger binary cache")


def cmd_summatory(args):
    checkpoints = _parse_checkpoints(args.checkpoints)
    if checkpoints[-1] > args.limit:
        raise ConfigError(f"checkpoint {checkpoints[-1]} exceeds --limit {args.limit}")
    _, ledger = _engine(args, checkpoints)
    path = os.path.join(_out_dir(args), "summatory.csv")
    arithmetic.ledger_to_csv(ledger, path)
    print(f"wrote {path} ({len(ledger.queries)} rows)")
    return 0


def cmd_kernel(args):
    p = kernel.make_kernel(args.epsilon)
    out = _out_dir(args)
    kernel.dump_grids(p, os.path.join(out, "kernel_phi.csv"),
                      os.path.join(out, "kernel_phi_hat.csv"))
    rep = kernel.lemma_report(p)
    print(f"kernel report (epsilon = {p.epsilon}):")
    print(f"  lambda = {rep['lambda']}, R = 4*lambda = {rep['R']}")
    print(f"  integral(phi)   = {rep['integral_phi']:.9f}"
          f"  (+- {rep['integral_phi_bound']:.2e}, target 1)")
    print(f"  integral(x phi) = {rep['first_moment_scaled']:.9f}"
          f"  (+- {rep['first_moment_bound']:.2e}, must be < {p.epsilon})")
    print(f"  worst sign violation on +-50 grid = {rep['sign_violation']:.2e}")
    print(f"  |phi_hat| outside [-R, R]        = {rep['hat_outside_support']:.2e}")
    print(f"wrote {out}/kernel_phi.csv and {out}/kernel_phi_hat.csv")
    return 0


def cmd_tauber(args):
    hs = [float(h) for h in np.arange(args.h_start, args.h_stop + args.h_step / 2, args.h_step)]
    if len(hs) == 0:
        raise ConfigError("empty h grid")
    p = kernel.make_kernel(args.epsilon)
    cfg_zeta = zeta.ZetaConfig(cutoff_N=args.cutoff_n, bernoulli_terms=args.bernoulli_terms)
    out = _out_dir(args)

    if args.synthetic == "exp":
        cfg = tauber.ExperimentConfig(kernel=p, h_grid=tuple(hs), quad_T=args.quad_t or 60.0,
                                      quad_points_per_panel=args.quad_points,
                                      freq_step=args.freq_step)
        table = tauber.synthetic_exp_table(p.R, args.freq_step)
        rows = tauber.decay_report(tauber.exp_decay, cfg, table,
                                   tail_env=tauber.exp_decay_tail_env, threads=args.threads)
        limit = None
    else:
        quad_t = args.quad_t or (math.log(args.limit) - hs[-1] - 0.02)
        if quad_t <= 0:
            raise ConfigError(f"h grid reaches log(limit); no room for quad_T "
                              f"(log limit = {math.log(args.limit):.3f}, h_max = {hs[-1]})")
        cfg = tauber.ExperimentConfig(kernel=p, h_grid=tuple(hs), quad_T=quad_t,
                                      quad_points_per_panel=args.quad_points,
                                      freq_step=args.freq_step)
        if hs[-1] + cfg.quad_T > math.log(args.limit):
            raise ConfigError("h grid exceeds the sieve range")
        engine, _ = _engine(args)
        s = tauber.StepS(engine)
        table = zeta.build_boundary_table(p.R, args.freq_step, cfg_zeta, threads=args.threads)
        zeta.boundary_to_csv(table, os.path.join(out, "boundary.csv"))
        rows = tauber.decay_report(s, cfg, table, threads=args.threads)
        limit = engine.limit

    path = os.path.join(out, "tauber.csv")
    tauber.rows_to_csv(rows, path, cfg, sieve_limit=limit)
    print(f"wrote {path} ({len(rows)} rows)")
    for r in rows:
        print(f"  h = {r.h:6.2f}  a_time = {r.a_time:+.6e}  a_freq = {r.a_freq:+.6e}  "
              f"s_h = {r.s_h:+.6e}  budget = {r.err_budget:.2e}")
    return 0


def cmd_pnt(args):
    checkpoints = _parse_checkpoints(args.checkpoints)
    if checkpoints[-1] > args.limit:
        raise ConfigError(f"checkpoint {checkpoints[-1]} exceeds --limit {args.limit}")
    engine, _ = _engine(args, checkpoints)
    rows = pnt.pnt_table(checkpoints, engine)
    out = _out_dir(args)
    path = os.path.join(out, "pnt.csv")
    pnt.rows_to_csv(rows, path, sieve_limit=engine.limit)
    abel = [(x,) + pnt.abel_identity_check(x, engine) for x in checkpoints]
    pnt.abel_to_csv(abel, os.path.join(out, "abel.csv"))
    print(f"wrote {path} and {out}/abel.csv")
    for r, (_, lhs, rhs, gap) in zip(rows, abel):
        print(f"  x = {r.x:12.4g}  psi_ratio = {r.psi_ratio:.6f}  pi_ratio = {r.pi_ratio:.6f}  "
              f"mertens_dev = {r.mertens_dev:+.6e}  mobius = {r.mobius_sum:+.6e}  "
              f"abel_gap = {gap:.2e}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="tauberlab",
                                 description="numerical experiments on sieve data, "
                                             "boundary transforms and shift averages")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("summatory", help="checkpointed summatory tables")
    sp.add_argument("--limit", type=float, required=True)
    sp.add_argument("--checkpoints", required=True)
    _add_common(sp)
    sp.set_defaults(fn=cmd_summatory)

    sp = sub.add_parser("kernel", help="kernel grids and normalization report")
    sp.add_argument("--epsilon", type=float, required=True)
    _add_common(sp)
    sp.set_defaults(fn=cmd_kernel)

    sp = sub.add_parser("tauber", help="shift-average decay and squeeze experiment")
    sp.add_argument("--limit", type=float, default=2.5e7)
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--h-start", type=float, default=8.0)
    sp.add_argument("--h-stop", type=float, default=14.0)
    sp.add_argument("--h-step", type=float, default=1.0)
    sp.add_argument("--quad-t", type=float, default=None,
                    help="time truncation (default: fill the sieve range)")
    sp.add_argument("--quad-points", type=int, default=32)
    sp.add_argument("--freq-step", type=float, default=1e-3)
    sp.add_argument("--synthetic", choices=["exp", "none"], default="none")
    sp.add_argument("--cutoff-n", type=int, default=64)
    sp.add_argument("--bernoulli-terms", type=int, default=12)
    _add_common(sp)
    sp.set_defaults(fn=cmd_tauber)

    sp = sub.add_parser("pnt", help="convergence tables and the identity gaps")
    sp.add_argument("--limit", type=float, required=True)
    sp.add_argument("--checkpoints", required=True)
    _add_common(sp)
    sp.set_defaults(fn=cmd_pnt)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.fn(args)
    except (ConfigError, SieveRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NearZeroError, ArithmeticError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
