"""Command line front end.

Verbs: ``run``, ``check-identity``, ``validate-partition``, ``sweep-path``,
``oracle-suite`` and ``version``.

Exit codes: 0 success, 1 invalid input, 2 runtime error, 3 a check ran
and failed.  Every error prints a one-line reason.  Output files are
written to a temporary name and renamed, so a failed run leaves none.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .experiments import ConfigError, load_config, run_experiment
from .io import atomic_write_json, atomic_write_text
from .seeding import SeedStream

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3


class _Invalid(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise _Invalid(message)


def _count(text: str) -> int:
    """Trial counts like ``1000`` or ``1e6``."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"not a positive integer: {text!r}")
    return int(v)


def _partition(spec: str, n: int):
    from .partitions import band_partition, entries_partition, read_partition

    if spec == "entries":
        return entries_partition(n)
    if spec.startswith("band:"):
        return band_partition(n, int(spec.split(":", 1)[1]))
    p = read_partition(spec)
    if p.n != n:
        raise _Invalid(f"partition file has n={p.n}, expected {n}")
    return p


def _parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="eigenchaos", description="Eigenvector decorrelation experiments and checks.")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default: $EIGENCHAOS_THREADS or 1)")
    common = _ArgParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_ArgParser)

    r = sub.add_parser("run", parents=[common], help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--output", help="CSV path (overrides the config)")

    c = sub.add_parser("check-identity", parents=[common], help="Monte Carlo identity checks")
    c.add_argument("which", choices=["ou", "pdbr", "tk", "diffcov", "tpm", "mono"])
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--alpha", type=int, default=1)
    c.add_argument("--trials", type=_count, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tau", type=float, default=1.0)
    c.add_argument("--eta", type=float, default=1.0)
    c.add_argument("--t", type=float, default=0.4, help="time for tpm")
    c.add_argument("--kb", type=int, default=0, help="ring count of the probed block (diffcov)")
    c.add_argument("--block", type=int, default=0, help="0-based block id (diffcov)")
    c.add_argument("--times", default="0,0.1,0.2,0.4,0.8", help="time grid for mono")
    c.add_argument("--partition", default="entries", help="entries, band:W or a partition file")
    c.add_argument("--z-max", type=float, default=3.0)
    c.add_argument("--json", help="write the report here")

    v = sub.add_parser("validate-partition", parents=[common], help="check a partition file")
    v.add_argument("--file", required=True)

    s = sub.add_parser("sweep-path", parents=[common], help="spectrum along X(s) = (1-s) X + s Y")
    s.add_argument("--x", help="matrix file for X")
    s.add_argument("--y", help="matrix file for Y")
    s.add_argument("--n", type=int, help="draw a GOE X and resample one block instead")
    s.add_argument("--block", type=int, default=0, help="0-based block of the entries partition to resample")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=int, default=1)
    s.add_argument("--q", type=int, default=101)
    s.add_argument("--output", help="CSV path")

    o = sub.add_parser("oracle-suite", parents=[common], help="finite-difference and closed-form self-checks")
    o.add_argument("--seed", type=int, default=0)

    sub.add_parser("version", parents=[common], help="print code identity")
    return ap


def _report_out(args, payload: dict) -> None:
    if args.json:
        atomic_write_json(args.json, payload)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    res = run_experiment(cfg, args.threads)
    for row in res.rows:
        e = row.estimate
        print(f"{row.kind} n={row.n} alpha={row.alpha} {row.control_name}={row.control_value:.6g} "
              f"mean={e.mean:.6g} se={e.std_error:.3g}")
    if cfg.output:
        print(f"wrote {cfg.output}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from . import identities as idn

    rng = SeedStream(args.seed)
    w, thr = args.which, args.threads
    if w == "ou":
        rep = idn.ou_variance_identity_check(args.n, args.alpha, args.tau, trials=args.trials, rng=rng, threads=thr)
        ok = rep.passed(args.z_max)
        print(f"ou: lhs={rep.lhs.mean:.6g} rhs={rep.rhs.mean:.6g} z={rep.z_score:.3f} trials={rep.trials}")
        _report_out(args, rep.to_json())
    elif w in ("pdbr", "tk"):
        p = _partition(args.partition, args.n)
        an = idn.pdbr_analysis(args.n, p, args.alpha, args.trials, rng, threads=thr)
        if w == "pdbr":
            rep = an.identity_report()
            ok = rep.passed(args.z_max)
            print(f"pdbr: lhs={rep.lhs.mean:.6g} rhs={rep.rhs.mean:.6g} z={rep.z_score:.3f} trials={rep.trials}")
            _report_out(args, rep.to_json())
        else:
            lad = an.ladder()
            bad = lad.violations()
            ok = not bad
            print("tk: " + " ".join(f"T{k}={e.mean:.5g}" for k, e in enumerate(lad.T)) + f" Var={lad.variance.mean:.5g}")
            for b in bad:
                print(f"  violation: {b}")
            _report_out(args, {"T": [e.as_dict() for e in lad.T], "variance": lad.variance.as_dict(),
                               "violations": bad, "seed": args.seed, "trials": args.trials})
    elif w == "diffcov":
        p = _partition(args.partition, args.n)
        if not (0 <= args.block < p.m):
            raise _Invalid(f"block {args.block} outside [0, {p.m})")
        K = np.zeros(p.m, dtype=np.int64)
        K[args.block] = args.kb
        rep = idn.pdbou_diff_cov_mc(args.n, p, args.tau, K, args.block, args.trials, rng, threads=thr)
        ok = rep.passed(args.z_max)
        print(f"diffcov: mc={rep.lhs.mean:.6g} exact={rep.rhs.mean:.6g} z={rep.z_score:.3f}")
        _report_out(args, rep.to_json())
    elif w == "tpm":
        p = _partition(args.partition, args.n)
        tpm = idn.t_plus_minus(args.n, p, args.alpha, args.eta, args.tau, args.t, args.trials, rng, threads=thr)
        ok = tpm.in_range and tpm.dominance_holds() and tpm.min_probe_z() >= -2.0
        print(f"tpm: T+={tpm.T_plus.mean:.6g} T-={tpm.T_minus.mean:.6g} margin={tpm.margin.mean:.4g}"
              f"+-{tpm.margin.std_error:.2g} in_range={tpm.in_range} min_probe_z={tpm.min_probe_z():.3g}")
        _report_out(args, {"T_plus": tpm.T_plus.as_dict(), "T_minus": tpm.T_minus.as_dict(),
                           "margin": tpm.margin.as_dict(), "t_cap": tpm.t_cap, "seed": args.seed})
    else:
        times = [float(x) for x in args.times.split(",")]
        curve = idn.ou_overlap_monotonicity(args.n, args.alpha, args.tau, times, args.trials, rng, threads=thr)
        bad = curve.violations()
        ok = not bad
        print("mono: " + " ".join(f"m({t:g})={e.mean:.4f}" for t, e in zip(curve.times, curve.estimates)))
        _report_out(args, {"times": list(curve.times), "estimates": [e.as_dict() for e in curve.estimates],
                           "violations": [list(b) for b in bad], "seed": args.seed})
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_validate(args) -> int:
    from .partitions import parse_partition, validate_partition

    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise _Invalid(f"partition file not found: {args.file}")
    n, blocks = parse_partition(text, validate=False)
    bad = validate_partition((n, blocks))
    if bad is None:
        print(f"valid: n={n} m={len(blocks)}")
        return EXIT_OK
    print(f"invalid: {bad}")
    return EXIT_CHECK


def _cmd_sweep(args) -> int:
    from .matrix_core import Ensemble, NearDegenerateError, read_matrix
    from .partitions import entries_partition
    from .paths import PathGrid, path_spectrum_sweep

    if args.n is not None:
        gen = SeedStream(args.seed).generator()
        ens = Ensemble.goe(args.n)
        X = ens.sample(gen)
        p = entries_partition(args.n)
        if not (0 <= args.block < p.m):
            raise _Invalid(f"block {args.block} outside [0, {p.m})")
        Y = np.where(p.masks[args.block], ens.sample(gen), X)
    elif args.x and args.y:
        X, Y = read_matrix(args.x), read_matrix(args.y)
    else:
        raise _Invalid("give --x and --y, or --n")
    try:
        sw = path_spectrum_sweep(X, Y, PathGrid.uniform(args.q), args.alpha)
    except NearDegenerateError as exc:
        print(f"near-degenerate: {exc}")
        return EXIT_CHECK
    print(f"sup M={sw.sup_M:.6g} sup S={sw.sup_S:.6g} inf gap={sw.inf_delta:.6g}")
    if args.output:
        atomic_write_text(args.output, sw.to_csv())
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_oracles(args, hess_fn=None) -> int:
    from .oracles import oracle_suite

    rep = oracle_suite(args.seed) if hess_fn is None else oracle_suite(args.seed, hess_fn=hess_fn)
    print(rep.summary())
    return EXIT_OK if rep.passed else EXIT_CHECK


def _cmd_version(args) -> int:
    from .version import build_info

    info = build_info()
    print(f"eigenchaos {info['version']}")
    print(f"build {info['build_hash']}")
    print(f"requirements {info['requirements']}")
    return EXIT_OK


def main(argv=None, hess_fn=None) -> int:
    """Entry point.  ``hess_fn`` replaces the Hessian routine in the oracle suite."""
    try:
        args = _parser().parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise _Invalid("--threads must be at least 1")
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "check-identity":
            return _cmd_check(args)
        if args.verb == "validate-partition":
            return _cmd_validate(args)
        if args.verb == "sweep-path":
            return _cmd_sweep(args)
        if args.verb == "oracle-suite":
            return _cmd_oracles(args, hess_fn)
        return _cmd_version(args)
    except (_Invalid, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # malformed files and out-of-range parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
