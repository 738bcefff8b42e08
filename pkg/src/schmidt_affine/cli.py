"""Command-line front end.

    schmidt-affine MODE [--config FILE] [--out DIR] [--seed N] [--precision BITS]
                        [--replay FILE] [--set key=value ...]

Every run prints one summary line of ``key=value`` pairs and writes its
artifacts under ``--out``. A referee violation or a failed verification
exits with status 1. Configuration errors exit with status 2.
"""

import argparse
import os
import sys

from . import io
from . import scalar as sc
from .black import BlackSpec, make_black
from .config import MODES, RunConfig, apply_settings, load_config
from .diophantine import AffineSystem, badness_scan, dani_cross_check, trajectory_minima
from .exceptions import ConfigError, InvalidTranscript, SchmidtAffineError
from .fractal import verify_absolute_decay
from .game import Ball, GameParams, RandomStrategy, RecenterStrategy, run_game, validate_transcript
from .lattice import FlowSchedule, apply_flow, enumerate_small_hyperplanes, system_lattice
from .white import BadAStrategy, BadBStrategy, alpha_for, badInf_verify, ledger_check

OK, FAILED, BAD_CONFIG = 0, 1, 2


def _fmt(x):
    """Short rationals as ``p/q``, everything else as a 6-digit float."""
    if sc.is_exact(x) and sc.to_scalar(x).denominator < 10 ** 6:
        return sc.format_scalar(x)
    return f"{sc.to_float(x):.6g}"


def summary(mode, **kv):
    parts = [f"mode={mode}"] + [f"{k}={v}" for k, v in kv.items()]
    return " ".join(parts)


def _provenance(cfg):
    return {"precision": sc.get_precision(), "constants": cfg.constants, "seed": cfg.seed}


# --- modes ---------------------------------------------------------------


def run_scan(cfg, out):
    S = AffineSystem(cfg.matrix(), cfg.vector_b())
    est = badness_scan(S, cfg.Q)
    doc = io.badness_to_dict(est)
    doc["provenance"] = _provenance(cfg)
    io.write_json(doc, os.path.join(out, "badness.json"))
    line = summary("scan-badness", Q=cfg.Q, min_product=_fmt(est.min_product),
                   tail_minimum=_fmt(est.tail_minimum()), argmin_q=",".join(map(str, est.argmin_q)))
    return OK, line


def _schedule(cfg):
    u = cfg.scalar("u")
    try:
        return FlowSchedule(cfg.m, cfg.n, u)
    except ValueError as exc:
        raise ConfigError("u", str(exc)) from exc


def run_trajectory(cfg, out):
    S = AffineSystem(cfg.matrix(), cfg.vector_b())
    F = _schedule(cfg)
    homogeneous = S.b_is_integral()
    traj = trajectory_minima(S, F, cfg.L, exclude_origin=homogeneous)
    io.write_trajectory_csv(traj, os.path.join(out, "trajectory.csv"))
    rep = dani_cross_check(S, F, cfg.L, min(cfg.Q, 10 ** 5), trajectory=traj)
    io.write_json({"dani": {"verdict": rep.verdict, "min_product": sc.format_scalar(rep.min_product),
                            "trajectory_infimum": sc.format_scalar(rep.trajectory_infimum),
                            "scale_factor": sc.format_scalar(rep.scale_factor), "notes": rep.notes},
                   "trend": traj.trend, "provenance": _provenance(cfg)},
                  os.path.join(out, "dani.json"))
    line = summary("trajectory", L=cfg.L, u=sc.format_scalar(F.u), infimum=_fmt(traj.infimum),
                   trend=traj.trend, dani=rep.verdict)
    return (OK if rep.passed else FAILED), line


def run_hyperplanes(cfg, out):
    A = cfg.matrix()
    F = _schedule(cfg)
    X = system_lattice(A).lattice
    steps = []
    for ell in range(cfg.L + 1):
        hs = enumerate_small_hyperplanes(apply_flow(F, ell, X))
        steps.append({"ell": ell, "hyperplanes": [
            {"dual_vector": sc.format_vector(h.dual_vector), "covolume_sq": sc.format_scalar(h.covolume_sq)}
            for h in hs]})
    io.write_json({"steps": steps, "provenance": _provenance(cfg)}, os.path.join(out, "hyperplanes.json"))
    counts = [len(s["hyperplanes"]) for s in steps]
    line = summary("hyperplanes", L=cfg.L, max_small=max(counts), total=sum(counts))
    return OK, line


def run_decay(cfg, out):
    K = cfg.support_spec(cfg.m if cfg.support == "box" else (2 if cfg.support == "sierpinski" else 1))
    decay = cfg.decay(K)
    rep = verify_absolute_decay(K, decay, cfg.trials, seed=cfg.seed)
    io.write_json({"verdict": rep.verdict, "C": sc.format_scalar(rep.C), "eta": sc.format_scalar(rep.eta),
                   "trials": rep.trials, "max_ratio": rep.max_ratio,
                   "counterexample": io._fmt(rep.counterexample), "support": K.to_dict(),
                   "provenance": _provenance(cfg)}, os.path.join(out, "decay.json"))
    line = summary("verify-decay", support=cfg.support, trials=cfg.trials, max_ratio=f"{rep.max_ratio:.6g}",
                   verdict=rep.verdict)
    return (OK if rep.passed else FAILED), line


def build_game(cfg):
    """``(params, white, black, fixed)`` for ``mode = play``."""
    m, n = cfg.m, cfg.n
    matrix_space = cfg.strategy == "badB"
    dim = m * n if matrix_space else m
    K = cfg.support_spec(dim)
    decay = cfg.decay(K)
    if cfg.alpha == "auto":
        alpha = alpha_for(decay, 1) / 2 if matrix_space else alpha_for(decay, m + n)
    else:
        alpha = cfg.scalar("alpha")
    beta = cfg.scalar("beta")
    if cfg.initial_center is None:
        lo, hi = K.hull()
        center = [(a + b) / 2 for a, b in zip(lo, hi)]
    else:
        center = sc.parse_vector(cfg.initial_center.split(","))
    B1 = Ball(center, cfg.scalar("initial_radius"))
    params = GameParams(alpha, beta, cfg.rounds, K, B1, decay, m, n)
    fixed, context = {}, {}
    if matrix_space:
        b = cfg.vector_b()
        fixed["b"] = b
        context = {"b": tuple(b), "m": m, "n": n}
        white = BadBStrategy(b, m, n, cfg.stride)
    elif cfg.strategy in ("badA", "badInf"):
        A = cfg.matrix()
        fixed["A"] = A
        context = {"A": A}
        white = BadAStrategy(A, cfg.white_mode, cfg.lookahead)
    elif cfg.strategy == "random":
        white = RandomStrategy()
    else:
        white = RecenterStrategy()
    try:
        spec = BlackSpec.parse(cfg.black)
    except ValueError as exc:
        raise ConfigError("black", str(exc)) from exc
    if spec.variant == "replay":
        path = cfg.black.partition(":")[2]
        spec = BlackSpec("replay", transcript=io.load_transcript(path))
    return params, white, make_black(spec, context), fixed


def run_play(cfg, out):
    params, white, black, fixed = build_game(cfg)
    T = run_game(params, white, black, seed=cfg.seed, fixed=fixed)
    status, info = OK, {"valid": str(T.valid).lower(), "rounds": cfg.rounds}
    if not T.valid:
        player, rule, idx = T.violation
        info["violation"] = f"{player}:{rule.value}@{idx}"
        status = FAILED
    else:
        info["limit_center"] = ",".join(_fmt(x) for x in T.limit_center)
        info["radius_bound"] = _fmt(T.limit_radius_bound)
        if isinstance(white, BadAStrategy):
            fails = ledger_check(white.state, T.limit_center, white.state.step_of(white.state.J))
            T.extra["ledger_failures"] = len(fails)
            info["ledger"] = "ok" if not fails else f"{len(fails)}-failures"
            if fails:
                status = FAILED
            if T.extra.get("c0") is not None:
                info["c0"] = _fmt(sc.parse_scalar(T.extra["c0"]))
            if cfg.strategy == "badInf":
                g = badInf_verify(fixed["A"], T.limit_center, _schedule(cfg), cfg.L, min(cfg.Q, 2 ** 14))
                T.extra["badInf"] = {"verdict": g.verdict,
                                     "covolumes": [[s, sc.format_scalar(c)] for s, c in g.covolumes]}
                info["badInf"] = g.verdict
        if "A" in fixed or "b" in fixed:
            if isinstance(white, BadBStrategy):
                A_star = [[x for x in T.limit_center[i * cfg.n:(i + 1) * cfg.n]] for i in range(cfg.m)]
                est = badness_scan(AffineSystem(A_star, fixed["b"]), min(cfg.Q, 10 ** 4))
            else:
                est = badness_scan(AffineSystem(fixed["A"], T.limit_center), min(cfg.Q, 10 ** 5))
            info["min_product"] = _fmt(est.min_product)
            T.extra["min_product"] = sc.format_scalar(est.min_product)
    doc = io.transcript_to_dict(T)
    doc["provenance"] = _provenance(cfg)
    io.write_json(doc, os.path.join(out, "transcript.json"))
    return status, summary("play", strategy=cfg.strategy, black=cfg.black, **info)


def run_replay(path):
    try:
        T = io.load_transcript(path)
    except (OSError, ValueError) as exc:
        raise InvalidTranscript(f"cannot read {path}: {exc}") from exc
    problems = validate_transcript(T)
    line = summary("replay", file=os.path.basename(path), rounds=len(T.rounds), violations=len(problems))
    return (OK if not problems else FAILED), line


def run_demo(cfg, out):
    """Small end-to-end tour: one scan, one game, one decay check."""
    lines, status = [], OK
    steps = [
        (run_scan, dict(A="golden", b="0", Q=10 ** 4)),
        (run_play, dict(A="1/3", rounds=10, strategy="badA", alpha="auto", beta="1/4")),
        (run_decay, dict(support="cantor", trials=500)),
    ]
    for fn, settings in steps:
        sub = RunConfig(seed=cfg.seed, precision=cfg.precision)
        apply_settings(sub, settings.items(), "demo")
        code, line = fn(sub, out)
        status = max(status, code)
        lines.append(line)
    return status, "\n".join(lines)


RUNNERS = {"scan-badness": run_scan, "trajectory": run_trajectory, "hyperplanes": run_hyperplanes,
           "verify-decay": run_decay, "play": run_play, "demo": run_demo}


def parser():
    p = argparse.ArgumentParser(prog="schmidt-affine", description=__doc__.splitlines()[0])
    p.add_argument("mode", nargs="?", choices=MODES, help="what to run (default: demo)")
    p.add_argument("--config", help="INI file with run settings")
    p.add_argument("--out", default=".", help="directory for artifacts (default: current)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--precision", type=int, help="float-mode mantissa bits (default 128, min 100)")
    p.add_argument("--replay", metavar="FILE", help="re-validate a stored transcript and exit")
    p.add_argument("--set", dest="settings", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config setting (repeatable)")
    return p


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        if args.replay:
            status, line = run_replay(args.replay)
            print(line)
            return status
        cfg = RunConfig()
        if args.config:
            load_config(args.config, cfg)
        items = []
        for s in args.settings:
            key, eq, value = s.partition("=")
            if not eq:
                raise ConfigError(key, "overrides look like key=value")
            items.append((key.strip(), value.strip()))
        apply_settings(cfg, items, "--set")
        if args.mode:
            cfg.mode = args.mode
        if args.seed is not None:
            cfg.seed = args.seed
        if args.precision is not None:
            cfg.precision = args.precision
        cfg.validate()
        sc.set_precision(cfg.precision)
        os.makedirs(args.out, exist_ok=True)
        status, line = RUNNERS[cfg.mode](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return BAD_CONFIG
    except InvalidTranscript as exc:
        print(f"invalid transcript: {exc}", file=sys.stderr)
        return FAILED
    except SchmidtAffineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAILED
    print(line)
    return status


if __name__ == "__main__":
    sys.exit(main())
