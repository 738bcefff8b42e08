"""JSON and CSV artifacts.

Rationals are written as ``"p/q"`` strings and floats as bit-exact hex
strings, so every artifact round-trips exactly. JSON is emitted with sorted
keys and a fixed indent, which makes equal runs byte-identical.
"""

import csv
import json

from . import scalar as sc
from .exceptions import InvalidTranscript
from .fractal import DecayParams, SupportSpec
from .game import Ball, GameParams, Transcript, Violation


def _fmt(x):
    """Recursively format scalars inside lists and dicts."""
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if x is None or isinstance(x, (bool, str, float)):
        return x
    if isinstance(x, int):
        return x
    return sc.format_scalar(x)


def _parse_grid(x):
    if isinstance(x, list):
        return [_parse_grid(v) for v in x]
    return sc.parse_scalar(x)


def ball_to_dict(B):
    return {"center": sc.format_vector(B.center), "radius": sc.format_scalar(B.radius)}


def ball_from_dict(d):
    return Ball(sc.parse_vector(d["center"]), sc.parse_scalar(d["radius"]))


def params_to_dict(p):
    return {"m": p.m, "n": p.n, "alpha": sc.format_scalar(p.alpha), "beta": sc.format_scalar(p.beta),
            "rounds": p.rounds, "support": p.support.to_dict(), "initial": ball_to_dict(p.initial),
            "decay": p.decay.to_dict()}


def params_from_dict(d):
    decay = d.get("decay")
    if decay is not None:
        decay = DecayParams(sc.parse_scalar(decay["C"]), sc.parse_scalar(decay["eta"]),
                            sc.parse_scalar(decay.get("r0", "1")))
    return GameParams(sc.parse_scalar(d["alpha"]), sc.parse_scalar(d["beta"]), int(d["rounds"]),
                      SupportSpec.from_dict(d["support"]), ball_from_dict(d["initial"]), decay,
                      int(d.get("m", 1)), int(d.get("n", 1)))


def transcript_to_dict(T):
    v = None
    if T.violation is not None:
        player, rule, idx = T.violation
        v = {"player": player, "rule": rule.value, "round": idx}
    return {
        "params": params_to_dict(T.params),
        "fixed": _fmt(T.fixed),
        "rounds": [{"black": ball_to_dict(B), "white": None if W is None else ball_to_dict(W)}
                   for B, W in T.rounds],
        "result": {
            "limit_center": None if T.limit_center is None else sc.format_vector(T.limit_center),
            "limit_radius_bound": None if T.limit_radius_bound is None else sc.format_scalar(T.limit_radius_bound),
            "violation": v,
        },
        "extra": _fmt(T.extra),
    }


def transcript_from_dict(d):
    try:
        p = params_from_dict(d["params"])
        rounds = [(ball_from_dict(r["black"]), None if r["white"] is None else ball_from_dict(r["white"]))
                  for r in d["rounds"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTranscript(f"malformed transcript: {exc}") from exc
    res = d.get("result", {})
    T = Transcript(p, rounds, fixed={k: _parse_grid(v) for k, v in d.get("fixed", {}).items()},
                   extra=d.get("extra", {}))
    if res.get("limit_center") is not None:
        T.limit_center = tuple(sc.parse_vector(res["limit_center"]))
        T.limit_radius_bound = sc.parse_scalar(res["limit_radius_bound"])
    v = res.get("violation")
    if v:
        T.violation = (v["player"], Violation(v["rule"]), v["round"])
    return T


def badness_to_dict(est):
    return {
        "Q": est.Q,
        "min_product": sc.format_scalar(est.min_product),
        "min_product_float": sc.to_float(est.min_product),
        "argmin_q": list(est.argmin_q),
        "tail_minimum": sc.format_scalar(est.tail_minimum()),
        "window_minima": [{"lo": lo, "hi": hi, "minimum": sc.format_scalar(v), "argmin_q": list(q)}
                          for (lo, hi), v, q in est.window_minima],
    }


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_transcript(T, path):
    write_json(transcript_to_dict(T), path)


def load_transcript(path):
    return transcript_from_dict(read_json(path))


def write_trajectory_csv(report, path):
    """Columns ``ell, t, min_dist``; ``t`` and ``min_dist`` as decimal floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ell", "t", "min_dist"])
        for ell, t, d in report.minima:
            w.writerow([ell, repr(sc.to_float(t)), repr(sc.to_float(d))])


def read_trajectory_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [(int(r["ell"]), float(r["t"]), float(r["min_dist"])) for r in csv.DictReader(fh)]
