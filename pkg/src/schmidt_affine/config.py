"""Run configuration: flat keys grouped in INI sections.

Sections only organize the file; every key name is unique, so
``[game] rounds = 30`` and a command-line override ``rounds=30`` are the
same setting. Scalars are ``p/q`` or decimal strings; named constants such as
``golden`` and ``sqrt2`` switch to float mode. Matrices put rows after ``;`` and entries
after ``,``. IFS maps are ``ratio : offset`` items separated by ``;``.
"""

import configparser
from dataclasses import dataclass, field, fields

from . import scalar as sc
from .exceptions import ConfigError
from .fractal import DecayParams, SupportSpec, cantor, default_decay, sierpinski, unit_box

MODES = ("play", "scan-badness", "trajectory", "hyperplanes", "verify-decay", "demo")
WHITES = ("badA", "badB", "badInf", "trivial", "random")


@dataclass
class RunConfig:
    mode: str = "demo"
    m: int = 1
    n: int = 1
    A: str = None
    b: str = None
    alpha: str = "auto"
    beta: str = "1/4"
    u: str = "1/2"
    rounds: int = 30
    Q: int = 100000
    L: int = 40
    support: str = "box"
    bounds: str = None
    maps: str = None
    initial_center: str = None
    initial_radius: str = "1"
    strategy: str = "badA"
    white_mode: str = "auto"
    black: str = "targeting:toward-lattice-hit"
    lookahead: int = 20
    stride: int = 1
    base: str = "greedy"
    decay_C: str = None
    decay_eta: str = None
    trials: int = 10000
    seed: int = 0
    precision: int = 128
    constants: dict = field(default_factory=dict)

    # --- typed views -----------------------------------------------------

    def matrix(self):
        if self.A is None:
            raise ConfigError("A", "required for this mode")
        rows = [r for r in str(self.A).split(";") if r.strip()]
        try:
            out = [[self._scalar("A", x) for x in r.split(",")] for r in rows]
        except ValueError as exc:
            raise ConfigError("A", str(exc)) from exc
        if len(out) != self.m or any(len(r) != self.n for r in out):
            raise ConfigError("A", f"expected a {self.m} x {self.n} matrix")
        return out

    def vector_b(self):
        if self.b is None:
            return [sc.to_scalar(0)] * self.m
        try:
            out = [self._scalar("b", x) for x in str(self.b).split(",")]
        except ValueError as exc:
            raise ConfigError("b", str(exc)) from exc
        if len(out) != self.m:
            raise ConfigError("b", f"expected {self.m} entries")
        return out

    def _scalar(self, name, text):
        text = text.strip()
        v = sc.parse_scalar(text)
        if sc.is_float(v):
            self.constants.setdefault(name, {})[text] = sc.format_scalar(v)
        return v

    def scalar(self, name):
        try:
            return sc.to_scalar(sc.parse_scalar(getattr(self, name)))
        except ValueError as exc:
            raise ConfigError(name, str(exc)) from exc

    def support_spec(self, dim):
        kind = self.support
        if kind == "box":
            if self.bounds is None:
                return unit_box(dim)
            pairs = [p.split(",") for p in self.bounds.split(";") if p.strip()]
            K = SupportSpec.box([(sc.parse_scalar(lo), sc.parse_scalar(hi)) for lo, hi in pairs])
        elif kind == "cantor":
            K = cantor()
        elif kind == "sierpinski":
            K = sierpinski()
        elif kind == "ifs":
            if not self.maps:
                raise ConfigError("maps", "IFS support needs maps")
            maps = []
            for item in self.maps.split(";"):
                if not item.strip():
                    continue
                r, _, o = item.partition(":")
                maps.append((sc.parse_scalar(r), sc.parse_vector(o.split(","))))
            K = SupportSpec.ifs(maps)
        else:
            raise ConfigError("support", f"unknown support {kind!r} (box, cantor, sierpinski, ifs)")
        if K.dim != dim:
            raise ConfigError("support", f"support has dimension {K.dim}, the game needs {dim}")
        return K

    def decay(self, K):
        if self.decay_C is None and self.decay_eta is None:
            return default_decay(K)
        d = default_decay(K)
        C = self.scalar("decay_C") if self.decay_C is not None else d.C
        eta = self.scalar("decay_eta") if self.decay_eta is not None else d.eta
        return DecayParams(C, eta)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.strategy not in WHITES:
            raise ConfigError("strategy", f"unknown strategy {self.strategy!r}; choose from {', '.join(WHITES)}")
        if not 1 <= self.m <= 4 or not 1 <= self.n <= 4:
            raise ConfigError("m", "m and n must lie in 1..4")
        for name in ("rounds", "Q", "L", "trials", "lookahead"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be nonnegative")
        if self.base != "greedy":
            raise ConfigError("base", "only the greedy base strategy is available")
        if self.stride < 1:
            raise ConfigError("stride", "must be at least 1")
        if self.precision < 100:
            raise ConfigError("precision", "needs at least 100 bits")
        return self


_INT_FIELDS = {f.name for f in fields(RunConfig) if f.type is int or f.type == "int"}
_KNOWN = {f.name for f in fields(RunConfig)} - {"constants"}


def apply_settings(cfg, items, source):
    for key, value in items:
        if key not in _KNOWN:
            raise ConfigError(key, f"unknown setting in {source}")
        if key in _INT_FIELDS:
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(key, f"expected an integer, got {value!r}") from None
        setattr(cfg, key, value)
    return cfg


def load_config(path, cfg=None):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    cfg = cfg or RunConfig()
    seen = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            if key in seen and seen[key] != section:
                raise ConfigError(key, f"set in both [{seen[key]}] and [{section}]")
            seen[key] = section
            apply_settings(cfg, [(key, value)], path)
    return cfg


def dump_config(cfg):
    """Flat ``key = value`` text under one ``[run]`` section (defaults omitted)."""
    default = RunConfig()
    lines = ["[run]"]
    for f in fields(RunConfig):
        if f.name == "constants":
            continue
        v = getattr(cfg, f.name)
        if v != getattr(default, f.name):
            lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
