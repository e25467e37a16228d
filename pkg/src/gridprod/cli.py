"""Command-line entry point.

Every command resolves its parameters from three layers: built-in defaults,
an optional ``key=value`` config file, and explicit flags (highest).  The
resolved config, minus ``workers`` and ``output``, is hashed; the hash and the
package version are embedded in every output so a ledger can be traced back
to the run that produced it.

Exit codes: 0 success, 1 a check or floor failed, 2 invalid config,
3 precision failure, 4 refused computation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from . import diophantine as dio
from . import dynamics as dyn
from . import homspace as hs
from . import invariants
from .algebraic import Q, RatInterval
from .errors import FieldError, GridprodError, PrecisionError, RefusedError
from .numberfield import (
    EmbeddedReal,
    dump_descriptor,
    find_units,
    load_descriptor,
    make_field,
    norm,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_PRECISION = 3
EXIT_REFUSED = 4

CACHE_ENV = "GRIDPROD_CACHE_DIR"

# per-command defaults; keys double as the set of accepted config keys
DEFAULTS: dict[str, dict] = {
    "field": {"poly": None, "unit_height": 10, "exponent_bound": 5, "digits": 30},
    "orbit": {"poly": None, "field": None, "unit_height": 10, "basis": "1,theta,theta2", "tolerance": "1/100000000",
              "independence_bound": 0},
    "scan": {"kind": "pair", "poly": None, "field": None, "unit_height": 10, "embedding": 1, "alphas": None,
             "gammas": None, "N": 1000000, "drift": "1/1000000000"},
    "mu": {"lattice": "Z3", "mode": "sample", "k": 8, "R": "5", "m_max": 2, "poly": None, "field": None,
           "unit_height": 10, "basis": None},
    "products": {"lattice": "Z3", "shift": None, "R": "3"},
    "floor": {"poly": "-1,-1,1", "field": None, "unit_height": 10, "embedding": 2, "alpha": "theta", "ratios": "1,2",
              "N": 1000000, "max_den": 4},
    "factor": {"matrix": None, "poly": None, "field": None, "unit_height": 10, "vector": None, "embedding": 1},
    "check": {},
}
COMMON = {"format": None, "seed": 0, "workers": 1, "output": None}
UNHASHED = ("workers", "output")
DEFAULT_FORMAT = {"scan": "csv", "products": "csv"}


class ConfigError(ValueError):
    """A parameter is missing, unknown, or malformed."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_rational(text: str) -> Fraction:
    text = str(text).strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        raise ConfigError(f"expected a rational 'p/q', got {text!r}")
    return Fraction(text)


def parse_rationals(text: str) -> list[Fraction]:
    return [parse_rational(t) for t in str(text).split(",") if t.strip()]


def parse_poly(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"poly must be comma-separated integers (constant term first), got {text!r}") from None


def parse_matrix(text: str) -> tuple:
    rows = [parse_rationals(r) for r in str(text).split(";")]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ConfigError(f"matrix must be square, rows separated by ';': {text!r}")
    return tuple(tuple(r) for r in rows)


class MpReal:
    """A named real constant, enclosed on demand with mpmath."""

    _TOKENS = {"pi": lambda: mpmath.pi, "e": lambda: mpmath.e}

    def __init__(self, token: str):
        m = re.fullmatch(r"sqrt\((\d+)\)", token)
        if m:
            n = int(m.group(1))
            self._value = lambda: mpmath.sqrt(n)
        elif token in self._TOKENS:
            self._value = self._TOKENS[token]
        else:
            raise ConfigError(f"unknown real constant {token!r}")
        self.token = token

    def enclosure(self, eps) -> RatInterval:
        eps = Q(eps)
        bits = max(64, eps.denominator.bit_length() - eps.numerator.bit_length() + 16)
        with mpmath.workprec(bits + 32):
            x = self._value()
            scale = 1 << (bits + 2)
            k = int(mpmath.floor(x * scale))
        return RatInterval(Fraction(k - 1, scale), Fraction(k + 2, scale))

    def __repr__(self):
        return f"MpReal({self.token!r})"


def parse_real(token: str, K=None, embedding: int = 1):
    """``theta``, ``thetaK`` (K-th power), ``p/q``, ``sqrt(n)``, ``pi`` or ``e``."""
    token = token.strip()
    m = re.fullmatch(r"theta(\d*)", token)
    if m:
        if K is None:
            raise ConfigError(f"{token!r} needs a field (--poly or --field)")
        if not 1 <= embedding <= K.degree:
            raise ConfigError(f"embedding must be in 1..{K.degree}")
        power = int(m.group(1) or 1)
        x = K.one()
        for _ in range(power):
            x = x * K.gen()
        return EmbeddedReal(x, embedding)
    if re.fullmatch(r"[+-]?\d+(/\d+)?", token):
        return Fraction(token)
    return MpReal(token)


def parse_element(token: str, K):
    token = token.strip()
    m = re.fullmatch(r"theta(\d*)", token)
    if m:
        power = int(m.group(1) or 1)
        x = K.one()
        for _ in range(power):
            x = x * K.gen()
        return x
    return K.one() * parse_rational(token)


# ---------------------------------------------------------------------------
# config


def read_config_file(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        v = v.strip('"').strip("'")
        out[k.replace("-", "_")] = v
    return out


def resolve(command: str, flags: dict, config_path: str | None) -> dict:
    cfg = dict(DEFAULTS[command])
    cfg.update(COMMON)
    if config_path:
        for k, v in read_config_file(config_path).items():
            if k == "command":
                continue
            if k not in cfg:
                raise ConfigError(f"unknown config key {k!r} for {command}")
            cfg[k] = v
    cfg.update(flags)
    if cfg["format"] is None:
        cfg["format"] = DEFAULT_FORMAT.get(command, "json")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    for key in ("workers", "seed"):
        cfg[key] = _as_int(cfg, key)
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    cfg["command"] = command
    return cfg


def _as_int(cfg: dict, key: str) -> int:
    try:
        return int(cfg[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}") from None


def config_hash(cfg: dict) -> str:
    canon = {k: (None if v is None else str(v)) for k, v in cfg.items() if k not in UNHASHED}
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _stamp(cfg: dict) -> dict:
    return {"config_hash": config_hash(cfg), "version": __version__}


# ---------------------------------------------------------------------------
# output


def _emit(text: str, cfg: dict) -> None:
    out = cfg.get("output")
    if not out:
        sys.stdout.write(text)
        return
    _atomic_write(Path(out), text)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _q(x) -> str:
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _decimal(iv: RatInterval, digits: int = 30) -> dict:
    """Decimal midpoint with the enclosure radius as an explicit precision tag."""
    with mpmath.workdps(digits + 10):
        mid = mpmath.mpf(iv.mid.numerator) / iv.mid.denominator
        rad = mpmath.mpf((iv.width / 2).numerator) / (iv.width / 2).denominator
        return {"value": mpmath.nstr(mid, digits, strip_zeros=False), "radius": mpmath.nstr(rad, 3)}


def _interval(iv) -> list:
    if isinstance(iv, RatInterval):
        return [repr(float(iv.lo)), repr(float(iv.hi))]
    return [_q(iv), _q(iv)]


def _kv_csv(rows: list[tuple], cfg: dict) -> str:
    meta = _stamp(cfg)
    lines = ["# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())), "key,value"]
    for k, v in rows:
        lines.append(f"{k},{v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# fields and unit cache


def _cache_path(poly: list[int], height: int) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    key = hashlib.sha256(f"{','.join(map(str, poly))}|{height}".encode()).hexdigest()[:16]
    return Path(root) / f"units-{key}.json"


def units_for(poly: list[int], height: int, workers: int = 1):
    """Find units of the field of ``poly``, reusing the cache keyed by poly and height."""
    path = _cache_path(poly, height)
    if path is not None and path.exists():
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("poly") == poly and data.get("height") == height:
            return load_descriptor(data)
    K = make_field(poly)
    units = find_units(K, height, workers=workers)
    if path is not None:
        _atomic_write(path, dump_descriptor(units))
    return units


def _field_units(cfg: dict):
    if cfg.get("field"):
        try:
            data = json.loads(Path(cfg["field"]).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read field file: {exc}") from None
        return load_descriptor(data)
    if cfg.get("poly"):
        return units_for(parse_poly(cfg["poly"]), _as_int(cfg, "unit_height"), cfg["workers"])
    raise ConfigError("need --poly or --field")


# ---------------------------------------------------------------------------
# commands


def cmd_field(cfg: dict) -> int:
    if not cfg.get("poly"):
        raise ConfigError("field needs --poly")
    poly = parse_poly(cfg["poly"])
    height = _as_int(cfg, "unit_height")
    digits = _as_int(cfg, "digits")
    units = units_for(poly, height, cfg["workers"])
    K = units.field
    eps = Fraction(1, 10 ** digits)
    extra = {
        "roots": [_decimal(r.enclosure(eps), digits) for r in K.roots],
        "discriminant": _q(K.discriminant),
        "norm_theta": _q(norm(K.gen())),
        "entry_sums": [_interval(s) for s in units.entry_sums()],
        **_stamp(cfg),
    }
    if cfg["format"] == "json":
        _emit(dump_descriptor(units, extra), cfg)
    else:
        rows = [("poly", ";".join(map(str, poly))), ("rank", units.rank), ("units", len(units.units))]
        rows += [(f"unit{i}", ";".join(_q(c) for c in u.coords)) for i, u in enumerate(units.units)]
        _emit(_kv_csv(rows, cfg), cfg)
    return EXIT_OK


def cmd_orbit(cfg: dict) -> int:
    units = _field_units(cfg)
    K = units.field
    basis = [parse_element(t, K) for t in str(cfg["basis"]).split(",")][: K.degree]
    if len(basis) != K.degree:
        raise ConfigError(f"basis needs {K.degree} elements")
    x0, stab = dyn.compact_orbit_lattice(K, basis, units, tolerance=parse_rational(cfg["tolerance"]))
    checks = [
        {
            "unit": [_q(c) for c in chk.unit.coords],
            "exact": [[_q(x) for x in row] for row in chk.exact],
            "max_width": repr(float(chk.max_width)),
            "contains": chk.contains,
        }
        for chk in stab.verification
    ]
    out = {
        "poly": list(K.poly.coeffs),
        "basis": [[_q(c) for c in b.coords] for b in basis],
        "stabilizer_rank": stab.rank,
        "covolume": _interval(stab.index_note),
        "checks": checks,
        **_stamp(cfg),
    }
    bound = _as_int(cfg, "independence_bound")
    if bound > 0:
        rep = dyn.independence_check(stab, dyn.Root.pair(1, 2), bound)
        out["independence"] = {"status": rep.status, "coeff_bound": rep.coeff_bound,
                               "smallest": None if rep.smallest is None else _interval(rep.smallest)}
    ok = all(c["contains"] for c in checks)
    if cfg["format"] == "json":
        _emit(_json(out), cfg)
    else:
        rows = [("stabilizer_rank", stab.rank)]
        rows += [(f"check{i}", f"{c['contains']};{c['max_width']}") for i, c in enumerate(checks)]
        _emit(_kv_csv(rows, cfg), cfg)
    return EXIT_OK if ok else EXIT_FAILED


_KINDS = {"pair": "pair_product", "weighted": "weighted_products", "linear": "linear_form"}


def _target_field(cfg: dict):
    needs_field = any(re.match(r"\s*theta", t) for t in str(cfg.get("alphas") or "").split(","))
    needs_field |= any(re.match(r"\s*theta", t) for t in str(cfg.get("gammas") or "").split(","))
    if not needs_field:
        return None
    if cfg.get("field"):
        return _field_units(cfg).field
    if cfg.get("poly"):
        return make_field(parse_poly(cfg["poly"]))
    raise ConfigError("theta targets need --poly or --field")


def cmd_scan(cfg: dict) -> int:
    kind = _KINDS.get(str(cfg["kind"]))
    if kind is None:
        raise ConfigError(f"kind must be one of {sorted(_KINDS)}")
    if not cfg.get("alphas") or not cfg.get("gammas"):
        raise ConfigError("scan needs --alphas and --gammas")
    N = _as_int(cfg, "N")
    if N < 1:
        raise ConfigError("N must be >= 1")
    K = _target_field(cfg)
    emb = _as_int(cfg, "embedding")
    alphas = tuple(parse_real(t, K, emb) for t in str(cfg["alphas"]).split(","))
    gammas = tuple(parse_real(t, K, emb) for t in str(cfg["gammas"]).split(","))
    try:
        spec = dio.TargetSpec(alphas, gammas, kind)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    policy = dio.PrecisionPolicy(drift=parse_rational(cfg["drift"]))
    if kind == "linear_form":
        res = dio.scan_linear_form(spec, N, policy=policy, workers=cfg["workers"])
    else:
        res = dio.scan_products(spec, N, policy=policy, workers=cfg["workers"])
    if cfg["format"] == "csv":
        _emit(res.to_csv(_stamp(cfg)), cfg)
    else:
        _emit(_json({**res.summary(), **_stamp(cfg)}), cfg)
    return EXIT_OK


def _lattice(cfg: dict) -> hs.Lattice:
    name = str(cfg["lattice"])
    m = re.fullmatch(r"Z(\d+)", name)
    if m:
        d = int(m.group(1))
        if not 1 <= d <= 3:
            raise ConfigError("integer lattices Z1..Z3 are supported")
        return hs.integer_lattice(d)
    if name == "field":
        units = _field_units(cfg)
        K = units.field
        tokens = cfg.get("basis") or ",".join(["1", "theta", "theta2"][: K.degree])
        basis = [parse_element(t, K) for t in str(tokens).split(",")]
        return hs.compact_lattice(K, basis, units)
    if ";" in name:
        return hs.from_matrix(parse_matrix(name))
    raise ConfigError(f"lattice must be Z1..Z3, 'field', or a ';'-separated matrix, got {name!r}")


def cmd_mu(cfg: dict) -> int:
    x = _lattice(cfg)
    mode = str(cfg["mode"])
    if mode not in ("sample", "certified_rational"):
        raise ConfigError("mode must be sample or certified_rational")
    res = hs.mu_estimate(x, mode, k=_as_int(cfg, "k"), R=parse_rational(cfg["R"]), m_max=_as_int(cfg, "m_max"),
                         workers=cfg["workers"])
    if cfg["format"] == "json":
        _emit(res.ledger_json(_stamp(cfg)), cfg)
    else:
        rows = [("mode", res.mode), ("label", res.label), ("value", hs._fmt(res.value))]
        _emit(_kv_csv(rows, cfg), cfg)
    return EXIT_OK


def cmd_products(cfg: dict) -> int:
    x = _lattice(cfg)
    shift = parse_rationals(cfg["shift"]) if cfg.get("shift") else [Fraction(0)] * x.dim
    if len(shift) != x.dim:
        raise ConfigError(f"shift needs {x.dim} entries")
    sample = hs.product_scan(hs.grid(x, shift), parse_rational(cfg["R"]))
    if cfg["format"] == "csv":
        _emit(hs.product_csv(sample, _stamp(cfg)), cfg)
    else:
        out = {
            "radius": _q(sample.radius),
            "points": len(sample.entries),
            "min_abs": None if sample.min_abs is None else hs._fmt(sample.min_abs),
            "witness": None if sample.witness is None else [hs._fmt(w) for w in sample.witness],
            **_stamp(cfg),
        }
        _emit(_json(out), cfg)
    return EXIT_OK


def cmd_floor(cfg: dict) -> int:
    units = _field_units(cfg)
    K = units.field
    if K.degree != 2:
        raise ConfigError("floor construction needs a quadratic field")
    emb = _as_int(cfg, "embedding")
    alpha = parse_real(str(cfg["alpha"]), K, emb)
    if not isinstance(alpha, EmbeddedReal):
        raise ConfigError("alpha must be a field element such as theta")
    ratios = parse_rationals(cfg["ratios"])
    cert = dio.floor_construction(alpha, ratios, units, max_den=_as_int(cfg, "max_den"))
    N = _as_int(cfg, "N")
    status = EXIT_OK
    try:
        fs = dio.floor_scan(alpha, ratios, cert.gammas, N, certificate=cert, workers=cfg["workers"])
        scan_out = fs.summary()
        ledger = fs.scan
    except dio.FloorViolation as exc:
        scan_out = {"violation": str(exc)}
        ledger = None
        status = EXIT_FAILED
    if cfg["format"] == "csv" and ledger is not None:
        header = {**_stamp(cfg), "floor": _q(cert.floor)}
        _emit(ledger.to_csv(header), cfg)
    else:
        _emit(_json({"certificate": cert.summary(), "scan": scan_out, **_stamp(cfg)}), cfg)
    return status


def cmd_factor(cfg: dict) -> int:
    if cfg.get("matrix"):
        p = parse_matrix(cfg["matrix"])
        t0, b1, b2 = dyn.factor_shrinking(p)
        out = {
            "t0": _q(t0),
            "b1": [[_q(x) for x in r] for r in b1],
            "b2": [[_q(x) for x in r] for r in b2],
        }
    elif cfg.get("vector"):
        units = _field_units(cfg)
        K = units.field
        if K.degree != 3:
            raise ConfigError("conjugator demo needs a cubic field")
        emb = _as_int(cfg, "embedding")
        vector = [parse_real(t, K, emb) for t in str(cfg["vector"]).split(",")]
        if len(vector) != 2:
            raise ConfigError("vector needs two entries")
        basis = [K.one(), K.gen(), K.gen() * K.gen()]
        x0, _ = dyn.compact_orbit_lattice(K, basis, units)
        rep = dyn.solve_conjugator(x0.basis, vector)
        out = {
            "conjugator": [[_interval(x) for x in r] for r in rep.matrix],
            "tau_nonzero": rep.tau_nonzero,
            "mu_nonzero": rep.mu_nonzero,
            "admissible": rep.admissible,
            "flags": list(rep.flags),
        }
    else:
        raise ConfigError("factor needs --matrix or --vector")
    out.update(_stamp(cfg))
    if cfg["format"] == "json":
        _emit(_json(out), cfg)
    else:
        _emit(_kv_csv([(k, json.dumps(v, separators=(";", ":"))) for k, v in sorted(out.items())
                       if k not in ("config_hash", "version")], cfg), cfg)
    return EXIT_OK


def cmd_check(cfg: dict) -> int:
    results = invariants.run_all(cfg["seed"])
    ok = all(r[1] for r in results)
    if cfg["format"] == "json":
        out = {"checks": [{"name": n, "passed": p, "detail": d} for n, p, d in results], "passed": ok, **_stamp(cfg)}
        _emit(_json(out), cfg)
    else:
        _emit(_kv_csv([(n, f"{'pass' if p else 'FAIL'} {d}") for n, p, d in results], cfg), cfg)
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {
    "field": cmd_field,
    "orbit": cmd_orbit,
    "scan": cmd_scan,
    "mu": cmd_mu,
    "products": cmd_products,
    "floor": cmd_floor,
    "factor": cmd_factor,
    "check": cmd_check,
}


# ---------------------------------------------------------------------------
# argparse


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--seed", type=int, help="seed for sampled checks")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="gridprod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gridprod {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, argument_default=argparse.SUPPRESS)

    field_src = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    field_src.add_argument("--poly", help="integer coefficients, constant term first, e.g. -1,-3,0,1")
    field_src.add_argument("--field", help="unit descriptor JSON written by the field command")
    field_src.add_argument("--unit-height", dest="unit_height", type=int)

    p = add("field", "isolate roots, find units, write a unit descriptor")
    p.add_argument("--poly")
    p.add_argument("--unit-height", dest="unit_height", type=int)
    p.add_argument("--exponent-bound", dest="exponent_bound", type=int)
    p.add_argument("--digits", type=int, help="decimal digits for root enclosures")

    p = sub.add_parser("orbit", parents=[common, field_src], help="compact orbit lattice and stabilizer checks",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--basis", help="comma-separated elements: p/q, theta, thetaK")
    p.add_argument("--tolerance")
    p.add_argument("--independence-bound", dest="independence_bound", type=int)

    p = sub.add_parser("scan", parents=[common, field_src], help="record ledger of a Diophantine scan",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--kind", choices=sorted(_KINDS))
    p.add_argument("--alphas")
    p.add_argument("--gammas")
    p.add_argument("--N", type=int)
    p.add_argument("--embedding", type=int, help="real embedding index for theta tokens")
    p.add_argument("--drift", help="bound on N times the target width, as p/q")

    p = sub.add_parser("mu", parents=[common, field_src], help="inhomogeneous minimum estimate",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--lattice", help="Z1..Z3, 'field', or rows 'a,b;c,d'")
    p.add_argument("--mode", choices=("sample", "certified_rational"))
    p.add_argument("--k", type=int)
    p.add_argument("--R")
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--basis")

    p = add("products", "products over grid points in a box")
    p.add_argument("--lattice")
    p.add_argument("--shift", help="comma-separated rationals")
    p.add_argument("--R")

    p = sub.add_parser("floor", parents=[common, field_src], help="positive floor construction and scan",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--alpha")
    p.add_argument("--embedding", type=int)
    p.add_argument("--ratios", help="comma-separated nonzero rationals scaling alpha")
    p.add_argument("--N", type=int)
    p.add_argument("--max-den", dest="max_den", type=int)

    p = sub.add_parser("factor", parents=[common, field_src], help="shrinking factorization or conjugator demo",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--matrix", help="3x3 rows 'a,b,c;d,e,f;g,h,i'")
    p.add_argument("--vector", help="two reals, e.g. theta,theta2")
    p.add_argument("--embedding", type=int)

    add("check", "run the exact invariant suite")
    return parser


_NEGATIVE_LIST = re.compile(r"-\d[\d,/;\-]*")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--poly -1,-3,0,1`` into ``--poly=-1,-3,0,1`` so argparse accepts it."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_LIST.fullmatch(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = vars(parser.parse_args(_join_negative_values(argv)))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        cfg = resolve(command, args, config_path)
        return COMMANDS[command](cfg)
    except (ConfigError, FieldError, OSError) as exc:
        print(f"gridprod: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PrecisionError as exc:
        print(f"gridprod: precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except RefusedError as exc:
        print(f"gridprod: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (GridprodError, ValueError) as exc:
        print(f"gridprod: invalid request: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
