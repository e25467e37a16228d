"""Running-minimum scans of ``|n| prod <n v_i - g_i>`` and ``|nm| <n a + m b - g>``.

``<x>`` is the distance from ``x`` to the nearest integer.  Scans run on 64-bit
fixed-point fractional parts (see :mod:`gridprod.kernels`); every reported
value carries an a-priori error bound, and the records near the final minimum
are recomputed with exact interval arithmetic.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import kernels
from .algebraic import Q, RatInterval, sqrt_interval
from .errors import GridprodError
from .homspace import exact_grid_min_compact
from .numberfield import EmbeddedReal, FieldElement, UnitSet, embed, real_enclosure

TWO64 = 1 << 64
REL_TOL = Fraction(1, 10 ** 6)


class FloorViolation(GridprodError):
    """A scan went below a certified floor."""


# ---------------------------------------------------------------------------
# targets and precision


@dataclass(frozen=True)
class TargetSpec:
    alphas: tuple
    gammas: tuple
    weights: str = "weighted_products"

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "gammas", tuple(self.gammas))
        if self.weights not in ("pair_product", "weighted_products", "linear_form"):
            raise ValueError(f"unknown weights {self.weights!r}")
        if self.weights == "linear_form":
            if len(self.alphas) != 2 or len(self.gammas) != 1:
                raise ValueError("linear_form needs two alphas and one gamma")
        else:
            if len(self.alphas) != len(self.gammas) or not self.alphas:
                raise ValueError("alphas and gammas must have equal positive length")
            if self.weights == "pair_product" and len(self.alphas) != 2:
                raise ValueError("pair_product needs exactly two alphas")


@dataclass(frozen=True)
class PrecisionPolicy:
    """Enclosure width of targets and the bound on accumulated drift ``N * eps``."""

    eps: Fraction = Fraction(1, 1 << 80)
    drift: Fraction = Fraction(1, 10 ** 9)
    verify_eps: Fraction = Fraction(1, 10 ** 30)
    max_escalations: int = 4


def _enclose(x, eps) -> RatInterval:
    return real_enclosure(x, eps)


def _fixed(x, eps) -> tuple[int, RatInterval, Fraction]:
    """Fixed-point word of frac(x), the enclosure used, and its error bound."""
    iv = _enclose(x, eps)
    mid = iv.mid
    frac = mid - math.floor(mid)
    word = math.floor(frac * TWO64) % TWO64
    err = iv.width / 2 + Fraction(1, TWO64)
    return word, iv, err


def _prepare(values, N: int, policy: PrecisionPolicy, log: list):
    eps = policy.eps
    for _ in range(policy.max_escalations + 1):
        fx = [_fixed(v, eps) for v in values]
        worst = max(f[2] for f in fx)
        if N * worst <= policy.drift:
            return fx
        if N * Fraction(1, TWO64) > policy.drift:
            log.append(f"N={N}: 64-bit fixed point cannot meet drift {float(policy.drift):.1e}")
            return fx
        eps = eps * eps
        log.append(f"N={N}: target width escalated to {float(eps):.3e}")
    log.append(f"N={N}: drift bound {float(N * worst):.3e} exceeds policy after escalation")
    return fx


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Record:
    N: int
    key: tuple
    value: float
    error_bound: float
    certified: bool = False
    interval: RatInterval | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ScanResult:
    kind: str
    N: int
    records: tuple
    precision_log: tuple = ()

    @property
    def running_min(self) -> list[tuple]:
        return [(r.N, r.value, r.key) for r in self.records]

    @property
    def minimum(self) -> Record:
        return self.records[-1]

    def min_at(self, N: int) -> Record:
        """The running minimum over keys ``<= N``."""
        best = None
        for r in self.records:
            if r.N > N:
                break
            best = r
        if best is None:
            raise ValueError(f"no record at or below N={N}")
        return best

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        meta = {"kind": self.kind, "N": self.N}
        if header:
            meta.update(header)
        buf.write("# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())) + "\n")
        wr = csv.writer(buf, lineterminator="\n")
        two = self.kind == "linear_form"
        wr.writerow(["N", "running_min", "witness_n"] + (["witness_m"] if two else []) + ["certified"])
        for r in self.records:
            wr.writerow([r.N, repr(r.value), *r.key, int(r.certified)])
        for line in self.precision_log:
            buf.write(f"# precision: {line}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        m = self.minimum
        return {
            "kind": self.kind,
            "N": self.N,
            "minimum": repr(m.value),
            "witness": list(m.key),
            "stabilization_N0": m.N,
            "certified": m.certified,
            "records": len(self.records),
            "precision_log": list(self.precision_log),
        }


# ---------------------------------------------------------------------------
# interval recomputation


def _dist_interval(y: RatInterval) -> RatInterval | None:
    k_lo = math.floor(y.lo + Fraction(1, 2))
    k_hi = math.floor(y.hi + Fraction(1, 2))
    if k_lo != k_hi:
        return None
    return abs(y - k_lo)


def _recompute(terms, weight: Fraction, policy: PrecisionPolicy) -> RatInterval | None:
    """``weight * prod <c . x - g>`` with x, g re-enclosed; escalates on ties."""
    eps = policy.verify_eps
    for _ in range(policy.max_escalations + 1):
        val = RatInterval.point(abs(weight))
        ok = True
        for coeffs, xs, g in terms:
            y = -_enclose(g, eps)
            for c, x in zip(coeffs, xs):
                y = y + _enclose(x, eps) * c
            dist = _dist_interval(y)
            if dist is None:
                ok = False
                break
            val = val * dist
        if ok and (val.hi == 0 or val.width <= REL_TOL * val.lo / 10):
            return val
        eps = eps * eps
    return val if ok else None


def _agrees(v: float, iv: RatInterval) -> bool:
    if iv.hi == 0:
        return v == 0
    fv = Fraction(v)
    return abs(fv - iv.mid) <= REL_TOL * iv.mid


def _certify(records: list[Record], recompute, policy: PrecisionPolicy, log: list) -> list[Record]:
    if not records:
        return records
    vmin = records[-1].value
    first = next(i for i, r in enumerate(records) if r.value <= 2 * vmin)
    lo = max(first - 1, 0)
    ivs = {}
    for i in range(lo, len(records)):
        iv = recompute(records[i])
        if iv is None:
            log.append(f"record {records[i].key}: interval recomputation undecided")
        ivs[i] = iv
    out = list(records[:first])
    for i in range(first, len(records)):
        r = records[i]
        iv = ivs.get(i)
        ok = iv is not None and _agrees(r.value, iv)
        if ok and iv.hi > 0 and iv.width > REL_TOL * iv.lo:
            ok = False
        # strict ordering against both neighbours in the ledger
        if ok and i - 1 >= lo:
            prev = ivs[i - 1]
            ok = prev is not None and prev.lo > iv.hi
        if ok and i + 1 < len(records):
            nxt = ivs[i + 1]
            ok = nxt is not None and nxt.hi < iv.lo
        if iv is not None and iv.hi == 0 and r.value <= r.error_bound:
            # an exact zero that fixed point rounded to a tiny positive value
            out.append(Record(r.N, r.key, 0.0, r.error_bound, True, iv))
            break
        if not ok and iv is not None:
            log.append(f"record {r.key}: not certified")
        out.append(Record(r.N, r.key, r.value, r.error_bound, bool(ok), iv))
    return out


def _error_bound(weight: float, dists: Sequence[float], errs: Sequence[float]) -> float:
    hi = weight
    lo = weight
    for d, e in zip(dists, errs):
        hi *= d + e
        lo *= d
    # relative float rounding of the product, generously
    return (hi - lo) + lo * 1e-14


# ---------------------------------------------------------------------------
# scans


def _frac_dist_float(n: int, word: int, g: int) -> float:
    x = (n * word - g) % TWO64
    return min(x, TWO64 - x) / TWO64


def scan_products(spec: TargetSpec, N: int, *, policy: PrecisionPolicy | None = None, workers: int = 1,
                  half_shift: bool = False) -> ScanResult:
    """Records of ``w(n) prod <n v_i - g_i>`` over ``1 <= |n| <= N`` (``w = |n|``),
    or over ``|n| <= N`` with ``w = |n + 1/2|`` when ``half_shift``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if spec.weights == "linear_form":
        raise ValueError("use scan_linear_form for linear_form targets")
    policy = policy or PrecisionPolicy()
    log: list[str] = []
    fa = _prepare(spec.alphas, N, policy, log)
    fg = _prepare(spec.gammas, 1, policy, log)
    A = [f[0] for f in fa]
    G = [f[0] for f in fg]
    raw = kernels.product_records(A, G, N, h2=1 if half_shift else 0, start=0 if half_shift else 1, workers=workers)
    records = []
    for n, v in raw:
        errs = [float(N * fa[i][2] + fg[i][2]) for i in range(len(A))]
        dists = [_frac_dist_float(n, A[i], G[i]) for i in range(len(A))]
        w = abs(n + 0.5) if half_shift else abs(n)
        records.append(Record(abs(n), (n,), v, _error_bound(w, dists, errs)))

    def recompute(r: Record):
        n = r.key[0]
        weight = Fraction(2 * n + 1, 2) if half_shift else Fraction(n)
        terms = [((n,), (a,), g) for a, g in zip(spec.alphas, spec.gammas)]
        return _recompute(terms, weight, policy)

    records = _certify(records, recompute, policy, log)
    kind = "floor" if half_shift else ("pair_product" if spec.weights == "pair_product" else "products")
    return ScanResult(kind, N, tuple(records), tuple(log))


def scan_linear_form(spec: TargetSpec, N: int, *, policy: PrecisionPolicy | None = None, workers: int = 1) -> ScanResult:
    """Records of ``|nm| <n a + m b - g>`` ordered by ``P = |nm| <= N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if spec.weights != "linear_form":
        raise ValueError("scan_linear_form needs linear_form targets")
    policy = policy or PrecisionPolicy()
    log: list[str] = []
    fa = _prepare(spec.alphas, N, policy, log)
    fg = _prepare(spec.gammas, 1, policy, log)
    A, B = fa[0][0], fa[1][0]
    G = fg[0][0]
    raw = kernels.linear_records(A, B, G, N, workers=workers)
    records = []
    for P, n, m, v in raw:
        x = (n * A + m * B - G) % TWO64
        dist = min(x, TWO64 - x) / TWO64
        err = float(abs(n) * fa[0][2] + abs(m) * fa[1][2] + fg[0][2])
        records.append(Record(P, (n, m), v, _error_bound(float(P), [dist], [err])))

    def recompute(r: Record):
        n, m = r.key
        return _recompute([((n, m), spec.alphas, spec.gammas[0])], Fraction(abs(n * m)), policy)

    records = _certify(records, recompute, policy, log)
    return ScanResult("linear_form", N, tuple(records), tuple(log))


# ---------------------------------------------------------------------------
# positive floors for rationally dependent targets


@dataclass(frozen=True)
class FloorComponent:
    ratio: Fraction
    shift: Fraction
    gamma: FieldElement
    min_norm: Fraction
    spread: RatInterval  # |sigma(q a) - sigma'(q a)|
    floor: Fraction


@dataclass(frozen=True)
class FloorCertificate:
    alpha: EmbeddedReal
    ratios: tuple
    common_den: int
    components: tuple
    rho: Fraction | None
    epsilon: Fraction | None
    floor: Fraction
    separation_modulus: tuple

    @property
    def gammas(self) -> tuple:
        return tuple(EmbeddedReal(c.gamma, self.alpha.index) for c in self.components)

    def summary(self) -> dict:
        def qs(x):
            return None if x is None else (str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}")

        return {
            "ratios": [qs(x) for x in self.ratios],
            "common_den": self.common_den,
            "shifts": [qs(c.shift) for c in self.components],
            "component_min_norms": [qs(c.min_norm) for c in self.components],
            "component_floors": [qs(c.floor) for c in self.components],
            "rho": qs(self.rho),
            "epsilon": qs(self.epsilon),
            "floor": qs(self.floor),
            "floor_float": float(self.floor),
        }


def _rat_floor(x: RatInterval, bits: int = 64) -> Fraction:
    """A simple rational just below ``x.lo``."""
    lo = x.lo
    return Fraction(math.floor(lo * (1 << bits)), 1 << bits)


def component_floor(alpha: EmbeddedReal, ratio, shift, units: UnitSet, *, eps=Fraction(1, 10 ** 30)) -> FloorComponent:
    """Certified lower bound for ``inf_n |n + 1/2| <n q a - gamma>`` with
    ``gamma = -q a / 2 + s``.

    Writing ``xi = (n + 1/2) q a - k - s`` (a field element), the term is
    ``|sigma(xi)| |sigma(xi) - sigma'(xi)| / D`` with ``D = |sigma(qa) - sigma'(qa)|``.
    Splitting on whether ``|sigma'(xi)| >= 2 |sigma(xi)|`` gives the bound
    ``min(sqrt(Nmin/2)/2, Nmin/(2D))`` where ``Nmin`` is the exact minimum of
    ``|Norm(xi)|`` over the grid.
    """
    q, s = Q(ratio), Q(shift)
    K = alpha.element.field
    if K.degree != 2:
        raise ValueError("floor construction needs a quadratic field element")
    beta = alpha.element * q
    t = beta * Fraction(1, 2) - K.one() * s
    res = exact_grid_min_compact(K, [K.one(), beta], t, units, eps=eps)
    nmin = res.min_norm
    i = alpha.index
    j = 3 - i
    D = abs(embed(beta, i, eps) - embed(beta, j, eps))
    a = sqrt_interval(nmin / 2) / 2
    b = RatInterval.point(nmin) / (D * 2)
    lower = min(a.lo, b.lo, Fraction(1, 4))
    gamma = beta * Fraction(-1, 2) + K.one() * s
    return FloorComponent(q, s, gamma, nmin, D, _rat_floor(RatInterval.point(lower)))


def _mod_distance(x: Fraction, modulus: Fraction) -> Fraction:
    r = x % modulus
    return min(r, modulus - r)


def separation(ratios: Sequence[Fraction], shifts: Sequence[Fraction], common_den: int) -> tuple:
    """Per pair: (distance mod (1/common_den)Z, modulus mod which ``<n q_i a - g_i>`` and
    ``<n q_j a - g_j>`` can be simultaneously small, distance mod it)."""
    out = []
    for i in range(len(ratios)):
        for j in range(i + 1, len(ratios)):
            diff = shifts[i] / ratios[i] - shifts[j] / ratios[j]
            ci, cj = abs(ratios[i] * common_den), abs(ratios[j] * common_den)
            lcm = ci.numerator * cj.numerator // math.gcd(ci.numerator, cj.numerator)
            mod = Fraction(common_den, lcm)
            out.append(((i, j), _mod_distance(diff, Fraction(1, common_den)), mod, _mod_distance(diff, mod)))
    return tuple(out)


def floor_construction(alpha: EmbeddedReal, ratios: Sequence, units: UnitSet, *, max_den: int = 4,
                       eps=Fraction(1, 10 ** 30)) -> FloorCertificate:
    """Choose ``gamma_i = -q_i a/2 + s_i`` with certified positive 2D minima and
    exact pairwise separation, and derive a floor for the full product."""
    ratios = tuple(Q(x) for x in ratios)
    if not ratios or any(x == 0 for x in ratios):
        raise ValueError("ratios must be nonzero")
    common_den = 1
    for x in ratios:
        common_den = common_den * x.denominator // math.gcd(common_den, x.denominator)
    shifts = sorted({Fraction(j, den) for den in range(1, max_den + 1) for j in range(den)})
    comps = {}
    for qi in set(ratios):
        comps[qi] = [component_floor(alpha, qi, s, units, eps=eps) for s in shifts]
    r = len(ratios)
    if r == 1:
        best = max(comps[ratios[0]], key=lambda c: (c.floor, -c.shift))
        return FloorCertificate(alpha, ratios, common_den, (best,), None, None, best.floor, ())
    best = None
    for choice in itertools.product(range(len(shifts)), repeat=r):
        cs = tuple(comps[qi][k] for qi, k in zip(ratios, choice))
        sep = separation(ratios, [c.shift for c in cs], common_den)
        if any(d1 == 0 or d2 == 0 for _, d1, _, d2 in sep):
            continue
        eps_pair = min(d2 / (1 / abs(ratios[i]) + 1 / abs(ratios[j])) for (i, j), _, _, d2 in sep)
        eps_ = min(eps_pair, Fraction(1, 2))
        floor = min(eps_ ** r / 2, eps_ ** (r - 1) * min(c.floor for c in cs))
        key = (floor, tuple(-c.shift for c in cs))
        if best is None or key > best[0]:
            rho = min(d2 for _, _, _, d2 in sep)
            best = (key, cs, rho, eps_, floor, tuple(mod for _, _, mod, _ in sep))
    if best is None:
        raise ValueError(f"no separated translations with denominators <= {max_den}")
    _, cs, rho, eps_, floor, mods = best
    return FloorCertificate(alpha, ratios, common_den, cs, rho, eps_, floor, mods)


def check_separation(diffs: Sequence[Fraction], common_den: int) -> bool:
    """True when every difference ``g_i/q_i - g_j/q_j`` lies outside ``(1/common_den)Z``."""
    return all(_mod_distance(Q(d), Fraction(1, common_den)) != 0 for d in diffs)


@dataclass(frozen=True)
class FloorScan:
    scan: ScanResult
    floor: Fraction | None
    N0: int
    consistent: bool | None

    def summary(self) -> dict:
        out = self.scan.summary()
        out["floor"] = None if self.floor is None else float(self.floor)
        out["stabilization_N0"] = self.N0
        out["consistent"] = self.consistent
        return out


def floor_scan(alpha, ratios: Sequence, gammas: Sequence, N: int, *, certificate: FloorCertificate | None = None,
               workers: int = 1, policy: PrecisionPolicy | None = None) -> FloorScan:
    """Scan ``min_{|n| <= N} |n + 1/2| prod <n q_i a - g_i>``.

    ``N0`` is the key of the last record: the running minimum does not move
    after it.  With a certificate, any scan value below the floor raises
    :class:`FloorViolation`; without one nothing is asserted.
    """
    alphas = tuple(_scaled(alpha, Q(r)) for r in ratios)
    spec = TargetSpec(alphas, tuple(gammas), "weighted_products")
    res = scan_products(spec, N, policy=policy, workers=workers, half_shift=True)
    last = res.minimum
    consistent = None
    floor = None
    if certificate is not None:
        floor = certificate.floor
        upper = last.interval.hi if last.interval is not None else Fraction(last.value + last.error_bound)
        if upper < floor:
            raise FloorViolation(f"scan minimum {float(upper)!r} below certified floor {float(floor)!r}")
        consistent = True
    return FloorScan(res, floor, last.N, consistent)


@dataclass(frozen=True)
class _Scaled:
    """``q * x`` for a refinable real ``x``."""

    base: object
    factor: Fraction

    def enclosure(self, eps) -> RatInterval:
        if self.factor == 0:
            return RatInterval.point(0)
        return _enclose(self.base, eps / abs(self.factor)) * self.factor


def _scaled(x, q: Fraction):
    if isinstance(x, EmbeddedReal):
        return EmbeddedReal(x.element * q, x.index)
    if isinstance(x, (int, Fraction)):
        return Q(x) * q
    return _Scaled(x, q)
