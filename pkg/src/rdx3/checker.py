"""Certificates for the structural conditions on reaction triples.

Deciding ``p(x) <= K * (1 + x1 + x2 + x3)^m`` over the whole nonnegative
octant is hard in general, so every check here is sound but incomplete:

* ``CertifiedTrue`` comes from a coefficientwise domination certificate
  (see :func:`rdx3.poly.dominates`) and is exact;
* ``FalsifiedWithWitness`` carries a rational point at which the
  inequality fails, verified in exact arithmetic;
* ``Unknown`` is the honest third verdict when neither side lands.

Bound constants are searched over a fixed power-of-two ladder
{0, 1, 2, 4, ..., 2**64}; a falsification witness is a point violating the
inequality even at the top of the ladder, so the reported verdicts are
always relative to that declared cap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .poly import CoeffLike, Poly3, affine_weight, dominates, to_fraction

#: top of the constant ladder; "falsified" means failing even at this bound
LADDER_CAP = Fraction(2) ** 64

#: {0, 1, 2, 4, ..., 2^64}
LADDER: tuple[Fraction, ...] = (Fraction(0),) + tuple(Fraction(2) ** k for k in range(65))

#: exact witnesses must violate their inequality by more than this
WITNESS_MARGIN = Fraction(1, 10**9)

CERTIFIED = "CertifiedTrue"
FALSIFIED = "FalsifiedWithWitness"
UNKNOWN = "Unknown"


def _norm(x: Fraction):
    """Collapse integral rationals to int so exact evaluation can take the
    pure-integer fast path."""
    return int(x) if x.denominator == 1 else x


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: tuple[Fraction, Fraction, Fraction] | None = None
    margin: Fraction | None = None
    detail: str = ""

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def falsified(self) -> bool:
        return self.status == FALSIFIED

    def to_json(self) -> dict:
        obj: dict = {"status": self.status}
        if self.witness is not None:
            obj["witness"] = [_frac_str(x) for x in self.witness]
            obj["witness_float"] = [_safe_float(x) for x in self.witness]
        if self.margin is not None:
            obj["margin"] = _frac_str(self.margin)
        if self.detail:
            obj["detail"] = self.detail
        return obj


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _safe_float(x: Fraction) -> float:
    try:
        return float(x)
    except OverflowError:
        return float("inf") if x > 0 else float("-inf")


@dataclass(frozen=True)
class NonlinearityTriple:
    """The three reaction polynomials, in the order of the state components."""

    f: Poly3
    g: Poly3
    h: Poly3

    def as_tuple(self) -> tuple[Poly3, Poly3, Poly3]:
        return (self.f, self.g, self.h)

    def to_json(self) -> dict:
        return {"f": self.f.to_json_obj(), "g": self.g.to_json_obj(), "h": self.h.to_json_obj()}

    @classmethod
    def from_json(cls, obj: dict) -> "NonlinearityTriple":
        return cls(
            f=Poly3.from_json_obj(obj["f"]),
            g=Poly3.from_json_obj(obj["g"]),
            h=Poly3.from_json_obj(obj["h"]),
        )


@dataclass(frozen=True)
class IwscWeights:
    """Weights of the three weighted-sum rows; both above 1 or both below 1."""

    lam1: Fraction
    lam2: Fraction

    def __post_init__(self):
        lam1 = to_fraction(self.lam1)
        lam2 = to_fraction(self.lam2)
        object.__setattr__(self, "lam1", lam1)
        object.__setattr__(self, "lam2", lam2)
        if lam1 <= 0 or lam2 <= 0:
            raise ValueError("weights must be positive")
        if not ((lam1 > 1 and lam2 > 1) or (lam1 < 1 and lam2 < 1)):
            raise ValueError("weights must both exceed 1 or both lie below 1")

    @property
    def branch(self) -> str:
        return "above_one" if self.lam1 > 1 else "below_one"

    def to_json(self) -> dict:
        return {
            "lam1": _frac_str(self.lam1),
            "lam2": _frac_str(self.lam2),
            "branch": self.branch,
        }


# ---------------------------------------------------------------------------
# deterministic stratified sampler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    """Stratified sampling plan: small lattice, boxes at several scales,
    then geometric rays (axes, diagonal, and seeded random directions).
    Ray points expose leading-term signs at infinity; all points are exact
    rationals so violations can be certified."""

    seed: int = 0
    box_sizes: tuple[int, ...] = (1, 10, 1000)
    points_per_box: int = 120
    ray_exponents: tuple[int, ...] = tuple(range(0, 97, 4))
    random_rays: int = 8

    def points3(self) -> list[tuple]:
        return self._points(3, self.seed)

    def points2(self) -> list[tuple]:
        return self._points(2, self.seed + 1)

    def _points(self, ndim: int, seed: int) -> list[tuple]:
        rng = random.Random(seed)
        pts: list[tuple] = []
        lattice = sorted(product(range(3), repeat=ndim), key=lambda e: (sum(e), e))
        pts.extend(lattice)
        for r in self.box_sizes:
            pts.extend(product((0, r), repeat=ndim))
            for _ in range(self.points_per_box):
                pts.append(tuple(_norm(Fraction(rng.randrange(0, 256 * r + 1), 256)) for _ in range(ndim)))
        dirs = [tuple(int(i == k) for i in range(ndim)) for k in range(ndim)] + [(1,) * ndim]
        for _ in range(self.random_rays):
            dirs.append(tuple(Fraction(rng.randrange(0, 17), 16) for _ in range(ndim)))
        for d in dirs:
            if all(c == 0 for c in d):
                continue
            for k in self.ray_exponents:
                t = 2**k
                pts.append(tuple(_norm(t * Fraction(c)) for c in d))
        return pts


DEFAULT_SAMPLER = SamplerConfig()


# ---------------------------------------------------------------------------
# core bound search
# ---------------------------------------------------------------------------


def _ladder_bound(
    polys: tuple[Poly3, ...],
    weight_power: int,
    sampler: SamplerConfig,
) -> tuple[Verdict, Fraction | None]:
    """Smallest ladder K with every poly coefficientwise below K * weight^power.

    Falsification looks for a point where some poly exceeds the ladder cap
    bound; such a point rules out every constant on the declared ladder.
    """
    weight = affine_weight() ** weight_power
    for k in LADDER:
        bound = weight * k
        if all(dominates(bound, p) for p in polys):
            return Verdict(CERTIFIED), k
    points = sampler.points3()
    weight_values = [LADDER_CAP * weight.eval(x) for x in points]
    for p in polys:
        for x, wk in zip(points, weight_values):
            excess = p.eval(x) - wk
            if excess > WITNESS_MARGIN:
                return (
                    Verdict(FALSIFIED, witness=x, margin=excess,
                            detail=f"exceeds cap 2^64 * weight^{weight_power}"),
                    None,
                )
    return Verdict(UNKNOWN, detail="no certificate and no cap-violating witness"), None


# ---------------------------------------------------------------------------
# the condition checks
# ---------------------------------------------------------------------------


def check_quasi_positivity(n: NonlinearityTriple, sampler: SamplerConfig = DEFAULT_SAMPLER) -> Verdict:
    """Each reaction must be nonnegative where its own species vanishes.

    Certificate: the restriction of reaction i to {x_i = 0} has only
    nonnegative coefficients.  Falsification samples the restricted
    polynomial on the boundary plane.
    """
    worst = CERTIFIED
    for axis, p in enumerate(n.as_tuple(), start=1):
        restricted = p.substitute_zero(axis)
        if all(c >= 0 for c in restricted.terms.values()):
            continue
        found = None
        for y, z in sampler.points2():
            value = restricted.eval(_embed(axis, y, z))
            if value < -WITNESS_MARGIN:
                found = (_embed(axis, y, z), -value)
                break
        if found is not None:
            return Verdict(FALSIFIED, witness=found[0], margin=found[1],
                           detail=f"component {'fgh'[axis - 1]} negative on its zero plane")
        worst = UNKNOWN
    return Verdict(worst) if worst == CERTIFIED else Verdict(UNKNOWN, detail="restriction has negative coefficients but sampling found no witness")


def _embed(axis: int, y, z) -> tuple:
    """Lift a point of the plane {x_axis = 0} back to three coordinates."""
    if axis == 1:
        return (0, y, z)
    if axis == 2:
        return (y, 0, z)
    return (y, z, 0)


def check_mass_control(
    n: NonlinearityTriple, sampler: SamplerConfig = DEFAULT_SAMPLER
) -> tuple[Verdict, Fraction | None]:
    """Bound f + g + h by a ladder multiple of the affine weight."""
    total = n.f + n.g + n.h
    return _ladder_bound((total,), 1, sampler)


def check_iwsc(
    n: NonlinearityTriple,
    weights: IwscWeights,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
) -> tuple[Verdict, tuple[Fraction, Fraction, Fraction] | None]:
    """The three weighted-sum rows, each against its own ladder constant."""
    f, g, h = n.as_tuple()
    lam1, lam2 = weights.lam1, weights.lam2
    rows = (
        f * lam1 + g + h,
        f * lam2 + g * lam2 + h,
        f * (lam1 * lam2) + g * lam2 + h,
    )
    constants: list[Fraction] = []
    for idx, row in enumerate(rows, start=1):
        verdict, k = _ladder_bound((row,), 1, sampler)
        if verdict.falsified:
            return (
                Verdict(FALSIFIED, witness=verdict.witness, margin=verdict.margin,
                        detail=f"row {idx}: {verdict.detail}"),
                None,
            )
        if not verdict.certified:
            return Verdict(UNKNOWN, detail=f"row {idx} undecided"), None
        constants.append(k)
    return Verdict(CERTIFIED), tuple(constants)


def check_growth(n: NonlinearityTriple) -> tuple[int, Fraction]:
    """Growth order and ladder constant; always certifies for polynomials.

    The order is the max total degree (at least 1); every monomial of
    degree <= m appears in weight^m with coefficient >= 1, so some ladder
    constant always dominates.
    """
    m = max(1, max(p.total_degree() for p in n.as_tuple()))
    weight = affine_weight() ** m
    for k in LADDER:
        bound = weight * k
        if all(dominates(bound, p) for p in n.as_tuple()):
            return m, k
    raise AssertionError("growth ladder cannot be exhausted for polynomial input")


IDENTITY_MATRIX = ((Fraction(1), Fraction(0), Fraction(0)),
                   (Fraction(0), Fraction(1), Fraction(0)),
                   (Fraction(0), Fraction(0), Fraction(1)))


def check_isc(
    n: NonlinearityTriple,
    r: CoeffLike = 1,
    matrix: tuple[tuple[Fraction, ...], ...] = IDENTITY_MATRIX,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
) -> Verdict:
    """Informational check of the older triangular intermediate-sum system.

    The matrix must be lower triangular with nonnegative entries and a
    positive diagonal; a single shared ladder constant bounds all rows by
    weight^r.  Only integer r admits the exact certificate; the check is
    exact either way through rational ray evaluation of weight^r when r is
    integral, and restricted to integer r here (the toolkit's comparisons
    all use r = 1).
    """
    rr = to_fraction(r)
    if rr < 1:
        raise ValueError("r must be at least 1")
    if rr.denominator != 1:
        raise ValueError("only integer powers are supported for the triangular check")
    a = tuple(tuple(to_fraction(v) for v in row) for row in matrix)
    for i in range(3):
        for j in range(3):
            if j > i and a[i][j] != 0:
                raise ValueError("matrix must be lower triangular")
            if a[i][j] < 0:
                raise ValueError("matrix entries must be nonnegative")
        if a[i][i] <= 0:
            raise ValueError("diagonal entries must be positive")
    f, g, h = n.as_tuple()
    rows = (
        f * a[0][0],
        f * a[1][0] + g * a[1][1],
        f * a[2][0] + g * a[2][1] + h * a[2][2],
    )
    verdict, _k = _ladder_bound(rows, int(rr), sampler)
    return verdict


def lemma_liws_probe(
    phi: Poly3,
    psi: Poly3,
    alpha: CoeffLike,
    c1: CoeffLike,
    c2: CoeffLike,
    alpha_star: CoeffLike,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    extra_points: int = 0,
) -> bool:
    """Sample the interpolation consequence of two certified weighted bounds.

    Premises (checked, rejected if not certifiable coefficientwise):
    phi + psi <= c1 * weight and alpha * phi + psi <= c2 * weight.  The
    probe then evaluates alpha_star * phi + psi <= max(c1, c2) * weight at
    the sampler's points and returns False only on a concrete
    counterexample, which would contradict the interpolation lemma.
    """
    al = to_fraction(alpha)
    als = to_fraction(alpha_star)
    k1 = to_fraction(c1)
    k2 = to_fraction(c2)
    if al <= 0 or al == 1:
        raise ValueError("alpha must be positive and different from 1")
    if k1 < 0 or k2 < 0:
        raise ValueError("premise constants must be nonnegative")
    lo, hi = (Fraction(1), al) if al > 1 else (al, Fraction(1))
    if not (lo <= als <= hi):
        raise ValueError(f"alpha_star must lie in [{lo}, {hi}]")
    weight = affine_weight()
    if not dominates(weight * k1, phi + psi):
        raise ValueError("first premise is not certifiable coefficientwise")
    if not dominates(weight * k2, phi * al + psi):
        raise ValueError("second premise is not certifiable coefficientwise")
    target = phi * als + psi
    cmax = max(k1, k2)
    points = sampler.points3()
    if extra_points:
        rng = random.Random(sampler.seed + 2)
        for _ in range(extra_points):
            points.append(tuple(rng.randrange(0, 1001) for _ in range(3)))
    for x in points:
        if target.eval(x) > cmax * weight.eval(x):
            return False
    return True


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass
class ConditionReport:
    """Verdicts and constants for all structural conditions of a triple.

    The triangular-system verdict is informational: it never enters
    :meth:`all_certified` (the toolkit's headline result is exactly that a
    triple can pass the weighted-sum test while failing the triangular one).
    """

    quasi_positive: Verdict
    mass_control: Verdict
    k1: Fraction | None
    iwsc: Verdict
    iwsc_constants: tuple[Fraction, Fraction, Fraction] | None
    weights: IwscWeights
    growth_order: int
    growth_constant: Fraction
    isc: Verdict
    isc_r: int = 1

    def core_verdicts(self) -> tuple[Verdict, ...]:
        growth = Verdict(CERTIFIED)
        return (self.quasi_positive, self.mass_control, self.iwsc, growth)

    def all_certified(self) -> bool:
        return all(v.certified for v in self.core_verdicts())

    def any_falsified(self) -> bool:
        return any(v.falsified for v in self.core_verdicts())

    def zero_constants(self) -> bool:
        """True when every certified bound constant is zero (the
        uniform-in-time regime)."""
        if self.k1 is None or self.iwsc_constants is None:
            return False
        return self.k1 == 0 and all(k == 0 for k in self.iwsc_constants)

    def to_json(self) -> dict:
        def frac(x):
            return None if x is None else _frac_str(x)

        return {
            "quasi_positive": self.quasi_positive.to_json(),
            "mass_control": {
                "verdict": self.mass_control.to_json(),
                "K1": frac(self.k1),
            },
            "iwsc": {
                "verdict": self.iwsc.to_json(),
                "K2": frac(self.iwsc_constants[0] if self.iwsc_constants else None),
                "K3": frac(self.iwsc_constants[1] if self.iwsc_constants else None),
                "K4": frac(self.iwsc_constants[2] if self.iwsc_constants else None),
                "weights": self.weights.to_json(),
            },
            "growth": {
                "verdict": {"status": CERTIFIED},
                "m": self.growth_order,
                "M": frac(self.growth_constant),
            },
            "isc": {
                "verdict": self.isc.to_json(),
                "r": self.isc_r,
                "informational": True,
            },
            "summary": {
                "all_certified": self.all_certified(),
                "any_falsified": self.any_falsified(),
                "zero_constants": self.zero_constants(),
            },
        }


def check_all(
    n: NonlinearityTriple,
    weights: IwscWeights,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    isc_r: int = 1,
) -> ConditionReport:
    qp = check_quasi_positivity(n, sampler)
    mass, k1 = check_mass_control(n, sampler)
    iwsc, ks = check_iwsc(n, weights, sampler)
    m, big_m = check_growth(n)
    isc = check_isc(n, isc_r, sampler=sampler)
    return ConditionReport(
        quasi_positive=qp,
        mass_control=mass,
        k1=k1,
        iwsc=iwsc,
        iwsc_constants=ks,
        weights=weights,
        growth_order=m,
        growth_constant=big_m,
        isc=isc,
        isc_r=isc_r,
    )
