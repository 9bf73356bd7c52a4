"""Energy polynomials, their closed-form derivatives, and parameter search.

The degree-p energy polynomial is a binomial double sum with weight
sequences attached to the first two variables.  Two variants are built,
one per branch of the weighted-sum condition: weights above one pair with
ascending exponent weights, weights below one with the reflected ones.
Everything here is exact rational arithmetic; floats appear only in JSON
output for readability.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, isqrt

from .poly import CoeffLike, Poly3, to_fraction

VARIANT_ABOVE = "above_one"
VARIANT_BELOW = "below_one"


class FeasibilitySearchError(RuntimeError):
    """Raised when the (theta, sigma) search exhausts its budget."""


@dataclass(frozen=True)
class DiffusionTriple:
    """Positive diffusion coefficients and the derived contrast ratios
    (d_i + d_j) / (2 sqrt(d_i d_j)), each >= 1 with equality iff d_i = d_j.
    Only the squares of the ratios are needed, and those are rational."""

    d1: Fraction
    d2: Fraction
    d3: Fraction

    def __post_init__(self):
        for name in ("d1", "d2", "d3"):
            v = to_fraction(getattr(self, name))
            if v <= 0:
                raise ValueError("diffusion coefficients must be positive")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.d1, self.d2, self.d3)

    def ratio_sq(self, i: int, j: int) -> Fraction:
        di, dj = self.as_tuple()[i - 1], self.as_tuple()[j - 1]
        return (di + dj) ** 2 / (4 * di * dj)

    def ratio_float(self, i: int, j: int) -> float:
        return float(self.ratio_sq(i, j)) ** 0.5

    def ratio_triple_product(self) -> Fraction:
        """The product of the three ratios; rational because the square
        roots multiply out."""
        d1, d2, d3 = self.as_tuple()
        return (d1 + d2) * (d1 + d3) * (d2 + d3) / (8 * d1 * d2 * d3)

    def to_json(self) -> dict:
        return {
            "d": [float(v) for v in self.as_tuple()],
            "d_exact": [f"{v.numerator}/{v.denominator}" for v in self.as_tuple()],
            "A12": self.ratio_float(1, 2),
            "A13": self.ratio_float(1, 3),
            "A23": self.ratio_float(2, 3),
        }


def compute_p(m: int, n_dim: int) -> int:
    """Smallest integer strictly greater than m * (n_dim + 2) / 2."""
    if m < 1 or n_dim < 1:
        raise ValueError("growth order and dimension must be at least 1")
    return m * (n_dim + 2) // 2 + 1


def theta_sigma_feasible(d: DiffusionTriple, theta: CoeffLike, sigma: CoeffLike) -> bool:
    """Exact evaluation of the two strict feasibility inequalities."""
    th = to_fraction(theta)
    si = to_fraction(sigma)
    if th <= 0 or si <= 0:
        raise ValueError("theta and sigma must be positive")
    t = th * th
    s = si * si
    a12s = d.ratio_sq(1, 2)
    if t <= a12s:
        return False
    a13s = d.ratio_sq(1, 3)
    a23s = d.ratio_sq(2, 3)
    g = d.ratio_triple_product()
    lhs = (t - a12s) * (t * s - a13s)
    rhs = a23s * t * t - 2 * g * t + a12s * a13s
    return lhs > rhs


def _sigma_sq_boundary(d: DiffusionTriple, theta: Fraction) -> Fraction:
    """For fixed theta above the first threshold, the feasible set in sigma
    is {sigma^2 > Q}; returns Q (exact)."""
    t = theta * theta
    a12s = d.ratio_sq(1, 2)
    if t <= a12s:
        raise ValueError("theta is below the first threshold")
    a13s = d.ratio_sq(1, 3)
    a23s = d.ratio_sq(2, 3)
    g = d.ratio_triple_product()
    rhs = a23s * t * t - 2 * g * t + a12s * a13s
    return (a13s + rhs / (t - a12s)) / t


def _sqrt_exact_or_upper(q: Fraction, digits: int = 12) -> Fraction:
    """Exact square root for perfect rational squares, otherwise a nearby
    strict rational upper bound."""
    if q < 0:
        raise ValueError("negative radicand")
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    scale = 10**digits
    val = isqrt(q.numerator * scale * scale // q.denominator) + 1
    return Fraction(val, scale)


def find_theta_sigma(
    d: DiffusionTriple,
    margin: Fraction = Fraction(11, 10),
    max_steps: int = 48,
) -> tuple[Fraction, Fraction]:
    """A feasible pair minimizing theta * sigma over a multiplicative ladder.

    theta runs over ratio_12 * margin^k; for each theta the minimal sigma is
    the exact root of the monotone second inequality, pushed strictly inside
    the region by the same margin.  Equal diffusions land on
    (margin, margin) exactly.
    """
    if margin <= 1:
        raise ValueError("margin must exceed 1")
    if max_steps < 1:
        raise FeasibilitySearchError("search budget exhausted before any candidate")
    base = _sqrt_exact_or_upper(d.ratio_sq(1, 2))
    best: tuple[Fraction, Fraction] | None = None
    best_prod: Fraction | None = None
    for k in range(1, max_steps + 1):
        theta = base * margin**k
        sigma = _sqrt_exact_or_upper(_sigma_sq_boundary(d, theta)) * margin
        if not theta_sigma_feasible(d, theta, sigma):
            continue
        prod = theta * sigma
        if best_prod is None or prod < best_prod:
            best, best_prod = (theta, sigma), prod
    if best is None:
        raise FeasibilitySearchError("no feasible pair found within the search budget")
    return best


# ---------------------------------------------------------------------------
# energy polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HpSpec:
    """Degree, the two weight bases, and which branch's variant to build."""

    p: int
    theta: Fraction
    sigma: Fraction
    variant: str = VARIANT_ABOVE

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        th = to_fraction(self.theta)
        si = to_fraction(self.sigma)
        if th <= 0 or si <= 0:
            raise ValueError("theta and sigma must be positive")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "sigma", si)
        if self.variant not in (VARIANT_ABOVE, VARIANT_BELOW):
            raise ValueError(f"unknown variant {self.variant!r}")

    def weight_sequences(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        """Coefficient weight sequences (t_i), (s_j) for i, j = 0..p."""
        p, th, si = self.p, self.theta, self.sigma
        if self.variant == VARIANT_ABOVE:
            tseq = tuple(th ** (i * i - i) for i in range(p + 1))
            sseq = tuple(si ** (j * j - j) for j in range(p + 1))
        else:
            tseq = tuple(th ** ((p - i) ** 2 - i) for i in range(p + 1))
            sseq = tuple(si ** ((p - j) ** 2 - j) for j in range(p + 1))
        return tseq, sseq

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "theta": float(self.theta),
            "theta_exact": f"{self.theta.numerator}/{self.theta.denominator}",
            "sigma": float(self.sigma),
            "sigma_exact": f"{self.sigma.numerator}/{self.sigma.denominator}",
            "variant": self.variant,
        }


def weighted_sum_poly(p: int, tseq, sseq) -> Poly3:
    """The binomial double sum with arbitrary weight sequences."""
    terms = {}
    for j in range(p + 1):
        for i in range(j + 1):
            coeff = comb(p, j) * comb(j, i) * tseq[i] * sseq[j]
            terms[(i, j - i, p - j)] = coeff
    return Poly3(terms)


def weighted_sum_grad(p: int, tseq, sseq) -> tuple[Poly3, Poly3, Poly3]:
    """Closed-form first derivatives: same double sum one degree down with
    index-shifted weights."""
    if p < 1:
        raise ValueError("p must be at least 1")
    d1 = {}
    d2 = {}
    d3 = {}
    for j in range(p):
        for i in range(j + 1):
            base = p * comb(p - 1, j) * comb(j, i)
            e = (i, j - i, (p - 1) - j)
            d1[e] = base * tseq[i + 1] * sseq[j + 1]
            d2[e] = base * tseq[i] * sseq[j + 1]
            d3[e] = base * tseq[i] * sseq[j]
    return Poly3(d1), Poly3(d2), Poly3(d3)


HESSIAN_KEYS = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))


def weighted_sum_hess(p: int, tseq, sseq) -> dict[tuple[int, int], Poly3]:
    """Closed-form second derivatives, upper triangle keyed by axis pair."""
    if p < 2:
        raise ValueError("second derivatives need p >= 2")
    shifts = {
        (1, 1): (2, 2),
        (1, 2): (1, 2),
        (1, 3): (1, 1),
        (2, 2): (0, 2),
        (2, 3): (0, 1),
        (3, 3): (0, 0),
    }
    acc: dict[tuple[int, int], dict] = {k: {} for k in HESSIAN_KEYS}
    for j in range(p - 1):
        for i in range(j + 1):
            base = p * (p - 1) * comb(p - 2, j) * comb(j, i)
            e = (i, j - i, (p - 2) - j)
            for key, (di, dj) in shifts.items():
                acc[key][e] = base * tseq[i + di] * sseq[j + dj]
    return {k: Poly3(v) for k, v in acc.items()}


def build_energy(spec: HpSpec) -> Poly3:
    tseq, sseq = spec.weight_sequences()
    return weighted_sum_poly(spec.p, tseq, sseq)


def grad_energy_closed_form(spec: HpSpec) -> tuple[Poly3, Poly3, Poly3]:
    tseq, sseq = spec.weight_sequences()
    return weighted_sum_grad(spec.p, tseq, sseq)


def hess_energy_closed_form(spec: HpSpec) -> dict[tuple[int, int], Poly3]:
    tseq, sseq = spec.weight_sequences()
    return weighted_sum_hess(spec.p, tseq, sseq)


def norm_domination_constant(spec: HpSpec) -> Fraction:
    """Smallest C with (x1+x2+x3)^p <= C * energy on the nonnegative octant,
    read off termwise: the max ratio of multinomial weight to energy
    coefficient."""
    tseq, sseq = spec.weight_sequences()
    return max(
        Fraction(1) / (tseq[i] * sseq[j]) for j in range(spec.p + 1) for i in range(j + 1)
    )


# ---------------------------------------------------------------------------
# the 3x3 dissipation matrices and their minors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BijMatrix:
    """Symmetric 3x3 matrix of diffusion-weighted coefficients for index
    pair (i, j); positive definiteness of all of these makes the gradient
    quadratic form in the energy dissipation nonnegative."""

    i: int
    j: int
    entries: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def entry(self, r: int, c: int) -> Fraction:
        return self.entries[r - 1][c - 1]


def build_bij(
    d: DiffusionTriple, theta: CoeffLike, sigma: CoeffLike, i: int, j: int
) -> BijMatrix:
    if not (0 <= i <= j):
        raise ValueError("need 0 <= i <= j")
    th = to_fraction(theta)
    si = to_fraction(sigma)
    d1, d2, d3 = d.as_tuple()
    b11 = d1 * th ** ((i + 2) ** 2) * si ** ((j + 2) ** 2)
    b12 = (d1 + d2) / 2 * th ** ((i + 1) ** 2) * si ** ((j + 2) ** 2)
    b13 = (d1 + d3) / 2 * th ** ((i + 1) ** 2) * si ** ((j + 1) ** 2)
    b22 = d2 * th ** (i * i) * si ** ((j + 2) ** 2)
    b23 = (d2 + d3) / 2 * th ** (i * i) * si ** ((j + 1) ** 2)
    b33 = d3 * th ** (i * i) * si ** (j * j)
    return BijMatrix(i=i, j=j, entries=((b11, b12, b13), (b12, b22, b23), (b13, b23, b33)))


def leading_minors_positive(mat: BijMatrix) -> bool:
    """Sylvester test with exact rational determinants."""
    (a, b, c), (b2, e, f), (c2, f2, g) = mat.entries
    if b != b2 or c != c2 or f != f2:
        raise ValueError("matrix is not symmetric")
    if a <= 0:
        return False
    if a * e - b * b <= 0:
        return False
    det = a * (e * g - f * f) - b * (b * g - f * c) + c * (b * f - e * c)
    return det > 0


# ---------------------------------------------------------------------------
# theorem parameter assembly
# ---------------------------------------------------------------------------


@dataclass
class TheoremParams:
    """Everything the global-existence statements need: the energy degree,
    a feasible weight pair, and the induced thresholds on the weighted-sum
    weights (lower bounds for theorem 1, upper bounds for theorem 2)."""

    theorem: int
    p: int
    theta: Fraction
    sigma: Fraction
    lam1_threshold: Fraction
    lam2_threshold: Fraction
    minors_audit: list[dict]

    @property
    def variant(self) -> str:
        return VARIANT_ABOVE if self.theorem == 1 else VARIANT_BELOW

    def hp_spec(self) -> HpSpec:
        return HpSpec(p=self.p, theta=self.theta, sigma=self.sigma, variant=self.variant)

    def thresholds_hold(self, lam1: Fraction, lam2: Fraction) -> bool:
        if self.theorem == 1:
            return lam1 >= self.lam1_threshold and lam2 >= self.lam2_threshold
        return lam1 <= self.lam1_threshold and lam2 <= self.lam2_threshold

    def to_json(self) -> dict:
        def frac(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator}"

        return {
            "theorem": self.theorem,
            "p": self.p,
            "theta": float(self.theta),
            "theta_exact": frac(self.theta),
            "sigma": float(self.sigma),
            "sigma_exact": frac(self.sigma),
            "lam1_threshold": float(self.lam1_threshold),
            "lam1_threshold_exact": frac(self.lam1_threshold),
            "lam2_threshold": float(self.lam2_threshold),
            "lam2_threshold_exact": frac(self.lam2_threshold),
            "threshold_kind": "lower_bound" if self.theorem == 1 else "upper_bound",
            "variant": self.variant,
            "minors_audit": self.minors_audit,
        }


def theorem_params(
    theorem: int,
    d: DiffusionTriple,
    m: int,
    n_dim: int,
    margin: Fraction = Fraction(11, 10),
    max_steps: int = 48,
) -> TheoremParams:
    if theorem not in (1, 2):
        raise ValueError("theorem must be 1 or 2")
    p = compute_p(m, n_dim)
    theta, sigma = find_theta_sigma(d, margin=margin, max_steps=max_steps)
    if theorem == 1:
        lam1_t = theta ** (2 * (p - 1))
        lam2_t = sigma ** (2 * (p - 1))
    else:
        lam1_t = theta ** (-2 * p)
        lam2_t = sigma ** (-2 * p)
    audit = []
    for j in range(max(p - 1, 0)):
        for i in range(j + 1):
            ok = leading_minors_positive(build_bij(d, theta, sigma, i, j))
            audit.append({"i": i, "j": j, "minors_positive": ok})
    return TheoremParams(
        theorem=theorem,
        p=p,
        theta=theta,
        sigma=sigma,
        lam1_threshold=lam1_t,
        lam2_threshold=lam2_t,
        minors_audit=audit,
    )
