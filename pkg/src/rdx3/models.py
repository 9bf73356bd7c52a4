"""Built-in model families: constructors, matrix classes, and a registry.

Three families plus two baseline triples.  Every registered preset passes
the quasi-positivity certificate at construction time; constructors reject
parameter combinations outside their family's validity constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .checker import CERTIFIED, IwscWeights, NonlinearityTriple, check_quasi_positivity
from .lyapunov import DiffusionTriple
from .poly import CoeffLike, Poly3, to_fraction
from .sim import BoundarySpec


@dataclass(frozen=True)
class InteractionMatrix:
    """3x3 interaction matrix with its sub-skew-symmetry class tags."""

    rows: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in r) for r in self.rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("matrix must be 3x3")
        object.__setattr__(self, "rows", rows)

    def __getitem__(self, rc: tuple[int, int]) -> Fraction:
        return self.rows[rc[0]][rc[1]]

    @property
    def in_sk(self) -> bool:
        """A + A^T entrywise nonpositive."""
        return all(self.rows[i][j] + self.rows[j][i] <= 0 for i in range(3) for j in range(3))

    @property
    def in_sk_plus(self) -> bool:
        return self.in_sk and all(self.rows[i][j] >= 0 for i in range(3) for j in range(i + 1, 3))

    @property
    def in_sk_minus(self) -> bool:
        return self.in_sk and all(self.rows[i][j] <= 0 for i in range(3) for j in range(i + 1, 3))

    def to_json(self) -> dict:
        return {
            "rows": [[float(v) for v in r] for r in self.rows],
            "in_sk": self.in_sk,
            "in_sk_plus": self.in_sk_plus,
            "in_sk_minus": self.in_sk_minus,
        }


def lv_weights_feasible(a: InteractionMatrix, lam1: CoeffLike, lam2: CoeffLike) -> bool:
    """The five cross-term sign conditions that make all three weighted-sum
    rows nonpositive for the interaction part of the Lotka-Volterra family."""
    l1 = to_fraction(lam1)
    l2 = to_fraction(lam2)
    if l1 <= 0 or l2 <= 0:
        raise ValueError("weights must be positive")
    a12, a13, a23 = a[0, 1], a[0, 2], a[1, 2]
    a21, a31, a32 = a[1, 0], a[2, 0], a[2, 1]
    return (
        l1 * a12 + a21 <= 0
        and l1 * a13 + a31 <= 0
        and l2 * a13 + a31 <= 0
        and l2 * a23 + a32 <= 0
        and l1 * l2 * a13 + a31 <= 0
    )


@dataclass
class ModelSpec:
    """A complete model: diffusion, reactions, boundary conditions, plus the
    weighted-sum weights the family's structure supports (if any)."""

    name: str
    d: DiffusionTriple
    n: NonlinearityTriple
    bc: BoundarySpec
    weights: IwscWeights | None = None
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "d": self.d.to_json(),
            "reactions_text": {
                "f": self.n.f.to_text(("u", "v", "w")),
                "g": self.n.g.to_text(("u", "v", "w")),
                "h": self.n.h.to_text(("u", "v", "w")),
            },
            "weights": self.weights.to_json() if self.weights else None,
            "metadata": self.metadata,
            # directly reusable as {"model": {"inline": ...}} in run configs
            "inline": self.to_inline_json(),
        }

    def to_inline_json(self) -> dict:
        d1, d2, d3 = self.d.as_tuple()
        inline = {
            "f": self.n.f.to_json_obj(),
            "g": self.n.g.to_json_obj(),
            "h": self.n.h.to_json_obj(),
            "d": [f"{v.numerator}/{v.denominator}" for v in (d1, d2, d3)],
            "bc": self.bc.to_json(),
        }
        if self.weights is not None:
            inline["weights"] = {
                "lam1": f"{self.weights.lam1.numerator}/{self.weights.lam1.denominator}",
                "lam2": f"{self.weights.lam2.numerator}/{self.weights.lam2.denominator}",
            }
        return inline


U = Poly3.variable(1)
V = Poly3.variable(2)
W = Poly3.variable(3)

_DEFAULT_D = DiffusionTriple(Fraction(1), Fraction(1), Fraction(1))


def _weights_or_none(lam1, lam2) -> IwscWeights | None:
    try:
        return IwscWeights(to_fraction(lam1), to_fraction(lam2))
    except ValueError:
        return None


def example1(
    l: int,
    q: int,
    r: int,
    a: CoeffLike,
    b: CoeffLike,
    c: CoeffLike,
    d: DiffusionTriple = _DEFAULT_D,
    bc: BoundarySpec | None = None,
) -> ModelSpec:
    """Cyclic exchange family (v^l - u^q, w^r - B v^l, A u^q - C w^r)."""
    if min(l, q, r) < 1:
        raise ValueError("exponents must be at least 1")
    af, bf, cf = to_fraction(a), to_fraction(b), to_fraction(c)
    if af <= 0 or bf <= 0 or cf <= 0:
        raise ValueError("rates must be positive")
    if not af < min(bf, cf):
        raise ValueError("need A < min(B, C)")
    n = NonlinearityTriple(
        f=V**l - U**q,
        g=W**r - bf * V**l,
        h=af * U**q - cf * W**r,
    )
    return ModelSpec(
        name="example1",
        d=d,
        n=n,
        bc=bc or BoundarySpec.all_neumann(),
        weights=_weights_or_none(bf, cf),
        metadata={"l": l, "q": q, "r": r, "A": str(af), "B": str(bf), "C": str(cf)},
    )


def example2(
    psi1: Poly3,
    psi2: Poly3,
    psi3: Poly3,
    zeta: tuple[CoeffLike, CoeffLike, CoeffLike],
    s: tuple[CoeffLike, CoeffLike, CoeffLike],
    d: DiffusionTriple = _DEFAULT_D,
    bc: BoundarySpec | None = None,
    weights: IwscWeights | None = None,
) -> ModelSpec:
    """Generalized exchange family built from three interaction kernels.

    The kernels are restricted to polynomials with nonnegative coefficients
    divisible by u*v*w, which makes quasi-positivity automatic.
    """
    z = tuple(to_fraction(x) for x in zeta)
    sv = tuple(to_fraction(x) for x in s)
    if len(z) != 3 or len(sv) != 3:
        raise ValueError("zeta and s must each have three entries")
    if any(x < 0 for x in sv):
        raise ValueError("the s rates must be nonnegative")
    if z[0] > 1:
        raise ValueError("the first kernel weight must not exceed 1")
    for idx, psi in enumerate((psi1, psi2, psi3), start=1):
        if psi.is_zero():
            raise ValueError(f"kernel {idx} must be nonzero")
        for e, coeff in psi.terms.items():
            if coeff < 0:
                raise ValueError(f"kernel {idx} has a negative coefficient")
            if min(e) < 1:
                raise ValueError(f"kernel {idx} must vanish on every coordinate plane (divisible by u*v*w)")
    n = NonlinearityTriple(
        f=psi2 - psi1 - sv[0] * psi3,
        g=psi3 - z[1] * psi2 - sv[1] * psi1,
        h=z[0] * psi1 - z[2] * psi3 - sv[2] * psi2,
    )
    return ModelSpec(
        name="example2",
        d=d,
        n=n,
        bc=bc or BoundarySpec.all_neumann(),
        weights=weights,
        metadata={"zeta": [str(x) for x in z], "s": [str(x) for x in sv]},
    )


def example3_lv(
    tau: tuple[CoeffLike, CoeffLike, CoeffLike],
    gamma: tuple[int, int, int],
    a: InteractionMatrix,
    bc: BoundarySpec | None = None,
    d: DiffusionTriple = _DEFAULT_D,
    weights: IwscWeights | None = None,
) -> ModelSpec:
    """Three-species Lotka-Volterra with higher-order interactions.

    Reaction i is tau_i x_i + x_i^gamma_i * (row i of A applied to the
    powered state).  Sub-skew-symmetry of A gives mass control with
    constant max(tau_i, 0) via the quadratic-form identity.
    """
    if len(gamma) != 3 or len(tau) != 3:
        raise ValueError("tau and gamma must each have three entries")
    if any(g < 1 for g in gamma):
        raise ValueError("interaction exponents must be at least 1")
    tf = tuple(to_fraction(x) for x in tau)
    powered = (U ** gamma[0], V ** gamma[1], W ** gamma[2])
    species = (U, V, W)
    reactions = []
    for i in range(3):
        inner = Poly3.zero()
        for j in range(3):
            inner = inner + a.rows[i][j] * powered[j]
        reactions.append(tf[i] * species[i] + powered[i] * inner)
    n = NonlinearityTriple(*reactions)
    if weights is None:
        if a.in_sk_minus:
            weights = IwscWeights(Fraction(2), Fraction(2))
        elif a.in_sk_plus:
            weights = IwscWeights(Fraction(1, 2), Fraction(1, 2))
    return ModelSpec(
        name="lv_hoi",
        d=d,
        n=n,
        bc=bc or BoundarySpec.all_neumann(),
        weights=weights,
        metadata={
            "tau": [str(x) for x in tf],
            "gamma": list(gamma),
            "matrix": a.to_json(),
            "K1_identity": str(max(max(tf), Fraction(0))),
        },
    )


def intro_counterexample(
    b: CoeffLike,
    c: CoeffLike,
    d: DiffusionTriple = _DEFAULT_D,
    bc: BoundarySpec | None = None,
    weights: IwscWeights | None = None,
) -> ModelSpec:
    """The degree-7 motivating triple: passes the weighted-sum condition for
    weights up to (B, C) but fails the triangular intermediate-sum check."""
    bf, cf = to_fraction(b), to_fraction(c)
    if bf <= 0 or cf <= 0:
        raise ValueError("B and C must be positive")
    n = NonlinearityTriple(
        f=V**5 - U**6,
        g=W**7 - bf * V**5,
        h=U**6 - cf * W**7,
    )
    if weights is None:
        weights = _weights_or_none(bf, cf)
    return ModelSpec(
        name="intro_counterexample",
        d=d,
        n=n,
        bc=bc or BoundarySpec.all_neumann(),
        weights=weights,
        metadata={"B": str(bf), "C": str(cf), "isc_expected": "falsified"},
    )


def mass_conserving(d: DiffusionTriple = _DEFAULT_D, bc: BoundarySpec | None = None) -> ModelSpec:
    """Cyclic linear exchange with identically zero reaction sum."""
    n = NonlinearityTriple(f=V - U, g=W - V, h=U - W)
    return ModelSpec(
        name="mass_conserving",
        d=d,
        n=n,
        bc=bc or BoundarySpec.all_neumann(),
        weights=IwscWeights(Fraction(2), Fraction(2)),
        metadata={"conserved": True},
    )


def triple_product(d: DiffusionTriple = _DEFAULT_D, bc: BoundarySpec | None = None) -> ModelSpec:
    """All three reactions equal to u*v*w: quasi-positive but mass control
    fails; spatially uniform data blows up in finite time."""
    uvw = U * V * W
    n = NonlinearityTriple(f=uvw, g=uvw, h=uvw)
    return ModelSpec(
        name="triple_product",
        d=d,
        n=n,
        bc=bc or BoundarySpec.all_neumann(),
        weights=IwscWeights(Fraction(2), Fraction(2)),
        metadata={"expected": "blow-up for positive uniform data"},
    )


SK_MINUS_MATRIX = InteractionMatrix(((-1, -1, 0), (-1, -2, -1), (0, -1, -1)))
SK_PLUS_MATRIX = InteractionMatrix(((-1, 1, 0), (-2, -1, 0), (0, 0, -1)))


def _preset_intro(**params) -> ModelSpec:
    b = params.pop("B", 5)
    c = params.pop("C", 5)
    lam1 = params.pop("lam1", 4)
    lam2 = params.pop("lam2", 4)
    _reject_extras("intro", params)
    return intro_counterexample(b, c, weights=_weights_or_none(lam1, lam2))


def _preset_example1(**params) -> ModelSpec:
    kw = {
        "l": params.pop("l", 2),
        "q": params.pop("q", 2),
        "r": params.pop("r", 2),
        "a": params.pop("A", 1),
        "b": params.pop("B", 2),
        "c": params.pop("C", 2),
    }
    _reject_extras("example1", params)
    return example1(**kw)


def _preset_example2(**params) -> ModelSpec:
    zeta = tuple(params.pop("zeta", (1, 2, 2)))
    s = tuple(params.pop("s", (0, 0, 0)))
    _reject_extras("example2", params)
    kernel = U * V * W
    return example2(kernel, kernel, kernel, zeta, s, weights=IwscWeights(Fraction(3), Fraction(3)))


def _preset_lv_sk_minus(**params) -> ModelSpec:
    tau = tuple(params.pop("tau", (0, 0, 0)))
    gamma = tuple(params.pop("gamma", (1, 1, 1)))
    _reject_extras("lv_sk_minus", params)
    return example3_lv(tau, gamma, SK_MINUS_MATRIX)


def _preset_lv_sk_plus(**params) -> ModelSpec:
    tau = tuple(params.pop("tau", (0, 0, 0)))
    gamma = tuple(params.pop("gamma", (1, 1, 1)))
    _reject_extras("lv_sk_plus", params)
    return example3_lv(tau, gamma, SK_PLUS_MATRIX)


def _preset_mass_conserving(**params) -> ModelSpec:
    _reject_extras("mass_conserving", params)
    return mass_conserving()


def _preset_triple_product(**params) -> ModelSpec:
    _reject_extras("triple_product", params)
    return triple_product()


def _reject_extras(name: str, params: dict) -> None:
    if params:
        raise ValueError(f"unknown parameters for preset {name!r}: {sorted(params)}")


PRESETS = {
    "intro": _preset_intro,
    "example1": _preset_example1,
    "example2": _preset_example2,
    "lv_sk_minus": _preset_lv_sk_minus,
    "lv_sk_plus": _preset_lv_sk_plus,
    "mass_conserving": _preset_mass_conserving,
    "triple_product": _preset_triple_product,
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def build_preset(name: str, params: dict | None = None) -> ModelSpec:
    """Construct a registered model; every registered model must pass the
    quasi-positivity certificate."""
    if name not in PRESETS:
        raise KeyError(f"unknown model {name!r}; available: {', '.join(preset_names())}")
    model = PRESETS[name](**dict(params or {}))
    verdict = check_quasi_positivity(model.n)
    if verdict.status != CERTIFIED:
        raise ValueError(f"model {name!r} failed the quasi-positivity certificate")
    return model
